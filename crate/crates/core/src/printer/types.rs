use std::collections::HashMap;

use crate::semobj::{Path, Session, Ty, TyVar};

/// Names type variables `'a`, `'b`, ... in order of first appearance.
#[derive(Default)]
pub struct VarNames {
    names: HashMap<TyVar, String>,
}

impl VarNames {
    pub fn name(&mut self, v: TyVar) -> String {
        let n = self.names.len();
        self.names.entry(v).or_insert_with(|| var_name(n)).clone()
    }
}

fn var_name(n: usize) -> String {
    let letter = (b'a' + (n % 26) as u8) as char;
    if n < 26 {
        format!("'{letter}")
    } else {
        format!("'{letter}{}", n / 26)
    }
}

pub const ARROW: u8 = 0;
pub const TUPLE: u8 = 1;
pub const ATOM: u8 = 2;

pub fn fmt_ty(sess: &Session, t: &Ty, names: &mut VarNames, path: &dyn Fn(&Path) -> String) -> String {
    fmt_at(sess, t, names, path, ARROW)
}

pub fn fmt_at(sess: &Session, t: &Ty, names: &mut VarNames, path: &dyn Fn(&Path) -> String, level: u8) -> String {
    match sess.head(t) {
        Ty::Var(v) => names.name(v),
        Ty::Arrow(a, b) => {
            let s = format!(
                "{} -> {}",
                fmt_at(sess, &a, names, path, TUPLE),
                fmt_at(sess, &b, names, path, ARROW)
            );
            paren(s, level > ARROW)
        }
        Ty::Tuple(ts) => {
            let parts: Vec<String> = ts.iter().map(|t| fmt_at(sess, t, names, path, ATOM)).collect();
            paren(parts.join(" * "), level > TUPLE)
        }
        Ty::Constr(p, args) => {
            let head = path(&p);
            match args.len() {
                0 => head,
                1 => format!("{} {head}", fmt_at(sess, &args[0], names, path, ATOM)),
                _ => {
                    let parts: Vec<String> = args.iter().map(|t| fmt_at(sess, t, names, path, ARROW)).collect();
                    format!("({}) {head}", parts.join(", "))
                }
            }
        }
    }
}

fn paren(s: String, yes: bool) -> String {
    if yes {
        format!("({s})")
    } else {
        s
    }
}

/// Renders types sharing one variable naming, with plain path names.
pub fn types_to_strings(sess: &Session, ts: &[&Ty]) -> Vec<String> {
    let mut names = VarNames::default();
    ts.iter()
        .map(|t| fmt_ty(sess, t, &mut names, &|p: &Path| p.to_string()))
        .collect()
}

pub fn type_to_string(sess: &Session, t: &Ty) -> String {
    types_to_strings(sess, &[t]).remove(0)
}
