use std::fmt;

use thiserror::Error;

use super::session::Session;
use super::subst::Subst;
use super::types::*;
use crate::core_typing::unify::unify;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchReason {
    Missing,
    Arity,
    TypeMismatch,
    NotGeneral,
    KindMismatch,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub struct MatchError {
    pub kind: ItemKind,
    pub name: String,
    pub reason: MatchReason,
}

impl fmt::Display for MatchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = format!("{} {}", self.kind.word(), self.name);
        match self.reason {
            MatchReason::Missing => write!(f, "Signature mismatch: The {what} is required but not provided"),
            MatchReason::Arity => write!(f, "Signature mismatch: The {what} has the wrong number of parameters"),
            MatchReason::TypeMismatch => write!(f, "Signature mismatch: The {what} does not match its specification"),
            MatchReason::NotGeneral => {
                write!(f, "Signature mismatch: The {what} is not as general as its specification")
            }
            MatchReason::KindMismatch => {
                write!(f, "Signature mismatch: The {what} does not have the shape of its specification")
            }
        }
    }
}

/// Checks that `cand` is a subtype of `target`.
pub fn match_modtype(sess: &mut Session, cand: &ModType, target: &ModType) -> Result<(), MatchError> {
    sess.begin_overlay();
    let r = match_at(sess, cand, target, ItemKind::Module, "");
    sess.end_overlay();
    r
}

fn match_at(
    sess: &mut Session,
    cand: &ModType,
    target: &ModType,
    kind: ItemKind,
    name: &str,
) -> Result<(), MatchError> {
    let err = |reason| MatchError {
        kind,
        name: name.to_string(),
        reason,
    };
    let c = sess.expand_modtype(cand).map_err(|_| err(MatchReason::KindMismatch))?;
    let t = sess.expand_modtype(target).map_err(|_| err(MatchReason::KindMismatch))?;
    match (&c, &t) {
        (ModType::Named(p), ModType::Named(q)) if p == q => Ok(()),
        (_, ModType::Named(_)) => Err(err(MatchReason::KindMismatch)),
        (ModType::Sig(cs), ModType::Sig(ts)) => match_sigs(sess, cs, ts),
        (ModType::Functor(x1, p1, r1), ModType::Functor(x2, p2, r2)) => {
            sess.define_module(x2, (**p2).clone());
            match_at(sess, p2, p1, kind, name)?;
            let r1 = Subst::single(x1, Path::Ident(x2.clone())).modtype(r1);
            match_at(sess, &r1, r2, kind, name)
        }
        _ => Err(err(MatchReason::KindMismatch)),
    }
}

/// Position of the candidate item paired with `ts[j]`: same kind and name,
/// same rank counted from the end.
fn partner(cs: &[SigItem], ts: &[SigItem], j: usize) -> Option<usize> {
    let t = &ts[j];
    let same = |it: &SigItem| it.kind() == t.kind() && it.name() == t.name();
    let rank = ts[j + 1..].iter().filter(|it| same(it)).count();
    cs.iter()
        .enumerate()
        .rev()
        .filter(|(_, it)| same(it))
        .nth(rank)
        .map(|(i, _)| i)
}

fn match_sigs(sess: &mut Session, cs: &[SigItem], ts: &[SigItem]) -> Result<(), MatchError> {
    sess.register_items(cs, true);
    let mut pairs = Vec::new();
    let mut sub = Subst::new();
    for j in 0..ts.len() {
        let t = &ts[j];
        let i = partner(cs, ts, j).ok_or_else(|| MatchError {
            kind: t.kind(),
            name: t.name().to_string(),
            reason: MatchReason::Missing,
        })?;
        sub.add_path(t.ident(), Path::Ident(cs[i].ident().clone()));
        pairs.push((i, j));
    }
    for (i, j) in pairs {
        let t = sub.item(&ts[j]);
        match_item(sess, &cs[i], &t)?;
    }
    Ok(())
}

fn match_item(sess: &mut Session, c: &SigItem, t: &SigItem) -> Result<(), MatchError> {
    let err = |reason| MatchError {
        kind: t.kind(),
        name: t.name().to_string(),
        reason,
    };
    match (c, t) {
        (SigItem::Val(_, cs), SigItem::Val(_, ts)) => {
            let tb = sess.skolemize(ts);
            let cb = sess.instantiate(cs);
            unify(sess, &cb, &tb).map_err(|_| err(MatchReason::NotGeneral))
        }
        (SigItem::Type(cid, cd), SigItem::Type(_, td)) => {
            if cd.arity() != td.arity() {
                return Err(err(MatchReason::Arity));
            }
            let args: Vec<Ty> = td.params.iter().map(|v| Ty::Var(*v)).collect();
            let rename = |ty: &Ty| ty.instantiate_params(&cd.params, &args);
            if let Some(m) = &td.manifest {
                let own = Ty::Constr(Path::Ident(cid.clone()), args.clone());
                if !sess.types_equal(&own, m) {
                    return Err(err(MatchReason::TypeMismatch));
                }
            }
            if let Some(tv) = &td.variant {
                let Some(cv) = &cd.variant else {
                    return Err(err(MatchReason::TypeMismatch));
                };
                let same = cv.len() == tv.len()
                    && cv.iter().zip(tv).all(|(a, b)| {
                        a.name == b.name
                            && a.args.len() == b.args.len()
                            && a.args.iter().zip(&b.args).all(|(x, y)| sess.types_equal(&rename(x), y))
                    });
                if !same {
                    return Err(err(MatchReason::TypeMismatch));
                }
            }
            Ok(())
        }
        (SigItem::Module(_, cm), SigItem::Module(_, tm)) => match_at(sess, cm, tm, ItemKind::Module, t.name()),
        (SigItem::ModType(_, cm), SigItem::ModType(_, tm)) => match (cm, tm) {
            (_, None) => Ok(()),
            (Some(cm), Some(tm)) => {
                match_at(sess, cm, tm, ItemKind::ModType, t.name())?;
                match_at(sess, tm, cm, ItemKind::ModType, t.name())
            }
            (None, Some(_)) => Err(err(MatchReason::TypeMismatch)),
        },
        (SigItem::Exn(_, ca), SigItem::Exn(_, ta)) => {
            if ca.len() == ta.len() && ca.iter().zip(ta).all(|(x, y)| sess.types_equal(x, y)) {
                Ok(())
            } else {
                Err(err(MatchReason::TypeMismatch))
            }
        }
        _ => Err(err(MatchReason::KindMismatch)),
    }
}
