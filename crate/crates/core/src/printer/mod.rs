//! Rendering of signatures and diagnostics.

mod diagnostic;
pub mod types;

pub use diagnostic::{render_diagnostic, Diagnostic};

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::semobj::*;
use types::{fmt_at, VarNames, ARROW, ATOM};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PrintMode {
    /// Bare names, ambiguous when a name is shadowed.
    Plain,
    /// `name/stamp` wherever a name denotes more than one ident.
    Stamps,
    /// Shadowed names are reached through `type t' := t` aliases.
    #[default]
    Aliases,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("hidden ident {0} in an exported signature")]
pub struct HiddenIdentPresent(pub String);

pub fn print_signature(sess: &Session, sig: &[SigItem], mode: PrintMode) -> Result<String, HiddenIdentPresent> {
    if let Some(h) = first_hidden(sig) {
        return Err(HiddenIdentPresent(h));
    }
    let mut pr = SigPrinter::new(sess, mode, sig);
    Ok(pr.items(sig).join("\n"))
}

/// Renders a module type on its own, e.g. `sig val x : int end`.
pub fn print_modtype(sess: &Session, m: &ModType, mode: PrintMode) -> String {
    let items = match m {
        ModType::Sig(items) => items.clone(),
        _ => Vec::new(),
    };
    let mut pr = SigPrinter::new(sess, mode, &items);
    pr.modtype(m)
}

fn first_hidden(sig: &[SigItem]) -> Option<String> {
    for it in sig {
        if it.ident().is_hidden() {
            return Some(it.ident().with_stamp());
        }
    }
    let m = ModType::Sig(sig.to_vec());
    if has_hidden_names(&m) {
        let mut ps = Vec::new();
        scan_paths_modtype(&m, &mut ps);
        for p in ps {
            let mut ids = Vec::new();
            p.idents(&mut ids);
            if let Some(h) = ids.iter().find(|i| i.is_hidden()) {
                return Some(h.with_stamp());
            }
        }
    }
    None
}

const NS_TYPE: u8 = 1;
const NS_MODULE: u8 = 2;
const NS_MODTYPE: u8 = 3;

fn namespace(it: &SigItem) -> u8 {
    it.kind().namespace()
}

/// Items of one signature being printed, and what is bound so far.
struct Frame {
    id: usize,
    pos: usize,
    /// (namespace, ident, index of the item, index where its group starts)
    bound: Vec<(u8, Ident, usize, usize)>,
}

struct SigPrinter<'a> {
    sess: &'a Session,
    mode: PrintMode,
    frames: Vec<Frame>,
    next_frame: usize,
    declared_at: HashMap<Ident, (usize, usize)>,
    /// Alias lines to insert before item `.1` of frame `.0`.
    aliases: HashMap<(usize, usize), Vec<String>>,
    alias_names: HashMap<(Path, usize, usize), String>,
    used_names: HashSet<String>,
    ambiguous: HashSet<(u8, String)>,
}

impl<'a> SigPrinter<'a> {
    fn new(sess: &'a Session, mode: PrintMode, sig: &[SigItem]) -> SigPrinter<'a> {
        let mut seen: HashMap<(u8, String), HashSet<Ident>> = HashMap::new();
        let mut used = HashSet::new();
        collect_names(&ModType::Sig(sig.to_vec()), &mut seen, &mut used);
        let ambiguous = seen.into_iter().filter(|(_, ids)| ids.len() > 1).map(|(k, _)| k).collect();
        SigPrinter {
            sess,
            mode,
            frames: Vec::new(),
            next_frame: 0,
            declared_at: HashMap::new(),
            aliases: HashMap::new(),
            alias_names: HashMap::new(),
            used_names: used,
            ambiguous,
        }
    }

    fn push_frame(&mut self) -> usize {
        let id = self.next_frame;
        self.next_frame += 1;
        self.frames.push(Frame {
            id,
            pos: 0,
            bound: Vec::new(),
        });
        id
    }

    fn bind(&mut self, ns: u8, id: &Ident, index: usize, group: usize) {
        let frame = self.frames.last_mut().expect("frame");
        self.declared_at.insert(id.clone(), (frame.id, index));
        frame.bound.push((ns, id.clone(), index, group));
    }

    fn visible(&self, ns: u8, name: &str) -> Option<&Ident> {
        self.frames.iter().rev().find_map(|f| {
            f.bound
                .iter()
                .rev()
                .find(|(n, id, _, _)| *n == ns && id.name == name)
                .map(|(_, id, _, _)| id)
        })
    }

    fn ident(&self, ns: u8, id: &Ident) -> String {
        if self.mode == PrintMode::Stamps && self.ambiguous.contains(&(ns, id.name.clone())) {
            id.with_stamp()
        } else {
            id.name.clone()
        }
    }

    fn path(&self, ns: u8, p: &Path) -> String {
        match p {
            Path::Ident(id) => self.ident(ns, id),
            Path::Dot(q, n) => format!("{}.{n}", self.path(NS_MODULE, q)),
            Path::Apply(f, a) => format!("{}({})", self.path(NS_MODULE, f), self.path(NS_MODULE, a)),
        }
    }

    /// A type constructor path at the current point; in alias mode a
    /// shadowed head is reached through an alias declared before the
    /// shadowing item.
    fn type_path(&mut self, p: &Path, arity: usize) -> String {
        if self.mode != PrintMode::Aliases {
            return self.path(NS_TYPE, p);
        }
        let (ns, head) = match p {
            Path::Ident(id) => (NS_TYPE, id),
            _ => (NS_MODULE, p.head()),
        };
        if self.visible(ns, &head.name) == Some(head) {
            return self.path(NS_TYPE, p);
        }
        let Some(&(frame_id, index)) = self.declared_at.get(head) else {
            return self.path(NS_TYPE, p);
        };
        let Some(frame) = self.frames.iter().find(|f| f.id == frame_id) else {
            return self.path(NS_TYPE, p);
        };
        let shadow = frame
            .bound
            .iter()
            .filter(|(n, id, i, _)| *n == ns && id.name == head.name && *i > index && *i < frame.pos)
            .map(|(_, _, _, g)| *g)
            .min()
            .unwrap_or(frame.pos);
        if shadow <= index {
            return self.path(NS_TYPE, p);
        }
        let key = (p.clone(), frame_id, shadow);
        if let Some(n) = self.alias_names.get(&key) {
            return n.clone();
        }
        let base = match p {
            Path::Dot(_, n) => n.clone(),
            _ => head.name.clone(),
        };
        let mut name = format!("{base}'");
        while self.used_names.contains(&name) {
            name.push('\'');
        }
        self.used_names.insert(name.clone());
        let params = param_list(arity);
        let line = format!("type {params}{name} := {params}{}", self.path(NS_TYPE, p));
        self.aliases.entry((frame_id, shadow)).or_default().push(line);
        self.alias_names.insert(key, name.clone());
        name
    }

    fn ty(&mut self, t: &Ty, names: &mut VarNames, level: u8) -> String {
        // Paths are rendered first so that alias creation can borrow `self`.
        let mut rendered = HashMap::new();
        self.collect_paths(t, &mut rendered);
        let lookup = |p: &Path| rendered.get(p).cloned().unwrap_or_else(|| p.to_string());
        fmt_at(self.sess, t, names, &lookup, level)
    }

    fn collect_paths(&mut self, t: &Ty, out: &mut HashMap<Path, String>) {
        match self.sess.head(t) {
            Ty::Var(_) => {}
            Ty::Arrow(a, b) => {
                self.collect_paths(&a, out);
                self.collect_paths(&b, out);
            }
            Ty::Tuple(ts) => ts.iter().for_each(|t| self.collect_paths(t, out)),
            Ty::Constr(p, args) => {
                if !out.contains_key(&p) {
                    let s = self.type_path(&p, args.len());
                    out.insert(p.clone(), s);
                }
                args.iter().for_each(|t| self.collect_paths(t, out));
            }
        }
    }

    fn items(&mut self, items: &[SigItem]) -> Vec<String> {
        let frame_id = self.push_frame();
        let groups = type_groups(items);
        let mut chunks: Vec<(usize, String)> = Vec::new();
        let mut i = 0;
        while i < items.len() {
            self.frames.last_mut().expect("frame").pos = i;
            let it = &items[i];
            match it {
                SigItem::Type(..) => {
                    let end = groups[i];
                    for (k, member) in items[i..end].iter().enumerate() {
                        self.bind(NS_TYPE, member.ident(), i + k, i);
                    }
                    let mut parts = Vec::new();
                    for (k, member) in items[i..end].iter().enumerate() {
                        let SigItem::Type(id, decl) = member else { unreachable!() };
                        let kw = if k == 0 { "type" } else { "and" };
                        parts.push(format!("{kw} {}", self.type_decl(id, decl)));
                    }
                    chunks.push((i, parts.join("\n")));
                    i = end;
                    continue;
                }
                SigItem::Val(id, scheme) => {
                    let mut names = VarNames::default();
                    let t = self.ty(&scheme.body, &mut names, ARROW);
                    chunks.push((i, format!("val {} : {t}", value_name(&self.ident(0, id)))));
                }
                SigItem::Exn(id, args) => {
                    let mut names = VarNames::default();
                    let s = if args.is_empty() {
                        format!("exception {}", self.ident(namespace(it), id))
                    } else {
                        let parts: Vec<String> = args.iter().map(|t| self.ty(t, &mut names, ATOM)).collect();
                        format!("exception {} of {}", self.ident(namespace(it), id), parts.join(" * "))
                    };
                    chunks.push((i, s));
                }
                SigItem::Module(id, m) => {
                    let body = self.modtype(m);
                    chunks.push((i, format!("module {} : {body}", self.ident(NS_MODULE, id))));
                    self.bind(NS_MODULE, id, i, i);
                }
                SigItem::ModType(id, m) => {
                    let s = match m {
                        Some(m) => format!("module type {} = {}", self.ident(NS_MODTYPE, id), self.modtype(m)),
                        None => format!("module type {}", self.ident(NS_MODTYPE, id)),
                    };
                    chunks.push((i, s));
                    self.bind(NS_MODTYPE, id, i, i);
                }
            }
            i += 1;
        }
        self.frames.pop();
        let mut out = Vec::new();
        for (start, chunk) in chunks {
            if let Some(lines) = self.aliases.remove(&(frame_id, start)) {
                out.extend(lines);
            }
            out.push(chunk);
        }
        out
    }

    fn type_decl(&mut self, id: &Ident, decl: &TypeDecl) -> String {
        let mut names = VarNames::default();
        let params: Vec<String> = decl.params.iter().map(|v| names.name(*v)).collect();
        let mut s = format!("{}{}", params_prefix(&params), self.ident(NS_TYPE, id));
        if let Some(m) = &decl.manifest {
            s.push_str(" = ");
            s.push_str(&self.ty(m, &mut names, ARROW));
        }
        if let Some(ctors) = &decl.variant {
            let mut alts = Vec::new();
            for c in ctors {
                if c.args.is_empty() {
                    alts.push(c.name.clone());
                } else {
                    let parts: Vec<String> = c.args.iter().map(|t| self.ty(t, &mut names, ATOM)).collect();
                    alts.push(format!("{} of {}", c.name, parts.join(" * ")));
                }
            }
            s.push_str(" = ");
            s.push_str(&alts.join(" | "));
        }
        s
    }

    fn modtype(&mut self, m: &ModType) -> String {
        match m {
            ModType::Named(p) => match p {
                Path::Ident(id) => self.ident(NS_MODTYPE, id),
                _ => self.path(NS_MODTYPE, p),
            },
            ModType::Sig(items) if items.is_empty() => "sig end".to_string(),
            ModType::Sig(items) => {
                let lines = self.items(items);
                let simple_types = items
                    .iter()
                    .all(|it| matches!(it, SigItem::Type(_, d) if d.variant.is_none()));
                let one_line = lines.iter().all(|l| !l.contains('\n'));
                if one_line && (lines.len() == 1 || (simple_types && lines.len() == items.len())) {
                    format!("sig {} end", lines.join(" "))
                } else {
                    format!("sig\n{}\nend", indent(&lines.join("\n")))
                }
            }
            ModType::Functor(x, p, r) => {
                let ps = self.modtype(p);
                self.push_frame();
                self.bind(NS_MODULE, x, 0, 0);
                self.frames.last_mut().expect("frame").pos = 1;
                let rs = self.modtype(r);
                self.frames.pop();
                format!("functor ({} : {ps}) -> {rs}", self.ident(NS_MODULE, x))
            }
        }
    }
}

/// For each type item, the end of the run of type items it must be printed
/// with (forward references need `and`).
fn type_groups(items: &[SigItem]) -> Vec<usize> {
    let mut ends: Vec<usize> = (1..=items.len()).collect();
    let mut i = 0;
    while i < items.len() {
        if !matches!(items[i], SigItem::Type(..)) {
            i += 1;
            continue;
        }
        let mut run_end = i;
        while run_end < items.len() && matches!(items[run_end], SigItem::Type(..)) {
            run_end += 1;
        }
        let mut start = i;
        while start < run_end {
            let mut end = start + 1;
            let mut k = start;
            while k < end {
                for (j, later) in items.iter().enumerate().take(run_end).skip(k + 1) {
                    if item_mentions(&items[k], later.ident()) {
                        end = end.max(j + 1);
                    }
                }
                k += 1;
            }
            for e in ends.iter_mut().take(end).skip(start) {
                *e = end;
            }
            start = end;
        }
        i = run_end;
    }
    ends
}

fn item_mentions(it: &SigItem, id: &Ident) -> bool {
    let SigItem::Type(_, decl) = it else { return false };
    let set: HashSet<Ident> = [id.clone()].into_iter().collect();
    decl.manifest.iter().any(|t| t.mentions(&set))
        || decl
            .variant
            .iter()
            .flatten()
            .any(|c| c.args.iter().any(|t| t.mentions(&set)))
}

fn collect_names(m: &ModType, seen: &mut HashMap<(u8, String), HashSet<Ident>>, used: &mut HashSet<String>) {
    let mut paths = Vec::new();
    scan_paths_modtype(m, &mut paths);
    for p in &paths {
        match p {
            Path::Ident(id) => {
                used.insert(id.name.clone());
            }
            _ => {
                let mut ids = Vec::new();
                p.idents(&mut ids);
                for id in ids {
                    seen.entry((NS_MODULE, id.name.clone())).or_default().insert(id.clone());
                }
            }
        }
    }
    collect_type_refs(m, seen);
    collect_decls(m, seen, used);
}

/// Type-namespace references: the heads of type constructor paths.
fn collect_type_refs(m: &ModType, seen: &mut HashMap<(u8, String), HashSet<Ident>>) {
    let mut tys = Vec::new();
    modtype_types(m, &mut tys);
    for t in tys {
        let mut ps = Vec::new();
        t.paths(&mut ps);
        for p in ps {
            if let Path::Ident(id) = p {
                seen.entry((NS_TYPE, id.name.clone())).or_default().insert(id.clone());
            }
        }
    }
}

fn modtype_types(m: &ModType, out: &mut Vec<Ty>) {
    match m {
        ModType::Sig(items) => {
            for it in items {
                match it {
                    SigItem::Val(_, s) => out.push(s.body.clone()),
                    SigItem::Type(_, d) => {
                        out.extend(d.manifest.iter().cloned());
                        for c in d.variant.iter().flatten() {
                            out.extend(c.args.iter().cloned());
                        }
                    }
                    SigItem::Exn(_, args) => out.extend(args.iter().cloned()),
                    SigItem::Module(_, m) | SigItem::ModType(_, Some(m)) => modtype_types(m, out),
                    SigItem::ModType(_, None) => {}
                }
            }
        }
        ModType::Functor(_, p, r) => {
            modtype_types(p, out);
            modtype_types(r, out);
        }
        ModType::Named(_) => {}
    }
}

fn collect_decls(m: &ModType, seen: &mut HashMap<(u8, String), HashSet<Ident>>, used: &mut HashSet<String>) {
    match m {
        ModType::Sig(items) => {
            for it in items {
                used.insert(it.name().to_string());
                seen.entry((namespace(it), it.name().to_string()))
                    .or_default()
                    .insert(it.ident().clone());
                if let SigItem::Module(_, m) | SigItem::ModType(_, Some(m)) = it {
                    collect_decls(m, seen, used);
                }
            }
        }
        ModType::Functor(x, p, r) => {
            seen.entry((NS_MODULE, x.name.clone())).or_default().insert(x.clone());
            collect_decls(p, seen, used);
            collect_decls(r, seen, used);
        }
        ModType::Named(_) => {}
    }
}

fn param_list(arity: usize) -> String {
    let mut names = VarNames::default();
    let ps: Vec<String> = (0..arity as u32).map(|v| names.name(v)).collect();
    params_prefix(&ps)
}

fn params_prefix(ps: &[String]) -> String {
    match ps.len() {
        0 => String::new(),
        1 => format!("{} ", ps[0]),
        _ => format!("({}) ", ps.join(", ")),
    }
}

/// Operators are printed in parentheses: `( + )`.
fn value_name(name: &str) -> String {
    match name.chars().next() {
        Some(c) if c.is_alphabetic() || c == '_' => name.to_string(),
        _ => format!("( {name} )"),
    }
}

pub(crate) fn indent(s: &str) -> String {
    s.lines()
        .map(|l| if l.is_empty() { String::new() } else { format!("  {l}") })
        .collect::<Vec<_>>()
        .join("\n")
}
