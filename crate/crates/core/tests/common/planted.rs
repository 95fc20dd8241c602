//! Random programs with a planted hidden module, plus an independent model
//! of which components survive its elimination.
//!
//! A program has outer abstract types `o*`, a hidden module with types
//! `h*` (abstract, variant, or manifest pointing in or out of the module),
//! and after it outer types `a*`, values `v*` and exceptions `E*` whose
//! types mention any of those.

use std::collections::HashSet;

use proptest::prelude::*;

use minimod::mod_typing::check_program;
use minimod::nondep::{hidden_set, nondep_items};
use minimod::printer::{print_signature, PrintMode};
use minimod::semobj::{match_modtype, Ident, ItemKind, ModType, Path, Session, SigItem, Ty, TypeDecl};
use minimod::syntax::parse_program;

#[derive(Clone, Debug)]
pub enum Shape {
    Leaf(u8),
    Pair(Box<Shape>, Box<Shape>),
    Arrow(Box<Shape>, Box<Shape>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Atom {
    Int,
    Outer(usize),
    Hidden(usize),
    After(usize),
}

#[derive(Clone, Debug)]
pub enum T {
    Atom(Atom),
    Pair(Box<T>, Box<T>),
    Arrow(Box<T>, Box<T>),
}

#[derive(Clone, Debug)]
pub enum Decl {
    Abstract,
    Variant(Option<T>),
    Alias(T),
}

#[derive(Clone, Debug)]
pub struct Planted {
    pub outer: usize,
    pub hidden: Vec<Decl>,
    pub after: Vec<Decl>,
    pub values: Vec<T>,
    pub exns: Vec<T>,
}

fn resolve(s: &Shape, pool: &[Atom]) -> T {
    match s {
        Shape::Leaf(i) => T::Atom(pool[*i as usize % pool.len()]),
        Shape::Pair(a, b) => T::Pair(Box::new(resolve(a, pool)), Box::new(resolve(b, pool))),
        Shape::Arrow(a, b) => T::Arrow(Box::new(resolve(a, pool)), Box::new(resolve(b, pool))),
    }
}

fn shape() -> impl Strategy<Value = Shape> {
    any::<u8>().prop_map(Shape::Leaf).prop_recursive(3, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Shape::Pair(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Shape::Arrow(Box::new(a), Box::new(b))),
        ]
    })
}

fn pool(outer: usize, hidden: usize, after: usize) -> Vec<Atom> {
    let mut p = vec![Atom::Int];
    p.extend((0..outer).map(Atom::Outer));
    p.extend((0..hidden).map(Atom::Hidden));
    p.extend((0..after).map(Atom::After));
    p
}

pub fn planted() -> impl Strategy<Value = Planted> {
    (
        1..3usize,
        prop::collection::vec((0..4u8, shape()), 1..5),
        prop::collection::vec((0..3u8, shape()), 0..4),
        prop::collection::vec(shape(), 0..4),
        prop::collection::vec(shape(), 0..2),
    )
        .prop_map(|(outer, hs, as_, vs, es)| {
            let nh = hs.len();
            let hidden = hs
                .iter()
                .enumerate()
                .map(|(i, (k, s))| {
                    let t = resolve(s, &pool(outer, i, 0));
                    match k {
                        0 => Decl::Abstract,
                        1 => Decl::Variant(None),
                        _ => Decl::Alias(t),
                    }
                })
                .collect();
            let after = as_
                .iter()
                .enumerate()
                .map(|(m, (k, s))| {
                    let t = resolve(s, &pool(outer, nh, m));
                    if *k == 0 { Decl::Variant(Some(t)) } else { Decl::Alias(t) }
                })
                .collect();
            let na = as_.len();
            Planted {
                outer,
                hidden,
                after,
                values: vs.iter().map(|s| resolve(s, &pool(outer, nh, na))).collect(),
                exns: es.iter().map(|s| resolve(s, &pool(outer, nh, na))).collect(),
            }
        })
}

fn ty_src(t: &T) -> String {
    match t {
        T::Atom(Atom::Int) => "int".into(),
        T::Atom(Atom::Outer(i)) => format!("o{i}"),
        T::Atom(Atom::Hidden(i)) => format!("h{i}"),
        T::Atom(Atom::After(i)) => format!("a{i}"),
        T::Pair(a, b) => format!("({} * {})", ty_src(a), ty_src(b)),
        T::Arrow(a, b) => format!("({} -> {})", ty_src(a), ty_src(b)),
    }
}

fn decl_src(prefix: &str, i: usize, d: &Decl) -> String {
    match d {
        Decl::Abstract => format!("type {prefix}{i}"),
        Decl::Variant(None) => format!("type {prefix}{i} = C{prefix}{i}"),
        Decl::Variant(Some(t)) => format!("type {prefix}{i} = C{prefix}{i} of {}", ty_src(t)),
        Decl::Alias(t) => format!("type {prefix}{i} = {}", ty_src(t)),
    }
}

impl Planted {
    fn render(&self, hidden_header: &str, hidden_footer: &str) -> String {
        let mut out = String::new();
        for i in 0..self.outer {
            out.push_str(&format!("type o{i}\n"));
        }
        out.push_str(hidden_header);
        for (i, d) in self.hidden.iter().enumerate() {
            out.push_str(&format!("  {}\n", decl_src("h", i, d)));
        }
        out.push_str(hidden_footer);
        for (i, d) in self.after.iter().enumerate() {
            out.push_str(&format!("{}\n", decl_src("a", i, d)));
        }
        for (i, t) in self.values.iter().enumerate() {
            out.push_str(&format!("let v{i} (x : {}) = x\n", ty_src(t)));
        }
        for (i, t) in self.exns.iter().enumerate() {
            out.push_str(&format!("exception E{i} of {}\n", ty_src(t)));
        }
        out
    }

    /// The program with `open struct ... end`.
    pub fn with_open(&self) -> String {
        self.render("open struct\n", "end\n")
    }

    /// The same program with the hidden module named `Hidden` and opened
    /// as a path.
    pub fn with_named(&self) -> String {
        self.render("module Hidden = struct\n", "end\nopen Hidden\n")
    }

    /// Whether `t` can be rewritten to avoid every `h*`.
    pub fn avoidable(&self, t: &T) -> bool {
        match t {
            T::Atom(Atom::Hidden(i)) => match &self.hidden[*i] {
                Decl::Alias(u) => self.avoidable(u),
                Decl::Abstract | Decl::Variant(_) => false,
            },
            T::Atom(_) => true,
            T::Pair(a, b) | T::Arrow(a, b) => self.avoidable(a) && self.avoidable(b),
        }
    }

    /// Whether elimination should succeed: values, exception arguments and
    /// constructor arguments can never be dropped.
    pub fn expect_accepted(&self) -> bool {
        self.values.iter().all(|t| self.avoidable(t))
            && self.exns.iter().all(|t| self.avoidable(t))
            && self.after.iter().all(|d| match d {
                Decl::Variant(Some(t)) => self.avoidable(t),
                _ => true,
            })
    }

    /// For each `a*`, whether its manifest should survive elimination.
    pub fn expect_manifest(&self) -> Vec<bool> {
        self.after
            .iter()
            .map(|d| match d {
                Decl::Alias(t) => self.avoidable(t),
                _ => false,
            })
            .collect()
    }
}

fn path_hits(p: &Path, set: &HashSet<Ident>) -> bool {
    match p {
        Path::Ident(id) => set.contains(id),
        Path::Dot(q, _) => path_hits(q, set),
        Path::Apply(f, a) => path_hits(f, set) || path_hits(a, set),
    }
}

fn ty_hits(t: &Ty, set: &HashSet<Ident>) -> bool {
    match t {
        Ty::Var(_) => false,
        Ty::Arrow(a, b) => ty_hits(a, set) || ty_hits(b, set),
        Ty::Tuple(ts) => ts.iter().any(|t| ty_hits(t, set)),
        Ty::Constr(p, args) => path_hits(p, set) || args.iter().any(|t| ty_hits(t, set)),
    }
}

fn decl_hits(d: &TypeDecl, set: &HashSet<Ident>) -> bool {
    d.manifest.as_ref().is_some_and(|m| ty_hits(m, set))
        || d.variant
            .iter()
            .flatten()
            .any(|c| c.args.iter().any(|t| ty_hits(t, set)))
}

fn modtype_hits(m: &ModType, set: &HashSet<Ident>) -> bool {
    match m {
        ModType::Sig(items) => items_hit(items, set),
        ModType::Functor(_, p, r) => modtype_hits(p, set) || modtype_hits(r, set),
        ModType::Named(p) => path_hits(p, set),
    }
}

/// Whether any path anywhere in `items` is rooted at an ident of `set`, or
/// an item declares one.
pub fn items_hit(items: &[SigItem], set: &HashSet<Ident>) -> bool {
    items.iter().any(|it| match it {
        SigItem::Val(id, s) => set.contains(id) || ty_hits(&s.body, set),
        SigItem::Type(id, d) => set.contains(id) || decl_hits(d, set),
        SigItem::Module(id, m) => set.contains(id) || modtype_hits(m, set),
        SigItem::ModType(id, m) => set.contains(id) || m.as_ref().is_some_and(|m| modtype_hits(m, set)),
        SigItem::Exn(id, args) => set.contains(id) || args.iter().any(|t| ty_hits(t, set)),
    })
}

/// Whether any ident in `items` renders with the hidden `#` marker.
pub fn has_hidden_name(items: &[SigItem]) -> bool {
    fn ty(t: &Ty) -> bool {
        match t {
            Ty::Var(_) => false,
            Ty::Arrow(a, b) => ty(a) || ty(b),
            Ty::Tuple(ts) => ts.iter().any(ty),
            Ty::Constr(p, args) => path(p) || args.iter().any(ty),
        }
    }
    fn path(p: &Path) -> bool {
        match p {
            Path::Ident(id) => id.name.contains('#'),
            Path::Dot(q, _) => path(q),
            Path::Apply(f, a) => path(f) || path(a),
        }
    }
    fn modtype(m: &ModType) -> bool {
        match m {
            ModType::Sig(items) => has_hidden_name(items),
            ModType::Functor(x, p, r) => x.name.contains('#') || modtype(p) || modtype(r),
            ModType::Named(p) => path(p),
        }
    }
    items.iter().any(|it| match it {
        SigItem::Val(id, s) => id.name.contains('#') || ty(&s.body),
        SigItem::Type(id, d) => {
            id.name.contains('#')
                || d.manifest.as_ref().is_some_and(ty)
                || d.variant.iter().flatten().any(|c| c.args.iter().any(ty))
        }
        SigItem::Module(id, m) => id.name.contains('#') || modtype(m),
        SigItem::ModType(id, m) => id.name.contains('#') || m.as_ref().is_some_and(modtype),
        SigItem::Exn(id, args) => id.name.contains('#') || args.iter().any(ty),
    })
}

/// Victims the model predicts, in signature order.
fn expected_victims(p: &Planted) -> Vec<(ItemKind, String)> {
    let mut out = Vec::new();
    for (i, d) in p.after.iter().enumerate() {
        if let Decl::Variant(Some(t)) = d {
            if !p.avoidable(t) {
                out.push((ItemKind::Type, format!("a{i}")));
            }
        }
    }
    for (i, t) in p.values.iter().enumerate() {
        if !p.avoidable(t) {
            out.push((ItemKind::Value, format!("v{i}")));
        }
    }
    for (i, t) in p.exns.iter().enumerate() {
        if !p.avoidable(t) {
            out.push((ItemKind::Exception, format!("E{i}")));
        }
    }
    out
}

pub fn check_planted(p: &Planted) -> Result<(), TestCaseError> {
    let named = parse_program(&p.with_named()).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let mut sess = Session::new();
    let sig = check_program(&mut sess, &named)
        .map_err(|e| TestCaseError::fail(format!("{e}\n{}", p.with_named())))?
        .signature;
    let pos = sig
        .iter()
        .position(|it| matches!(it, SigItem::Module(id, _) if id.name == "Hidden"))
        .expect("Hidden in signature");
    let SigItem::Module(h, hty) = &sig[pos] else { unreachable!() };
    let set = hidden_set(h, hty);
    let rest = &sig[pos + 1..];
    let result = nondep_items(&sess, &set, rest);

    let open = parse_program(&p.with_open()).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let mut open_sess = Session::new();
    let open_checked = check_program(&mut open_sess, &open);

    match result {
        Ok(res) => {
            prop_assert!(p.expect_accepted(), "unexpected success:\n{}", p.with_named());
            prop_assert!(!items_hit(&res, &set));
            let whole = ModType::Sig(sig.clone());
            let cut = ModType::Sig(res.clone());
            prop_assert!(match_modtype(&mut sess, &whole, &cut).is_ok());
            let again = nondep_items(&sess, &set, &res);
            prop_assert_eq!(again.as_ref(), Ok(&res));
            for (i, keep) in p.expect_manifest().into_iter().enumerate() {
                let name = format!("a{i}");
                let decl = res.iter().find_map(|it| match it {
                    SigItem::Type(id, d) if id.name == name => Some(d),
                    _ => None,
                });
                let decl = decl.expect("a* survives");
                if matches!(p.after[i], Decl::Alias(_)) {
                    prop_assert_eq!(decl.manifest.is_some(), keep, "{}\n{}", name, p.with_named());
                }
            }
            let open_sig = open_checked
                .map_err(|e| TestCaseError::fail(format!("open form rejected: {e}")))?
                .signature;
            prop_assert!(!has_hidden_name(&open_sig));
            let full: Vec<SigItem> = sig[..pos].iter().chain(&res).cloned().collect();
            let a = print_signature(&sess, &full, PrintMode::Plain).unwrap();
            let b = print_signature(&open_sess, &open_sig, PrintMode::Plain).unwrap();
            prop_assert_eq!(a, b);
        }
        Err(victims) => {
            prop_assert!(!p.expect_accepted(), "unexpected failure:\n{}", p.with_named());
            let got: Vec<(ItemKind, String)> = victims.iter().map(|v| (v.kind, v.name.clone())).collect();
            prop_assert_eq!(got, expected_victims(p));
            prop_assert!(victims.iter().all(|v| set.contains(&v.blocking)));
            prop_assert!(open_checked.is_err());
        }
    }
    Ok(())
}
