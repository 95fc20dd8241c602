use std::collections::HashSet;
use std::fmt;

use super::ident::Ident;

/// Access path to a module or module component.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Path {
    Ident(Ident),
    Dot(Box<Path>, String),
    Apply(Box<Path>, Box<Path>),
}

impl Path {
    pub fn dot(self, name: impl Into<String>) -> Path {
        Path::Dot(Box::new(self), name.into())
    }

    pub fn head(&self) -> &Ident {
        match self {
            Path::Ident(id) => id,
            Path::Dot(p, _) | Path::Apply(p, _) => p.head(),
        }
    }

    /// Last component name.
    pub fn last_name(&self) -> &str {
        match self {
            Path::Ident(id) => &id.name,
            Path::Dot(_, n) => n,
            Path::Apply(f, _) => f.last_name(),
        }
    }

    /// Every ident occurring in the path, including functor arguments.
    pub fn idents(&self, out: &mut Vec<Ident>) {
        match self {
            Path::Ident(id) => out.push(id.clone()),
            Path::Dot(p, _) => p.idents(out),
            Path::Apply(f, a) => {
                f.idents(out);
                a.idents(out);
            }
        }
    }

    pub fn mentions(&self, set: &HashSet<Ident>) -> bool {
        match self {
            Path::Ident(id) => set.contains(id),
            Path::Dot(p, _) => p.mentions(set),
            Path::Apply(f, a) => f.mentions(set) || a.mentions(set),
        }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Path::Ident(id) => write!(f, "{}", id.name),
            Path::Dot(p, n) => write!(f, "{p}.{n}"),
            Path::Apply(p, a) => write!(f, "{p}({a})"),
        }
    }
}

/// Identifier of a type variable in the session's variable store.
pub type TyVar = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ty {
    Var(TyVar),
    Arrow(Box<Ty>, Box<Ty>),
    Constr(Path, Vec<Ty>),
    Tuple(Vec<Ty>),
}

impl Ty {
    pub fn arrow(a: Ty, b: Ty) -> Ty {
        Ty::Arrow(Box::new(a), Box::new(b))
    }

    pub fn constr0(p: Path) -> Ty {
        Ty::Constr(p, Vec::new())
    }

    pub fn paths<'a>(&'a self, out: &mut Vec<&'a Path>) {
        match self {
            Ty::Var(_) => {}
            Ty::Arrow(a, b) => {
                a.paths(out);
                b.paths(out);
            }
            Ty::Constr(p, args) => {
                out.push(p);
                args.iter().for_each(|a| a.paths(out));
            }
            Ty::Tuple(ts) => ts.iter().for_each(|t| t.paths(out)),
        }
    }

    /// Syntactic occurrence of a path rooted in `set` (no expansion).
    pub fn mentions(&self, set: &HashSet<Ident>) -> bool {
        let mut ps = Vec::new();
        self.paths(&mut ps);
        ps.iter().any(|p| p.mentions(set))
    }

    pub fn vars(&self, out: &mut Vec<TyVar>) {
        match self {
            Ty::Var(v) => {
                if !out.contains(v) {
                    out.push(*v)
                }
            }
            Ty::Arrow(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Ty::Constr(_, args) | Ty::Tuple(args) => args.iter().for_each(|a| a.vars(out)),
        }
    }

    /// Replaces variables according to `f`; variables mapped to `None` stay.
    pub fn map_vars(&self, f: &dyn Fn(TyVar) -> Option<Ty>) -> Ty {
        match self {
            Ty::Var(v) => f(*v).unwrap_or(Ty::Var(*v)),
            Ty::Arrow(a, b) => Ty::arrow(a.map_vars(f), b.map_vars(f)),
            Ty::Constr(p, args) => Ty::Constr(p.clone(), args.iter().map(|a| a.map_vars(f)).collect()),
            Ty::Tuple(ts) => Ty::Tuple(ts.iter().map(|t| t.map_vars(f)).collect()),
        }
    }

    /// Replaces the listed parameters by the given arguments.
    pub fn instantiate_params(&self, params: &[TyVar], args: &[Ty]) -> Ty {
        self.map_vars(&|v| params.iter().position(|p| *p == v).map(|i| args[i].clone()))
    }
}

/// A polymorphic type: `vars` are quantified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scheme {
    pub vars: Vec<TyVar>,
    pub body: Ty,
}

impl Scheme {
    pub fn mono(body: Ty) -> Scheme {
        Scheme {
            vars: Vec::new(),
            body,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtorSig {
    pub name: String,
    pub args: Vec<Ty>,
}

/// Type declaration. Abstract when both `manifest` and `variant` are absent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecl {
    pub params: Vec<TyVar>,
    pub manifest: Option<Ty>,
    pub variant: Option<Vec<CtorSig>>,
}

impl TypeDecl {
    pub fn abstract_(params: Vec<TyVar>) -> TypeDecl {
        TypeDecl {
            params,
            manifest: None,
            variant: None,
        }
    }

    pub fn alias(params: Vec<TyVar>, ty: Ty) -> TypeDecl {
        TypeDecl {
            params,
            manifest: Some(ty),
            variant: None,
        }
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn is_abstract(&self) -> bool {
        self.manifest.is_none() && self.variant.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SigItem {
    Val(Ident, Scheme),
    Type(Ident, TypeDecl),
    Module(Ident, ModType),
    ModType(Ident, Option<ModType>),
    Exn(Ident, Vec<Ty>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ItemKind {
    Value,
    Type,
    Module,
    ModType,
    Exception,
}

impl ItemKind {
    pub fn word(self) -> &'static str {
        match self {
            ItemKind::Value => "value",
            ItemKind::Type => "type",
            ItemKind::Module => "module",
            ItemKind::ModType => "module type",
            ItemKind::Exception => "exception",
        }
    }

    /// Namespace key; exceptions live with constructors, not with values.
    pub fn namespace(self) -> u8 {
        match self {
            ItemKind::Value => 0,
            ItemKind::Type => 1,
            ItemKind::Module => 2,
            ItemKind::ModType => 3,
            ItemKind::Exception => 4,
        }
    }
}

impl SigItem {
    pub fn ident(&self) -> &Ident {
        match self {
            SigItem::Val(id, _)
            | SigItem::Type(id, _)
            | SigItem::Module(id, _)
            | SigItem::ModType(id, _)
            | SigItem::Exn(id, _) => id,
        }
    }

    pub fn name(&self) -> &str {
        &self.ident().name
    }

    pub fn kind(&self) -> ItemKind {
        match self {
            SigItem::Val(..) => ItemKind::Value,
            SigItem::Type(..) => ItemKind::Type,
            SigItem::Module(..) => ItemKind::Module,
            SigItem::ModType(..) => ItemKind::ModType,
            SigItem::Exn(..) => ItemKind::Exception,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModType {
    Sig(Vec<SigItem>),
    Functor(Ident, Box<ModType>, Box<ModType>),
    Named(Path),
}

impl ModType {
    pub fn empty() -> ModType {
        ModType::Sig(Vec::new())
    }
}

/// Index of the last item of `kind` named `name`, if any.
pub fn find_last(items: &[SigItem], kind: ItemKind, name: &str) -> Option<usize> {
    items
        .iter()
        .rposition(|it| it.kind() == kind && it.name() == name)
}

/// True when no later item of the same namespace reuses the name of `items[i]`.
pub fn is_last_of_name(items: &[SigItem], i: usize) -> bool {
    let it = &items[i];
    !items[i + 1..]
        .iter()
        .any(|o| o.kind() == it.kind() && o.name() == it.name())
}

/// Collects every path occurring anywhere in a module type, including the
/// binding idents of items (as `Path::Ident`).
pub fn scan_paths_modtype(m: &ModType, out: &mut Vec<Path>) {
    match m {
        ModType::Sig(items) => items.iter().for_each(|it| scan_paths_item(it, out)),
        ModType::Functor(x, p, r) => {
            out.push(Path::Ident(x.clone()));
            scan_paths_modtype(p, out);
            scan_paths_modtype(r, out);
        }
        ModType::Named(p) => out.push(p.clone()),
    }
}

pub fn scan_paths_item(it: &SigItem, out: &mut Vec<Path>) {
    out.push(Path::Ident(it.ident().clone()));
    let mut tys: Vec<&Ty> = Vec::new();
    match it {
        SigItem::Val(_, s) => tys.push(&s.body),
        SigItem::Type(_, d) => {
            if let Some(m) = &d.manifest {
                tys.push(m);
            }
            for c in d.variant.iter().flatten() {
                tys.extend(c.args.iter());
            }
        }
        SigItem::Module(_, m) | SigItem::ModType(_, Some(m)) => scan_paths_modtype(m, out),
        SigItem::ModType(_, None) => {}
        SigItem::Exn(_, args) => tys.extend(args.iter()),
    }
    for t in tys {
        let mut ps = Vec::new();
        t.paths(&mut ps);
        out.extend(ps.into_iter().cloned());
    }
}

/// Does any path in the module type mention an ident of `set`?
pub fn modtype_mentions(m: &ModType, set: &HashSet<Ident>) -> bool {
    let mut ps = Vec::new();
    scan_paths_modtype(m, &mut ps);
    ps.iter().any(|p| p.mentions(set))
}

/// Does any item name look like an elaboration-generated (hidden) name?
pub fn has_hidden_names(m: &ModType) -> bool {
    let mut ps = Vec::new();
    scan_paths_modtype(m, &mut ps);
    ps.iter().any(|p| {
        let mut ids = Vec::new();
        p.idents(&mut ids);
        ids.iter().any(Ident::is_hidden)
    })
}
