use std::collections::HashMap;

use thiserror::Error;

use super::ident::{Ident, Stamper};
use super::subst::{prefix_subst, subst_module};
use super::types::*;
use crate::syntax::SourceSpan;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SemError {
    #[error("Unbound {kind} {name}")]
    Unbound { kind: &'static str, name: String },
    #[error("The module {0} is a functor, it has no components")]
    NotAStructure(String),
    #[error("The module {0} is not a functor, it cannot be applied")]
    NotAFunctor(String),
}

#[derive(Clone, Debug)]
pub struct VarInfo {
    pub link: Option<Ty>,
    pub level: u32,
    /// Rigid variables are never bound by unification.
    pub rigid: bool,
}

pub const GENERIC_LEVEL: u32 = u32::MAX;

enum Undo {
    Type(Ident, Option<TypeDecl>),
    Module(Ident, Option<ModType>),
}

/// State shared by one compilation session: stamps, unification variables
/// and the descriptors of every ident created so far.
pub struct Session {
    pub stamps: Stamper,
    vars: Vec<VarInfo>,
    pub level: u32,
    type_decls: HashMap<Ident, TypeDecl>,
    module_types: HashMap<Ident, ModType>,
    modtype_decls: HashMap<Ident, Option<ModType>>,
    spans: HashMap<Ident, SourceSpan>,
    overlays: Vec<Vec<Undo>>,
    /// The builtin environment, created on first use.
    pub(crate) initial_env: Option<super::env::Env>,
}

impl Default for Session {
    fn default() -> Self {
        Session::new()
    }
}

const EXPANSION_FUEL: usize = 512;

impl Session {
    pub fn new() -> Session {
        Session {
            stamps: Stamper::default(),
            vars: Vec::new(),
            level: 1,
            type_decls: HashMap::new(),
            module_types: HashMap::new(),
            modtype_decls: HashMap::new(),
            spans: HashMap::new(),
            overlays: Vec::new(),
            initial_env: None,
        }
    }

    pub fn fresh_ident(&mut self, name: &str) -> Ident {
        self.stamps.fresh(name)
    }

    /// A module ident that cannot be written in source, e.g. `M#4`.
    pub fn fresh_hidden(&mut self, base: &str) -> Ident {
        self.stamps.fresh_hidden(base)
    }

    // ---------------------------------------------------------------
    // Type variables

    fn new_var(&mut self, level: u32, rigid: bool) -> TyVar {
        self.vars.push(VarInfo {
            link: None,
            level,
            rigid,
        });
        (self.vars.len() - 1) as TyVar
    }

    pub fn fresh_var(&mut self) -> Ty {
        Ty::Var(self.new_var(self.level, false))
    }

    pub fn fresh_rigid(&mut self) -> Ty {
        Ty::Var(self.new_var(self.level, true))
    }

    /// A rigid variable for type declaration parameters and scheme binders.
    pub fn fresh_param(&mut self) -> TyVar {
        self.new_var(GENERIC_LEVEL, true)
    }

    pub fn var(&self, v: TyVar) -> &VarInfo {
        &self.vars[v as usize]
    }

    pub fn var_mut(&mut self, v: TyVar) -> &mut VarInfo {
        &mut self.vars[v as usize]
    }

    /// Follows variable links at the head only.
    pub fn head(&self, t: &Ty) -> Ty {
        let mut t = t.clone();
        while let Ty::Var(v) = t {
            match &self.vars[v as usize].link {
                Some(next) => t = next.clone(),
                None => return t,
            }
        }
        t
    }

    /// Removes every variable link.
    pub fn resolve(&self, t: &Ty) -> Ty {
        match self.head(t) {
            Ty::Var(v) => Ty::Var(v),
            Ty::Arrow(a, b) => Ty::arrow(self.resolve(&a), self.resolve(&b)),
            Ty::Constr(p, args) => Ty::Constr(p, args.iter().map(|a| self.resolve(a)).collect()),
            Ty::Tuple(ts) => Ty::Tuple(ts.iter().map(|t| self.resolve(t)).collect()),
        }
    }

    pub fn resolve_scheme(&self, s: &Scheme) -> Scheme {
        Scheme {
            vars: s.vars.clone(),
            body: self.resolve(&s.body),
        }
    }

    /// Fresh flexible instance of a scheme.
    pub fn instantiate(&mut self, s: &Scheme) -> Ty {
        if s.vars.is_empty() {
            return s.body.clone();
        }
        let fresh: Vec<Ty> = s.vars.iter().map(|_| self.fresh_var()).collect();
        self.resolve(&s.body).instantiate_params(&s.vars, &fresh)
    }

    /// Instance of a scheme whose binders are rigid (skolems).
    pub fn skolemize(&mut self, s: &Scheme) -> Ty {
        let fresh: Vec<Ty> = s.vars.iter().map(|_| self.fresh_rigid()).collect();
        self.resolve(&s.body).instantiate_params(&s.vars, &fresh)
    }

    // ---------------------------------------------------------------
    // Ident descriptors

    pub fn define_type(&mut self, id: &Ident, decl: TypeDecl) {
        let old = self.type_decls.insert(id.clone(), decl);
        if let Some(j) = self.overlays.last_mut() {
            j.push(Undo::Type(id.clone(), old));
        }
    }

    pub fn define_module(&mut self, id: &Ident, mty: ModType) {
        let old = self.module_types.insert(id.clone(), mty);
        if let Some(j) = self.overlays.last_mut() {
            j.push(Undo::Module(id.clone(), old));
        }
    }

    pub fn define_modtype(&mut self, id: &Ident, mty: Option<ModType>) {
        self.modtype_decls.insert(id.clone(), mty);
    }

    pub fn set_span(&mut self, id: &Ident, span: SourceSpan) {
        self.spans.insert(id.clone(), span);
    }

    pub fn span_of(&self, id: &Ident) -> Option<&SourceSpan> {
        self.spans.get(id)
    }

    /// Starts a scope in which `define_type`/`define_module` are undone by
    /// `end_overlay`.
    pub fn begin_overlay(&mut self) {
        self.overlays.push(Vec::new());
    }

    pub fn end_overlay(&mut self) {
        let Some(j) = self.overlays.pop() else { return };
        for u in j.into_iter().rev() {
            match u {
                Undo::Type(id, Some(d)) => {
                    self.type_decls.insert(id, d);
                }
                Undo::Type(id, None) => {
                    self.type_decls.remove(&id);
                }
                Undo::Module(id, Some(m)) => {
                    self.module_types.insert(id, m);
                }
                Undo::Module(id, None) => {
                    self.module_types.remove(&id);
                }
            }
        }
    }

    /// Records the descriptors of every item of a signature, recursively.
    /// With `overwrite` false, existing descriptors win.
    pub fn register_items(&mut self, items: &[SigItem], overwrite: bool) {
        for it in items {
            match it {
                SigItem::Type(id, d) => {
                    if overwrite || !self.type_decls.contains_key(id) {
                        self.define_type(id, d.clone());
                    }
                }
                SigItem::Module(id, m) => {
                    if overwrite || !self.module_types.contains_key(id) {
                        self.define_module(id, m.clone());
                    }
                    self.register_modtype(m, overwrite);
                }
                SigItem::ModType(id, m) => {
                    if overwrite || !self.modtype_decls.contains_key(id) {
                        self.define_modtype(id, m.clone());
                    }
                    if let Some(m) = m {
                        self.register_modtype(m, overwrite);
                    }
                }
                SigItem::Val(..) | SigItem::Exn(..) => {}
            }
        }
    }

    pub fn register_modtype(&mut self, m: &ModType, overwrite: bool) {
        match m {
            ModType::Sig(items) => self.register_items(items, overwrite),
            ModType::Functor(x, p, r) => {
                if overwrite || !self.module_types.contains_key(x) {
                    self.define_module(x, (**p).clone());
                }
                self.register_modtype(p, overwrite);
                self.register_modtype(r, overwrite);
            }
            ModType::Named(_) => {}
        }
    }

    // ---------------------------------------------------------------
    // Path resolution

    /// The (unstrengthened) module type of a module path.
    pub fn module_type_of_path(&self, p: &Path) -> Result<ModType, SemError> {
        match p {
            Path::Ident(id) => self.module_types.get(id).cloned().ok_or_else(|| SemError::Unbound {
                kind: "module",
                name: id.name.clone(),
            }),
            Path::Dot(q, name) => match self.find_component(q, ItemKind::Module, name)? {
                SigItem::Module(_, m) => Ok(m),
                _ => unreachable!(),
            },
            Path::Apply(f, a) => match self.expand_modtype(&self.module_type_of_path(f)?)? {
                ModType::Functor(x, _, r) => Ok(subst_module(&r, &x, a)),
                _ => Err(SemError::NotAFunctor(f.to_string())),
            },
        }
    }

    pub fn modtype_decl_of_path(&self, p: &Path) -> Result<Option<ModType>, SemError> {
        match p {
            Path::Ident(id) => self.modtype_decls.get(id).cloned().ok_or_else(|| SemError::Unbound {
                kind: "module type",
                name: id.name.clone(),
            }),
            Path::Dot(q, name) => match self.find_component(q, ItemKind::ModType, name)? {
                SigItem::ModType(_, m) => Ok(m),
                _ => unreachable!(),
            },
            Path::Apply(..) => Err(SemError::Unbound {
                kind: "module type",
                name: p.to_string(),
            }),
        }
    }

    /// Expands named module types until a signature, a functor or an
    /// abstract module type is reached.
    pub fn expand_modtype(&self, m: &ModType) -> Result<ModType, SemError> {
        let mut m = m.clone();
        for _ in 0..EXPANSION_FUEL {
            match &m {
                ModType::Named(p) => match self.modtype_decl_of_path(p)? {
                    Some(next) => m = next,
                    None => return Ok(m),
                },
                _ => return Ok(m),
            }
        }
        Ok(m)
    }

    pub fn sig_of_path(&self, p: &Path) -> Result<Vec<SigItem>, SemError> {
        match self.expand_modtype(&self.module_type_of_path(p)?)? {
            ModType::Sig(items) => Ok(items),
            _ => Err(SemError::NotAStructure(p.to_string())),
        }
    }

    /// Component `name` of module `p`, with sibling references rewritten to
    /// paths through `p`.
    pub fn find_component(&self, p: &Path, kind: ItemKind, name: &str) -> Result<SigItem, SemError> {
        let items = self.sig_of_path(p)?;
        match find_last(&items, kind, name) {
            Some(i) => Ok(prefix_subst(p, &items).item(&items[i])),
            None => Err(SemError::Unbound {
                kind: kind_noun(kind),
                name: format!("{p}.{name}"),
            }),
        }
    }

    pub fn type_decl(&self, p: &Path) -> Result<TypeDecl, SemError> {
        match p {
            Path::Ident(id) => self.type_decls.get(id).cloned().ok_or_else(|| SemError::Unbound {
                kind: "type constructor",
                name: id.name.clone(),
            }),
            Path::Dot(q, name) => match self.find_component(q, ItemKind::Type, name)? {
                SigItem::Type(_, d) => Ok(d),
                _ => unreachable!(),
            },
            Path::Apply(..) => Err(SemError::Unbound {
                kind: "type constructor",
                name: p.to_string(),
            }),
        }
    }

    // ---------------------------------------------------------------
    // Type equality

    /// One step of manifest expansion at the head of `t`.
    pub fn expand_head(&self, t: &Ty) -> Option<Ty> {
        match self.head(t) {
            Ty::Constr(p, args) => {
                let d = self.type_decl(&p).ok()?;
                let m = d.manifest?;
                if d.params.len() != args.len() {
                    return None;
                }
                Some(m.instantiate_params(&d.params, &args))
            }
            _ => None,
        }
    }

    /// Expands manifests at the head until none applies.
    pub fn expand_fully(&self, t: &Ty) -> Ty {
        let mut t = self.head(t);
        for _ in 0..EXPANSION_FUEL {
            match self.expand_head(&t) {
                Some(next) => t = self.head(&next),
                None => break,
            }
        }
        t
    }

    /// Equality modulo manifest expansion. Variables are compared by identity.
    pub fn types_equal(&self, a: &Ty, b: &Ty) -> bool {
        self.types_equal_fuel(a, b, EXPANSION_FUEL)
    }

    fn types_equal_fuel(&self, a: &Ty, b: &Ty, fuel: usize) -> bool {
        if fuel == 0 {
            return false;
        }
        let a = self.head(a);
        let b = self.head(b);
        match (&a, &b) {
            (Ty::Var(v), Ty::Var(w)) if v == w => return true,
            (Ty::Constr(p, xs), Ty::Constr(q, ys))
                if p == q
                    && xs.len() == ys.len()
                    && xs.iter().zip(ys).all(|(x, y)| self.types_equal_fuel(x, y, fuel - 1)) =>
            {
                return true
            }
            _ => {}
        }
        if let Some(a2) = self.expand_head(&a) {
            return self.types_equal_fuel(&a2, &b, fuel - 1);
        }
        if let Some(b2) = self.expand_head(&b) {
            return self.types_equal_fuel(&a, &b2, fuel - 1);
        }
        match (&a, &b) {
            (Ty::Arrow(a1, a2), Ty::Arrow(b1, b2)) => {
                self.types_equal_fuel(a1, b1, fuel - 1) && self.types_equal_fuel(a2, b2, fuel - 1)
            }
            (Ty::Tuple(xs), Ty::Tuple(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.types_equal_fuel(x, y, fuel - 1))
            }
            _ => false,
        }
    }
}

pub fn kind_noun(kind: ItemKind) -> &'static str {
    match kind {
        ItemKind::Value => "value",
        ItemKind::Type => "type constructor",
        ItemKind::Module => "module",
        ItemKind::ModType => "module type",
        ItemKind::Exception => "exception",
    }
}
