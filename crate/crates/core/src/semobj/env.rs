use std::collections::HashMap;
use std::rc::Rc;

use super::session::{SemError, Session};
use super::subst::{prefix_subst, Subst};
use super::types::*;
use crate::syntax::{LongIdent, ModPath};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CtorKind {
    Variant,
    Exception,
}

/// What a constructor name denotes: `args -> res`, generic in `params`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtorDesc {
    pub name: String,
    pub params: Vec<TyVar>,
    pub args: Vec<Ty>,
    pub res: Ty,
    pub kind: CtorKind,
}

/// Types the core language needs to name directly.
#[derive(Clone, Debug)]
pub struct Prims {
    pub int: Ty,
    pub string: Ty,
    pub bool: Ty,
    pub unit: Ty,
    pub exn: Ty,
}

/// Name-to-meaning maps for each namespace. Descriptors of the idents live
/// in the `Session`.
#[derive(Clone, Debug)]
pub struct Env {
    values: HashMap<String, Scheme>,
    types: HashMap<String, Path>,
    modules: HashMap<String, Path>,
    modtypes: HashMap<String, Path>,
    ctors: HashMap<String, CtorDesc>,
    prims: Rc<Prims>,
}

impl Env {
    pub fn new(prims: Rc<Prims>) -> Env {
        Env {
            values: HashMap::new(),
            types: HashMap::new(),
            modules: HashMap::new(),
            modtypes: HashMap::new(),
            ctors: HashMap::new(),
            prims,
        }
    }

    pub fn prims(&self) -> &Prims {
        &self.prims
    }

    pub fn bind_value(&mut self, name: &str, s: Scheme) {
        self.values.insert(name.to_string(), s);
    }

    pub fn bind_type(&mut self, name: &str, p: Path) {
        self.types.insert(name.to_string(), p);
    }

    pub fn bind_module(&mut self, name: &str, p: Path) {
        self.modules.insert(name.to_string(), p);
    }

    pub fn bind_modtype(&mut self, name: &str, p: Path) {
        self.modtypes.insert(name.to_string(), p);
    }

    pub fn bind_ctor(&mut self, desc: CtorDesc) {
        self.ctors.insert(desc.name.clone(), desc);
    }

    pub fn value_names(&self) -> impl Iterator<Item = (&String, &Scheme)> {
        self.values.iter()
    }

    pub fn module_names(&self) -> impl Iterator<Item = &String> {
        self.modules.keys()
    }

    /// Binds the names of `items`, whose idents are mapped to their paths by `sub`.
    pub fn add_items(&mut self, items: &[SigItem], sub: &Subst) {
        for it in items {
            let path = sub.path(&Path::Ident(it.ident().clone()));
            match it {
                SigItem::Val(id, s) => self.bind_value(&id.name, sub.scheme(s)),
                SigItem::Type(id, d) => {
                    for c in d.variant.iter().flatten() {
                        self.bind_ctor(CtorDesc {
                            name: c.name.clone(),
                            params: d.params.clone(),
                            args: c.args.iter().map(|a| sub.ty(a)).collect(),
                            res: Ty::Constr(path.clone(), d.params.iter().map(|v| Ty::Var(*v)).collect()),
                            kind: CtorKind::Variant,
                        });
                    }
                    self.bind_type(&id.name, path);
                }
                SigItem::Module(id, _) => self.bind_module(&id.name, path),
                SigItem::ModType(id, _) => self.bind_modtype(&id.name, path),
                SigItem::Exn(id, args) => {
                    let res = self.prims.exn.clone();
                    self.bind_ctor(CtorDesc {
                        name: id.name.clone(),
                        params: Vec::new(),
                        args: args.iter().map(|a| sub.ty(a)).collect(),
                        res,
                        kind: CtorKind::Exception,
                    });
                }
            }
        }
    }

    /// Makes the components of the module at `p` (with signature `items`)
    /// available by their names.
    pub fn open_items(&mut self, p: &Path, items: &[SigItem]) {
        let sub = prefix_subst(p, items);
        self.add_items(items, &sub);
    }

    // ---------------------------------------------------------------
    // Surface lookups

    pub fn lookup_module(&self, sess: &Session, mp: &ModPath) -> Result<Path, SemError> {
        match mp {
            ModPath::Name(n) => self.modules.get(n).cloned().ok_or_else(|| SemError::Unbound {
                kind: "module",
                name: n.clone(),
            }),
            ModPath::Dot(q, n) => {
                let p = self.lookup_module(sess, q)?;
                sess.find_component(&p, ItemKind::Module, n)?;
                Ok(p.dot(n.clone()))
            }
            ModPath::Apply(f, a) => {
                let pf = self.lookup_module(sess, f)?;
                let pa = self.lookup_module(sess, a)?;
                let p = Path::Apply(Box::new(pf), Box::new(pa));
                sess.module_type_of_path(&p)?;
                Ok(p)
            }
        }
    }

    pub fn lookup_type(&self, sess: &Session, li: &LongIdent) -> Result<(Path, TypeDecl), SemError> {
        let p = match &li.module {
            None => self.types.get(&li.name).cloned().ok_or_else(|| SemError::Unbound {
                kind: "type constructor",
                name: li.name.clone(),
            })?,
            Some(mp) => self.lookup_module(sess, mp)?.dot(li.name.clone()),
        };
        let d = sess.type_decl(&p)?;
        Ok((p, d))
    }

    pub fn lookup_value(&self, sess: &Session, li: &LongIdent) -> Result<Scheme, SemError> {
        match &li.module {
            None => self.values.get(&li.name).cloned().ok_or_else(|| SemError::Unbound {
                kind: "value",
                name: li.name.clone(),
            }),
            Some(mp) => {
                let p = self.lookup_module(sess, mp)?;
                match sess.find_component(&p, ItemKind::Value, &li.name)? {
                    SigItem::Val(_, s) => Ok(s),
                    _ => unreachable!(),
                }
            }
        }
    }

    pub fn lookup_modtype(&self, sess: &Session, li: &LongIdent) -> Result<Path, SemError> {
        match &li.module {
            None => self.modtypes.get(&li.name).cloned().ok_or_else(|| SemError::Unbound {
                kind: "module type",
                name: li.name.clone(),
            }),
            Some(mp) => {
                let p = self.lookup_module(sess, mp)?;
                sess.find_component(&p, ItemKind::ModType, &li.name)?;
                Ok(p.dot(li.name.clone()))
            }
        }
    }

    pub fn lookup_ctor(&self, sess: &Session, li: &LongIdent) -> Result<CtorDesc, SemError> {
        let unbound = || SemError::Unbound {
            kind: "constructor",
            name: li.name.clone(),
        };
        let Some(mp) = &li.module else {
            return self.ctors.get(&li.name).cloned().ok_or_else(unbound);
        };
        let p = self.lookup_module(sess, mp)?;
        let items = sess.sig_of_path(&p)?;
        let pos = items.iter().rposition(|it| match it {
            SigItem::Type(_, d) => d.variant.iter().flatten().any(|c| c.name == li.name),
            SigItem::Exn(id, _) => id.name == li.name,
            _ => false,
        });
        let i = pos.ok_or_else(unbound)?;
        let mut local = Env::new(self.prims.clone());
        local.add_items(&items[i..=i], &prefix_subst(&p, &items));
        local.ctors.get(&li.name).cloned().ok_or_else(unbound)
    }
}
