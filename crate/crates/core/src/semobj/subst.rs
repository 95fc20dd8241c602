use std::collections::HashMap;

use super::ident::Ident;
use super::types::*;

/// Simultaneous substitution of path roots and of type constructors.
#[derive(Clone, Debug, Default)]
pub struct Subst {
    pub paths: HashMap<Ident, Path>,
    /// Destructive type substitutions: `t` becomes `ty` with `params` bound to the arguments.
    pub types: HashMap<Ident, (Vec<TyVar>, Ty)>,
}

impl Subst {
    pub fn new() -> Subst {
        Subst::default()
    }

    pub fn single(from: &Ident, to: Path) -> Subst {
        let mut s = Subst::new();
        s.paths.insert(from.clone(), to);
        s
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty() && self.types.is_empty()
    }

    pub fn add_path(&mut self, from: &Ident, to: Path) {
        self.paths.insert(from.clone(), to);
    }

    pub fn path(&self, p: &Path) -> Path {
        match p {
            Path::Ident(id) => self.paths.get(id).cloned().unwrap_or_else(|| p.clone()),
            Path::Dot(q, n) => Path::Dot(Box::new(self.path(q)), n.clone()),
            Path::Apply(f, a) => Path::Apply(Box::new(self.path(f)), Box::new(self.path(a))),
        }
    }

    pub fn ty(&self, t: &Ty) -> Ty {
        match t {
            Ty::Var(_) => t.clone(),
            Ty::Arrow(a, b) => Ty::arrow(self.ty(a), self.ty(b)),
            Ty::Tuple(ts) => Ty::Tuple(ts.iter().map(|t| self.ty(t)).collect()),
            Ty::Constr(p, args) => {
                let args: Vec<Ty> = args.iter().map(|a| self.ty(a)).collect();
                if let Path::Ident(id) = p {
                    if let Some((params, body)) = self.types.get(id) {
                        return body.instantiate_params(params, &args);
                    }
                }
                Ty::Constr(self.path(p), args)
            }
        }
    }

    pub fn scheme(&self, s: &Scheme) -> Scheme {
        Scheme {
            vars: s.vars.clone(),
            body: self.ty(&s.body),
        }
    }

    pub fn decl(&self, d: &TypeDecl) -> TypeDecl {
        TypeDecl {
            params: d.params.clone(),
            manifest: d.manifest.as_ref().map(|m| self.ty(m)),
            variant: d.variant.as_ref().map(|cs| {
                cs.iter()
                    .map(|c| CtorSig {
                        name: c.name.clone(),
                        args: c.args.iter().map(|a| self.ty(a)).collect(),
                    })
                    .collect()
            }),
        }
    }

    pub fn item(&self, it: &SigItem) -> SigItem {
        match it {
            SigItem::Val(id, s) => SigItem::Val(id.clone(), self.scheme(s)),
            SigItem::Type(id, d) => SigItem::Type(id.clone(), self.decl(d)),
            SigItem::Module(id, m) => SigItem::Module(id.clone(), self.modtype(m)),
            SigItem::ModType(id, m) => SigItem::ModType(id.clone(), m.as_ref().map(|m| self.modtype(m))),
            SigItem::Exn(id, args) => SigItem::Exn(id.clone(), args.iter().map(|a| self.ty(a)).collect()),
        }
    }

    pub fn items(&self, items: &[SigItem]) -> Vec<SigItem> {
        items.iter().map(|it| self.item(it)).collect()
    }

    pub fn modtype(&self, m: &ModType) -> ModType {
        if self.is_empty() {
            return m.clone();
        }
        match m {
            ModType::Sig(items) => ModType::Sig(self.items(items)),
            ModType::Functor(x, p, r) => {
                ModType::Functor(x.clone(), Box::new(self.modtype(p)), Box::new(self.modtype(r)))
            }
            ModType::Named(p) => ModType::Named(self.path(p)),
        }
    }
}

/// Rebases every path rooted at `from` onto `to`.
pub fn subst_module(m: &ModType, from: &Ident, to: &Path) -> ModType {
    Subst::single(from, to.clone()).modtype(m)
}

/// Substitution giving the items of a signature accessed through `prefix`
/// their external names. Shadowed items keep their raw idents since no
/// path reaches them.
pub fn prefix_subst(prefix: &Path, items: &[SigItem]) -> Subst {
    let mut s = Subst::new();
    for (i, it) in items.iter().enumerate() {
        if is_last_of_name(items, i) {
            s.add_path(it.ident(), prefix.clone().dot(it.name()));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semobj::ident::Stamper;

    #[test]
    fn functor_result_rebased_on_argument() {
        let mut st = Stamper::default();
        let x = st.fresh("X");
        let u = st.fresh("u");
        let v = st.fresh("v");
        let ch = st.fresh("Char");
        let xt = Ty::constr0(Path::Ident(x.clone()).dot("t"));
        let sig = ModType::Sig(vec![
            SigItem::Type(u.clone(), TypeDecl::alias(vec![], xt)),
            SigItem::Type(v.clone(), TypeDecl::alias(vec![], Ty::constr0(Path::Ident(u.clone())))),
        ]);
        let out = subst_module(&sig, &x, &Path::Ident(ch.clone()));
        let ModType::Sig(items) = &out else { panic!() };
        let SigItem::Type(_, du) = &items[0] else { panic!() };
        assert_eq!(du.manifest, Some(Ty::constr0(Path::Ident(ch).dot("t"))));
        let SigItem::Type(_, dv) = &items[1] else { panic!() };
        assert_eq!(dv.manifest, Some(Ty::constr0(Path::Ident(u))));
        let mut ps = Vec::new();
        scan_paths_modtype(&out, &mut ps);
        assert!(ps.iter().all(|p| p.head() != &x));
    }

    #[test]
    fn untouched_when_absent() {
        let mut st = Stamper::default();
        let x = st.fresh("X");
        let a = st.fresh("A");
        let t = st.fresh("t");
        let sig = ModType::Sig(vec![SigItem::Type(t, TypeDecl::abstract_(vec![]))]);
        assert_eq!(subst_module(&sig, &x, &Path::Ident(a)), sig);
    }
}
