use super::session::Session;
use super::types::*;

/// Gives every nameable abstract or variant type of `mty` an equation to
/// its path through `at`. Functors are left alone.
pub fn strengthen(sess: &Session, mty: &ModType, at: &Path) -> ModType {
    let mty = sess.expand_modtype(mty).unwrap_or_else(|_| mty.clone());
    match mty {
        ModType::Sig(items) => ModType::Sig(strengthen_items(sess, &items, at)),
        other => other,
    }
}

pub fn strengthen_items(sess: &Session, items: &[SigItem], at: &Path) -> Vec<SigItem> {
    items
        .iter()
        .enumerate()
        .map(|(i, it)| {
            if !is_last_of_name(items, i) {
                return it.clone();
            }
            match it {
                SigItem::Type(id, d) if d.manifest.is_none() => {
                    let mut d = d.clone();
                    let args = d.params.iter().map(|v| Ty::Var(*v)).collect();
                    d.manifest = Some(Ty::Constr(at.clone().dot(id.name.clone()), args));
                    SigItem::Type(id.clone(), d)
                }
                SigItem::Module(id, m) => {
                    SigItem::Module(id.clone(), strengthen(sess, m, &at.clone().dot(id.name.clone())))
                }
                _ => it.clone(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abstract_type_gets_equation() {
        let mut s = Session::new();
        let a = s.fresh_ident("A");
        let t = s.fresh_ident("t");
        let sig = ModType::Sig(vec![SigItem::Type(t.clone(), TypeDecl::abstract_(vec![]))]);
        let pa = Path::Ident(a);
        let out = strengthen(&s, &sig, &pa);
        let expect = ModType::Sig(vec![SigItem::Type(
            t,
            TypeDecl::alias(vec![], Ty::constr0(pa.clone().dot("t"))),
        )]);
        assert_eq!(out, expect);
        assert_eq!(strengthen(&s, &out, &pa), out);
    }

    #[test]
    fn values_unchanged() {
        let mut s = Session::new();
        let a = s.fresh_ident("A");
        let x = s.fresh_ident("x");
        let int = s.fresh_ident("int");
        let sig = ModType::Sig(vec![SigItem::Val(x, Scheme::mono(Ty::constr0(Path::Ident(int))))]);
        assert_eq!(strengthen(&s, &sig, &Path::Ident(a)), sig);
    }
}
