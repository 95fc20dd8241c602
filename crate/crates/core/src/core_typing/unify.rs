use crate::semobj::{Session, Ty, TyVar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnifyFailure {
    Clash,
    Occurs(TyVar),
}

/// Makes `a` and `b` equal, expanding manifest types when heads differ.
pub fn unify(sess: &mut Session, a: &Ty, b: &Ty) -> Result<(), UnifyFailure> {
    let a = sess.head(a);
    let b = sess.head(b);
    match (&a, &b) {
        (Ty::Var(v), Ty::Var(w)) if v == w => Ok(()),
        (Ty::Var(v), _) if !sess.var(*v).rigid => bind(sess, *v, &b),
        (_, Ty::Var(w)) if !sess.var(*w).rigid => bind(sess, *w, &a),
        (Ty::Constr(p, xs), Ty::Constr(q, ys)) if p == q && xs.len() == ys.len() => {
            for (x, y) in xs.iter().zip(ys) {
                unify(sess, x, y)?;
            }
            Ok(())
        }
        _ => {
            if let Some(a2) = sess.expand_head(&a) {
                return unify(sess, &a2, &b);
            }
            if let Some(b2) = sess.expand_head(&b) {
                return unify(sess, &a, &b2);
            }
            match (&a, &b) {
                (Ty::Arrow(a1, a2), Ty::Arrow(b1, b2)) => {
                    unify(sess, a1, b1)?;
                    unify(sess, a2, b2)
                }
                (Ty::Tuple(xs), Ty::Tuple(ys)) if xs.len() == ys.len() => {
                    for (x, y) in xs.iter().zip(ys) {
                        unify(sess, x, y)?;
                    }
                    Ok(())
                }
                _ => Err(UnifyFailure::Clash),
            }
        }
    }
}

fn occurs(sess: &Session, v: TyVar, t: &Ty) -> bool {
    match sess.head(t) {
        Ty::Var(w) => v == w,
        Ty::Arrow(a, b) => occurs(sess, v, &a) || occurs(sess, v, &b),
        Ty::Constr(_, ts) | Ty::Tuple(ts) => ts.iter().any(|t| occurs(sess, v, t)),
    }
}

/// Expands every manifest inside `t`.
fn expand_deep(sess: &Session, t: &Ty) -> Ty {
    match sess.expand_fully(t) {
        Ty::Arrow(a, b) => Ty::arrow(expand_deep(sess, &a), expand_deep(sess, &b)),
        Ty::Constr(p, ts) => Ty::Constr(p, ts.iter().map(|t| expand_deep(sess, t)).collect()),
        Ty::Tuple(ts) => Ty::Tuple(ts.iter().map(|t| expand_deep(sess, t)).collect()),
        v => v,
    }
}

fn adjust_levels(sess: &mut Session, level: u32, t: &Ty) {
    match sess.head(t) {
        Ty::Var(w) => {
            let info = sess.var_mut(w);
            if info.level > level {
                info.level = level;
            }
        }
        Ty::Arrow(a, b) => {
            adjust_levels(sess, level, &a);
            adjust_levels(sess, level, &b);
        }
        Ty::Constr(_, ts) | Ty::Tuple(ts) => ts.iter().for_each(|t| adjust_levels(sess, level, t)),
    }
}

fn bind(sess: &mut Session, v: TyVar, t: &Ty) -> Result<(), UnifyFailure> {
    let mut t = t.clone();
    if occurs(sess, v, &t) {
        t = expand_deep(sess, &t);
        if occurs(sess, v, &t) {
            return Err(UnifyFailure::Occurs(v));
        }
    }
    let level = sess.var(v).level;
    adjust_levels(sess, level, &t);
    sess.var_mut(v).link = Some(t);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semobj::{Path, TypeDecl};

    fn base(sess: &mut Session, name: &str) -> Ty {
        let id = sess.fresh_ident(name);
        sess.define_type(&id, TypeDecl::abstract_(vec![]));
        Ty::constr0(Path::Ident(id))
    }

    #[test]
    fn identical_types() {
        let mut s = Session::new();
        let int = base(&mut s, "int");
        assert_eq!(unify(&mut s, &int, &int), Ok(()));
    }

    #[test]
    fn clash() {
        let mut s = Session::new();
        let int = base(&mut s, "int");
        let string = base(&mut s, "string");
        assert_eq!(unify(&mut s, &int, &string), Err(UnifyFailure::Clash));
    }

    #[test]
    fn through_manifest() {
        let mut s = Session::new();
        let outer = base(&mut s, "t");
        let alias = s.fresh_ident("t'");
        s.define_type(&alias, TypeDecl::alias(vec![], outer.clone()));
        assert_eq!(unify(&mut s, &Ty::constr0(Path::Ident(alias)), &outer), Ok(()));
    }

    #[test]
    fn occurs_check() {
        let mut s = Session::new();
        let a = s.fresh_var();
        let f = Ty::arrow(a.clone(), a.clone());
        assert!(matches!(unify(&mut s, &a, &f), Err(UnifyFailure::Occurs(_))));
    }

    #[test]
    fn congruence() {
        let mut s = Session::new();
        let int = base(&mut s, "int");
        let a = s.fresh_var();
        let b = s.fresh_var();
        let l = Ty::arrow(a.clone(), int.clone());
        let r = Ty::arrow(int.clone(), b.clone());
        unify(&mut s, &l, &r).unwrap();
        assert_eq!(s.resolve(&l), s.resolve(&r));
    }

    #[test]
    fn rigid_variables_do_not_bind() {
        let mut s = Session::new();
        let int = base(&mut s, "int");
        let r = s.fresh_rigid();
        assert_eq!(unify(&mut s, &r, &int), Err(UnifyFailure::Clash));
        let a = s.fresh_var();
        assert_eq!(unify(&mut s, &r, &a), Ok(()));
        assert_eq!(s.resolve(&a), r);
    }
}
