use std::rc::Rc;

use crate::semobj::*;

/// Names of the builtin exceptions raised by the runtime itself.
pub const ASSERT_FAILURE: &str = "Assert_failure";
pub const MATCH_FAILURE: &str = "Match_failure";
pub const FAILURE: &str = "Failure";

fn prim_type(sess: &mut Session, name: &str, arity: usize) -> (Ident, Vec<TyVar>) {
    let id = sess.fresh_ident(name);
    let params: Vec<TyVar> = (0..arity).map(|_| sess.fresh_param()).collect();
    sess.define_type(&id, TypeDecl::abstract_(params.clone()));
    (id, params)
}

/// The initial environment: base types, `option`, `result`, references,
/// arithmetic and printing. Created once per session, so every program
/// checked in a session sees the same builtin idents.
pub fn initial_env(sess: &mut Session) -> Env {
    if let Some(env) = &sess.initial_env {
        return env.clone();
    }
    let env = build_initial_env(sess);
    sess.initial_env = Some(env.clone());
    env
}

fn build_initial_env(sess: &mut Session) -> Env {
    let mut items = Vec::new();
    let mut base = |sess: &mut Session, name: &str| {
        let (id, _) = prim_type(sess, name, 0);
        items.push(SigItem::Type(id.clone(), TypeDecl::abstract_(vec![])));
        Ty::constr0(Path::Ident(id))
    };
    let int = base(sess, "int");
    let string = base(sess, "string");
    let bool_ = base(sess, "bool");
    let unit = base(sess, "unit");
    let exn = base(sess, "exn");

    let (ref_id, ref_params) = prim_type(sess, "ref", 1);
    items.push(SigItem::Type(ref_id.clone(), TypeDecl::abstract_(ref_params)));
    let ref_of = |t: Ty| Ty::Constr(Path::Ident(ref_id.clone()), vec![t]);

    let option = sess.fresh_ident("option");
    let a = sess.fresh_param();
    let option_decl = TypeDecl {
        params: vec![a],
        manifest: None,
        variant: Some(vec![
            CtorSig {
                name: "None".into(),
                args: vec![],
            },
            CtorSig {
                name: "Some".into(),
                args: vec![Ty::Var(a)],
            },
        ]),
    };
    sess.define_type(&option, option_decl.clone());
    items.push(SigItem::Type(option, option_decl));

    let result = sess.fresh_ident("result");
    let (a, b) = (sess.fresh_param(), sess.fresh_param());
    let result_decl = TypeDecl {
        params: vec![a, b],
        manifest: None,
        variant: Some(vec![
            CtorSig {
                name: "Ok".into(),
                args: vec![Ty::Var(a)],
            },
            CtorSig {
                name: "Error".into(),
                args: vec![Ty::Var(b)],
            },
        ]),
    };
    sess.define_type(&result, result_decl.clone());
    items.push(SigItem::Type(result, result_decl));

    for (name, args) in [
        (ASSERT_FAILURE, vec![]),
        (MATCH_FAILURE, vec![]),
        (FAILURE, vec![string.clone()]),
    ] {
        let id = sess.fresh_ident(name);
        items.push(SigItem::Exn(id, args));
    }

    let prims = Rc::new(Prims {
        int: int.clone(),
        string: string.clone(),
        bool: bool_.clone(),
        unit: unit.clone(),
        exn,
    });
    let mut env = Env::new(prims);
    env.add_items(&items, &Subst::new());

    let arrow2 = |a: &Ty, b: &Ty, c: &Ty| Ty::arrow(a.clone(), Ty::arrow(b.clone(), c.clone()));
    let mono = |t: Ty| Scheme::mono(t);
    env.bind_value("+", mono(arrow2(&int, &int, &int)));
    env.bind_value("-", mono(arrow2(&int, &int, &int)));
    env.bind_value("*", mono(arrow2(&int, &int, &int)));
    env.bind_value("<", mono(arrow2(&int, &int, &bool_)));
    env.bind_value("not", mono(Ty::arrow(bool_.clone(), bool_.clone())));
    env.bind_value("print", mono(Ty::arrow(string.clone(), unit.clone())));
    env.bind_value("string_of_int", mono(Ty::arrow(int.clone(), string.clone())));
    env.bind_value("incr", mono(Ty::arrow(ref_of(int.clone()), unit.clone())));
    env.bind_value("decr", mono(Ty::arrow(ref_of(int.clone()), unit.clone())));

    let poly = |sess: &mut Session, build: &dyn Fn(Ty) -> Ty| {
        let v = sess.fresh_param();
        Scheme {
            vars: vec![v],
            body: build(Ty::Var(v)),
        }
    };
    let eq = poly(sess, &|a| arrow2(&a, &a, &bool_));
    env.bind_value("=", eq);
    let mk_ref = poly(sess, &|a| Ty::arrow(a.clone(), ref_of(a)));
    env.bind_value("ref", mk_ref);
    let deref = poly(sess, &|a| Ty::arrow(ref_of(a.clone()), a));
    env.bind_value("!", deref);
    let assign = poly(sess, &|a| arrow2(&ref_of(a.clone()), &a, &unit));
    env.bind_value(":=", assign);
    env
}
