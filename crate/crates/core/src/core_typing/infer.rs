
use super::error::{TypeError, TypeErrorKind};
use super::typexpr::{translate_type, TyVarScope, VarPolicy};
use super::unify::{unify, UnifyFailure};
use crate::mod_typing::{open_module_expr, type_module_expr};
use crate::nondep::{eliminate_type, hidden_set};
use crate::printer::types::types_to_strings;
use crate::semobj::*;
use crate::syntax::{Binding, Case, Expr, ExprKind, Literal, Pattern, PatternKind, SourceSpan};

/// A variable bound by a pattern, with its type and the span of its occurrence.
pub type PatBinding = (String, Ty, SourceSpan);

pub fn unify_at(sess: &mut Session, found: &Ty, expected: &Ty, span: &SourceSpan) -> Result<(), TypeError> {
    unify(sess, found, expected).map_err(|f| {
        let names = types_to_strings(sess, &[found, expected]);
        let (found, expected) = (names[0].clone(), names[1].clone());
        let kind = match f {
            UnifyFailure::Clash => TypeErrorKind::Mismatch { found, expected },
            UnifyFailure::Occurs(v) => {
                let var = types_to_strings(sess, &[&Ty::Var(v)]).remove(0);
                TypeErrorKind::Occurs { found, expected, var }
            }
        };
        TypeError::new(kind, span)
    })
}

/// Quantifies the variables of `t` created at a deeper level than the current one.
pub fn generalize(sess: &mut Session, t: &Ty) -> Scheme {
    let body = sess.resolve(t);
    let mut all = Vec::new();
    body.vars(&mut all);
    let mut vars = Vec::new();
    for v in all {
        let info = sess.var(v);
        if !info.rigid && info.level > sess.level && info.level != GENERIC_LEVEL {
            sess.var_mut(v).level = GENERIC_LEVEL;
            vars.push(v);
        }
    }
    Scheme { vars, body }
}

fn literal_type(env: &Env, l: &Literal) -> Ty {
    let p = env.prims();
    match l {
        Literal::Int(_) => p.int.clone(),
        Literal::Str(_) => p.string.clone(),
        Literal::Bool(_) => p.bool.clone(),
        Literal::Unit => p.unit.clone(),
    }
}

/// Syntactic values: the only expressions whose types are generalized.
pub fn is_value(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Lit(_) | ExprKind::Var(_) | ExprKind::Fun(..) | ExprKind::Constr(_, None) => true,
        ExprKind::Constr(_, Some(a)) | ExprKind::Annot(a, _) => is_value(a),
        ExprKind::Tuple(es) => es.iter().all(is_value),
        _ => false,
    }
}

fn ctor_arity_error(name: &str, expected: usize, found: usize, span: &SourceSpan) -> TypeError {
    TypeError::new(
        TypeErrorKind::CtorArity {
            name: name.to_string(),
            expected,
            found,
        },
        span,
    )
}

fn instantiate_ctor(sess: &mut Session, desc: &CtorDesc) -> (Vec<Ty>, Ty) {
    let fresh: Vec<Ty> = desc.params.iter().map(|_| sess.fresh_var()).collect();
    let args = desc
        .args
        .iter()
        .map(|a| a.instantiate_params(&desc.params, &fresh))
        .collect();
    (args, desc.res.instantiate_params(&desc.params, &fresh))
}

pub fn type_pattern(
    sess: &mut Session,
    env: &Env,
    p: &Pattern,
    expected: &Ty,
    binds: &mut Vec<PatBinding>,
) -> Result<(), TypeError> {
    match &p.kind {
        PatternKind::Wildcard => Ok(()),
        PatternKind::Var(v) => {
            binds.push((v.clone(), expected.clone(), p.span.clone()));
            Ok(())
        }
        PatternKind::Lit(l) => unify_at(sess, &literal_type(env, l), expected, &p.span),
        PatternKind::Tuple(ps) => {
            let vs: Vec<Ty> = ps.iter().map(|_| sess.fresh_var()).collect();
            unify_at(sess, &Ty::Tuple(vs.clone()), expected, &p.span)?;
            for (q, v) in ps.iter().zip(&vs) {
                type_pattern(sess, env, q, v, binds)?;
            }
            Ok(())
        }
        PatternKind::Annot(q, te) => {
            let mut scope = TyVarScope::new(VarPolicy::Flexible);
            let t = translate_type(sess, env, te, &mut scope)?;
            unify_at(sess, &t, expected, &p.span)?;
            type_pattern(sess, env, q, &t, binds)
        }
        PatternKind::Constr(li, arg) => {
            let desc = env.lookup_ctor(sess, li).map_err(|e| TypeError::new(e, &p.span))?;
            let (args, res) = instantiate_ctor(sess, &desc);
            unify_at(sess, &res, expected, &p.span)?;
            match (arg, args.len()) {
                (None, 0) => Ok(()),
                (None, n) => Err(ctor_arity_error(&li.name, n, 0, &p.span)),
                (Some(_), 0) => Err(ctor_arity_error(&li.name, 0, 1, &p.span)),
                (Some(a), 1) => type_pattern(sess, env, a, &args[0], binds),
                (Some(a), n) => match &a.kind {
                    PatternKind::Wildcard => Ok(()),
                    PatternKind::Tuple(ps) if ps.len() == n => {
                        for (q, t) in ps.iter().zip(&args) {
                            type_pattern(sess, env, q, t, binds)?;
                        }
                        Ok(())
                    }
                    PatternKind::Tuple(ps) => Err(ctor_arity_error(&li.name, n, ps.len(), &p.span)),
                    _ => Err(ctor_arity_error(&li.name, n, 1, &p.span)),
                },
            }
        }
    }
}

fn bind_mono(env: &Env, binds: &[PatBinding]) -> Env {
    let mut env = env.clone();
    for (n, t, _) in binds {
        env.bind_value(n, Scheme::mono(t.clone()));
    }
    env
}

/// Types `fun params -> body`.
fn infer_fun(sess: &mut Session, env: &Env, params: &[Pattern], body: &mut Expr) -> Result<Ty, TypeError> {
    let Some((first, rest)) = params.split_first() else {
        return infer_expr(sess, env, body);
    };
    let a = sess.fresh_var();
    let mut binds = Vec::new();
    type_pattern(sess, env, first, &a, &mut binds)?;
    let env2 = bind_mono(env, &binds);
    let r = infer_fun(sess, &env2, rest, body)?;
    Ok(Ty::arrow(a, r))
}

/// Types a `let` group and returns the schemes of the bound names, in order.
pub fn infer_bindings(
    sess: &mut Session,
    env: &Env,
    rec_flag: bool,
    bindings: &mut [Binding],
) -> Result<Vec<(String, Scheme, SourceSpan)>, TypeError> {
    let mut out = Vec::new();
    if rec_flag {
        sess.level += 1;
        let mut env2 = env.clone();
        let mut slots = Vec::new();
        for b in bindings.iter() {
            let name = match &b.pat.kind {
                PatternKind::Var(n) => n.clone(),
                PatternKind::Annot(q, _) if matches!(q.kind, PatternKind::Var(_)) => {
                    q.bound_vars()[0].to_string()
                }
                _ => {
                    sess.level -= 1;
                    return Err(TypeError::new(TypeErrorKind::LetRecLhs, &b.pat.span));
                }
            };
            let v = sess.fresh_var();
            env2.bind_value(&name, Scheme::mono(v.clone()));
            slots.push((name, v));
        }
        let mut result = Ok(());
        for (b, (_, v)) in bindings.iter_mut().zip(&slots) {
            result = infer_fun(sess, &env2, &b.params, &mut b.body).and_then(|t| {
                let mut binds = Vec::new();
                type_pattern(sess, &env2, &b.pat, v, &mut binds)?;
                unify_at(sess, &t, v, &b.body.span)
            });
            if result.is_err() {
                break;
            }
        }
        sess.level -= 1;
        result?;
        for (b, (name, v)) in bindings.iter().zip(slots) {
            let s = if !b.params.is_empty() || is_value(&b.body) {
                generalize(sess, &v)
            } else {
                Scheme::mono(sess.resolve(&v))
            };
            out.push((name, s, b.pat.span.clone()));
        }
        return Ok(out);
    }
    for b in bindings.iter_mut() {
        sess.level += 1;
        let t = infer_fun(sess, env, &b.params, &mut b.body);
        sess.level -= 1;
        let t = t?;
        let generalizable = !b.params.is_empty() || is_value(&b.body);
        sess.level += 1;
        let mut binds = Vec::new();
        let r = type_pattern(sess, env, &b.pat, &t, &mut binds);
        sess.level -= 1;
        r?;
        for (name, ty, span) in binds {
            let s = if generalizable {
                generalize(sess, &ty)
            } else {
                Scheme::mono(sess.resolve(&ty))
            };
            out.push((name, s, span));
        }
    }
    Ok(out)
}

/// Rejects a type that mentions a module going out of scope, after trying
/// to expand the offending abbreviations away.
fn avoid(sess: &mut Session, hidden: &Ident, t: &Ty, span: &SourceSpan) -> Result<Ty, TypeError> {
    let set = match sess.module_type_of_path(&Path::Ident(hidden.clone())) {
        Ok(mty) => hidden_set(hidden, &mty),
        Err(_) => [hidden.clone()].into_iter().collect(),
    };
    let t = sess.resolve(t);
    eliminate_type(sess, &set, &t).map_err(|blocked| {
        TypeError::new(TypeErrorKind::Escape(escaping_name(sess, &blocked.0)), span)
    })
}

/// Paths through a hidden module have no source name; those print as the
/// stamped component.
fn escaping_name(sess: &Session, p: &Path) -> String {
    if let Path::Dot(q, name) = p {
        if q.head().is_hidden() {
            if let Ok(it) = sess.find_component(q, ItemKind::Type, name) {
                return it.ident().with_stamp();
            }
        }
    }
    p.to_string()
}

fn infer_cases(
    sess: &mut Session,
    env: &Env,
    cases: &mut [Case],
    scrutinee: Option<&Ty>,
    result: &Ty,
) -> Result<(), TypeError> {
    let exn = env.prims().exn.clone();
    for c in cases.iter_mut() {
        let mut binds = Vec::new();
        let expected = match scrutinee {
            Some(t) if !c.exception => t.clone(),
            _ => exn.clone(),
        };
        type_pattern(sess, env, &c.pat, &expected, &mut binds)?;
        let env2 = bind_mono(env, &binds);
        let tb = infer_expr(sess, &env2, &mut c.body)?;
        unify_at(sess, &tb, result, &c.body.span)?;
    }
    Ok(())
}

pub fn infer_expr(sess: &mut Session, env: &Env, e: &mut Expr) -> Result<Ty, TypeError> {
    let span = e.span.clone();
    match &mut e.kind {
        ExprKind::Lit(l) => Ok(literal_type(env, l)),
        ExprKind::Var(li) => {
            let s = env.lookup_value(sess, li).map_err(|err| TypeError::new(err, &span))?;
            Ok(sess.instantiate(&s))
        }
        ExprKind::Constr(li, arg) => {
            let desc = env.lookup_ctor(sess, li).map_err(|err| TypeError::new(err, &span))?;
            let (args, res) = instantiate_ctor(sess, &desc);
            match (arg, args.len()) {
                (None, 0) => {}
                (None, n) => return Err(ctor_arity_error(&li.name, n, 0, &span)),
                (Some(_), 0) => return Err(ctor_arity_error(&li.name, 0, 1, &span)),
                (Some(a), 1) => {
                    let ta = infer_expr(sess, env, a)?;
                    unify_at(sess, &ta, &args[0], &a.span)?;
                }
                (Some(a), n) => match &mut a.kind {
                    ExprKind::Tuple(es) if es.len() == n => {
                        for (x, t) in es.iter_mut().zip(&args) {
                            let tx = infer_expr(sess, env, x)?;
                            unify_at(sess, &tx, t, &x.span)?;
                        }
                    }
                    ExprKind::Tuple(es) => return Err(ctor_arity_error(&li.name, n, es.len(), &span)),
                    _ => return Err(ctor_arity_error(&li.name, n, 1, &span)),
                },
            }
            Ok(res)
        }
        ExprKind::Tuple(es) => {
            let mut ts = Vec::new();
            for x in es.iter_mut() {
                ts.push(infer_expr(sess, env, x)?);
            }
            Ok(Ty::Tuple(ts))
        }
        ExprKind::Fun(p, body) => infer_fun(sess, env, std::slice::from_ref(p), body),
        ExprKind::Apply(f, a) => {
            let tf = infer_expr(sess, env, f)?;
            let ta = infer_expr(sess, env, a)?;
            match sess.expand_fully(&tf) {
                Ty::Arrow(param, res) => {
                    unify_at(sess, &ta, &param, &a.span)?;
                    Ok(*res)
                }
                Ty::Var(v) if !sess.var(v).rigid => {
                    let r = sess.fresh_var();
                    unify_at(sess, &tf, &Ty::arrow(ta, r.clone()), &f.span)?;
                    Ok(r)
                }
                _ => {
                    let shown = types_to_strings(sess, &[&tf]).remove(0);
                    Err(TypeError::new(TypeErrorKind::NotAFunction(shown), &f.span))
                }
            }
        }
        ExprKind::LetIn {
            rec_flag,
            bindings,
            body,
        } => {
            let bound = infer_bindings(sess, env, *rec_flag, bindings)?;
            let mut env2 = env.clone();
            for (n, s, _) in bound {
                env2.bind_value(&n, s);
            }
            infer_expr(sess, &env2, body)
        }
        ExprKind::Match(scrut, cases) => {
            let ts = infer_expr(sess, env, scrut)?;
            let r = sess.fresh_var();
            infer_cases(sess, env, cases, Some(&ts), &r)?;
            Ok(r)
        }
        ExprKind::TryWith(body, cases) => {
            let tb = infer_expr(sess, env, body)?;
            infer_cases(sess, env, cases, None, &tb)?;
            Ok(tb)
        }
        ExprKind::Raise(x) => {
            let tx = infer_expr(sess, env, x)?;
            let exn = env.prims().exn.clone();
            unify_at(sess, &tx, &exn, &x.span)?;
            Ok(sess.fresh_var())
        }
        ExprKind::Assert(x) => {
            if matches!(x.kind, ExprKind::Lit(Literal::Bool(false))) {
                return Ok(sess.fresh_var());
            }
            let tx = infer_expr(sess, env, x)?;
            let b = env.prims().bool.clone();
            unify_at(sess, &tx, &b, &x.span)?;
            Ok(env.prims().unit.clone())
        }
        ExprKind::Sequence(a, b) => {
            infer_expr(sess, env, a)?;
            infer_expr(sess, env, b)
        }
        ExprKind::If(c, t, f) => {
            let tc = infer_expr(sess, env, c)?;
            let b = env.prims().bool.clone();
            unify_at(sess, &tc, &b, &c.span)?;
            let tt = infer_expr(sess, env, t)?;
            match f {
                Some(f) => {
                    let tf = infer_expr(sess, env, f)?;
                    unify_at(sess, &tf, &tt, &f.span)?;
                }
                None => {
                    let u = env.prims().unit.clone();
                    unify_at(sess, &tt, &u, &t.span)?;
                }
            }
            Ok(tt)
        }
        ExprKind::Annot(x, te) => {
            let tx = infer_expr(sess, env, x)?;
            let mut scope = TyVarScope::new(VarPolicy::Flexible);
            let t = translate_type(sess, env, te, &mut scope)?;
            unify_at(sess, &tx, &t, &x.span)?;
            Ok(t)
        }
        ExprKind::LetModuleIn(name, m, body) => {
            let mty = type_module_expr(sess, env, m)?;
            let id = sess.fresh_ident(name);
            sess.define_module(&id, mty);
            let mut env2 = env.clone();
            env2.bind_module(name, Path::Ident(id.clone()));
            let t = infer_expr(sess, &env2, body)?;
            avoid(sess, &id, &t, &span)
        }
        ExprKind::LetExceptionIn(name, arg, body) => {
            let args = match arg {
                Some(te) => {
                    let mut scope = TyVarScope::new(VarPolicy::Closed);
                    vec![translate_type(sess, env, te, &mut scope)?]
                }
                None => Vec::new(),
            };
            let id = sess.fresh_ident(name);
            let mut env2 = env.clone();
            env2.add_items(&[SigItem::Exn(id, args)], &Subst::new());
            infer_expr(sess, &env2, body)
        }
        ExprKind::LetOpenIn(m, body) => {
            let mut env2 = env.clone();
            let hidden = open_module_expr(sess, env, &mut env2, m)?;
            let t = infer_expr(sess, &env2, body)?;
            match hidden {
                Some(h) => avoid(sess, &h, &t, &span),
                None => Ok(t),
            }
        }
    }
}
