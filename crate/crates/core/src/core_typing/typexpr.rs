use super::error::{TypeError, TypeErrorKind};
use crate::semobj::{Env, Session, Ty, TyVar};
use crate::syntax::{TypeExpr, TypeExprKind};

/// What to do with a type variable the scope has not seen yet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarPolicy {
    /// A fresh unification variable (annotations in expressions).
    Flexible,
    /// A fresh quantified parameter (value specifications).
    Declare,
    /// An error (type declarations).
    Closed,
}

pub struct TyVarScope {
    pub policy: VarPolicy,
    pub vars: Vec<(String, TyVar)>,
}

impl TyVarScope {
    pub fn new(policy: VarPolicy) -> TyVarScope {
        TyVarScope {
            policy,
            vars: Vec::new(),
        }
    }

    pub fn with_params(policy: VarPolicy, names: &[String], ids: &[TyVar]) -> TyVarScope {
        TyVarScope {
            policy,
            vars: names.iter().cloned().zip(ids.iter().copied()).collect(),
        }
    }

    /// Variables introduced so far, in order.
    pub fn ids(&self) -> Vec<TyVar> {
        self.vars.iter().map(|(_, v)| *v).collect()
    }
}

pub fn translate_type(
    sess: &mut Session,
    env: &Env,
    te: &TypeExpr,
    scope: &mut TyVarScope,
) -> Result<Ty, TypeError> {
    match &te.kind {
        TypeExprKind::Var(name) => {
            if let Some((_, v)) = scope.vars.iter().find(|(n, _)| n == name) {
                return Ok(Ty::Var(*v));
            }
            let v = match scope.policy {
                VarPolicy::Flexible => match sess.fresh_var() {
                    Ty::Var(v) => v,
                    _ => unreachable!(),
                },
                VarPolicy::Declare => sess.fresh_param(),
                VarPolicy::Closed => {
                    return Err(TypeError::new(TypeErrorKind::UnboundTypeVar(name.clone()), &te.span))
                }
            };
            scope.vars.push((name.clone(), v));
            Ok(Ty::Var(v))
        }
        TypeExprKind::Arrow(a, b) => Ok(Ty::arrow(
            translate_type(sess, env, a, scope)?,
            translate_type(sess, env, b, scope)?,
        )),
        TypeExprKind::Tuple(ts) => Ok(Ty::Tuple(
            ts.iter()
                .map(|t| translate_type(sess, env, t, scope))
                .collect::<Result<_, _>>()?,
        )),
        TypeExprKind::Constr(li, args) => {
            let (path, decl) = env
                .lookup_type(sess, li)
                .map_err(|e| TypeError::new(e, &te.span))?;
            if decl.arity() != args.len() {
                return Err(TypeError::new(
                    TypeErrorKind::TypeArity {
                        name: path.to_string(),
                        expected: decl.arity(),
                        found: args.len(),
                    },
                    &te.span,
                ));
            }
            let args = args
                .iter()
                .map(|t| translate_type(sess, env, t, scope))
                .collect::<Result<_, _>>()?;
            Ok(Ty::Constr(path, args))
        }
    }
}
