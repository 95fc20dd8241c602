use std::collections::HashSet;

use super::structure::{type_exception, type_typedefs};
use super::{elimination_error, freshen_items, freshen_modtype, open_module_expr, opened_items, sem};
use crate::core_typing::error::{TypeError, TypeErrorKind};
use crate::core_typing::typexpr::{translate_type, TyVarScope, VarPolicy};
use crate::nondep::{hidden_set, nondep_items, nondep_signature, HiddenOrigin};
use crate::semobj::*;
use crate::syntax::{
    FunctorParam, ModTypeExpr, ModTypeKind, SourceSpan, SpecItem, SpecItemKind, WithConstraint, WithMode,
};

pub fn type_modtype_expr(sess: &mut Session, env: &Env, mte: &ModTypeExpr) -> Result<ModType, TypeError> {
    let span = &mte.span;
    match &mte.kind {
        ModTypeKind::Path(li) => Ok(ModType::Named(env.lookup_modtype(sess, li).map_err(sem(span))?)),
        ModTypeKind::Sig(specs) => Ok(ModType::Sig(type_signature(sess, env, specs)?)),
        ModTypeKind::Functor(param, res) => {
            let pm = type_modtype_expr(sess, env, &param.mty)?;
            let x = sess.fresh_ident(&param.name);
            sess.set_span(&x, param.mty.span.clone());
            sess.define_module(&x, pm.clone());
            let mut env2 = env.clone();
            env2.bind_module(&param.name, Path::Ident(x.clone()));
            let rm = type_modtype_expr(sess, &env2, res)?;
            Ok(ModType::Functor(x, Box::new(pm), Box::new(rm)))
        }
        ModTypeKind::With(base, c) => {
            let b = type_modtype_expr(sess, env, base)?;
            let items = match sess.expand_modtype(&b).map_err(sem(span))? {
                ModType::Sig(items) => items,
                _ => return Err(TypeError::new(TypeErrorKind::UnboundTypeInWith(c.name.clone()), span)),
            };
            let items = apply_with(sess, env, items, c, span)?;
            Ok(freshen_modtype(sess, &ModType::Sig(items)))
        }
    }
}

fn apply_with(
    sess: &mut Session,
    env: &Env,
    mut items: Vec<SigItem>,
    c: &WithConstraint,
    span: &SourceSpan,
) -> Result<Vec<SigItem>, TypeError> {
    let Some(i) = find_last(&items, ItemKind::Type, &c.name) else {
        return Err(TypeError::new(TypeErrorKind::UnboundTypeInWith(c.name.clone()), span));
    };
    let SigItem::Type(id, decl) = items[i].clone() else { unreachable!() };
    if decl.arity() != c.params.len() {
        return Err(TypeError::new(
            TypeErrorKind::TypeArity {
                name: c.name.clone(),
                expected: decl.arity(),
                found: c.params.len(),
            },
            span,
        ));
    }
    let mut scope = TyVarScope::with_params(VarPolicy::Closed, &c.params, &decl.params);
    let ty = translate_type(sess, env, &c.ty, &mut scope)?;
    match c.mode {
        WithMode::Equal => {
            if !decl.is_abstract() {
                return Err(TypeError::new(TypeErrorKind::WithOnNonAbstract(c.name.clone()), span));
            }
            items[i] = SigItem::Type(id, TypeDecl::alias(decl.params.clone(), ty));
            Ok(items)
        }
        WithMode::Substitute => {
            let mut sub = Subst::new();
            sub.types.insert(id, (decl.params.clone(), ty));
            items.remove(i);
            Ok(sub.items(&items))
        }
    }
}

pub fn type_signature(sess: &mut Session, env: &Env, specs: &[SpecItem]) -> Result<Vec<SigItem>, TypeError> {
    type_specs(sess, env.clone(), specs)
}

fn functor_type(params: &[FunctorParam], mty: &ModTypeExpr) -> ModTypeExpr {
    params.iter().rev().fold(mty.clone(), |acc, p| {
        let span = p.mty.span.to(&acc.span);
        ModTypeExpr {
            kind: ModTypeKind::Functor(Box::new(p.clone()), Box::new(acc)),
            span,
        }
    })
}

fn type_specs(sess: &mut Session, mut env: Env, specs: &[SpecItem]) -> Result<Vec<SigItem>, TypeError> {
    let mut sig = Vec::new();
    for (i, s) in specs.iter().enumerate() {
        let span = &s.span;
        match &s.kind {
            SpecItemKind::Val { name, ty } => {
                let mut scope = TyVarScope::new(VarPolicy::Declare);
                let body = translate_type(sess, &env, ty, &mut scope)?;
                let scheme = Scheme {
                    vars: scope.ids(),
                    body,
                };
                let id = sess.fresh_ident(name);
                sess.set_span(&id, span.clone());
                env.bind_value(name, scheme.clone());
                sig.push(SigItem::Val(id, scheme));
            }
            SpecItemKind::Type { nonrec, defs } => sig.extend(type_typedefs(sess, &mut env, *nonrec, defs)?),
            SpecItemKind::TypeSubst { params, name, ty } => {
                let ps: Vec<TyVar> = params.iter().map(|_| sess.fresh_param()).collect();
                let mut scope = TyVarScope::with_params(VarPolicy::Closed, params, &ps);
                let t = translate_type(sess, &env, ty, &mut scope)?;
                let id = sess.fresh_ident(name);
                sess.set_span(&id, span.clone());
                sess.define_type(&id, TypeDecl::alias(ps, t));
                env.bind_type(name, Path::Ident(id.clone()));
                let rest = type_specs(sess, env, &specs[i + 1..])?;
                let hidden: HashSet<Ident> = [id.clone()].into_iter().collect();
                let rest = nondep_items(sess, &hidden, &rest)
                    .map_err(|v| elimination_error(&id, v, HiddenOrigin::Open, span))?;
                sig.extend(rest);
                return Ok(sig);
            }
            SpecItemKind::Module { name, params, mty } => {
                let m = type_modtype_expr(sess, &env, &functor_type(params, mty))?;
                let id = sess.fresh_ident(name);
                sess.set_span(&id, span.clone());
                sess.define_module(&id, m.clone());
                env.bind_module(name, Path::Ident(id.clone()));
                sig.push(SigItem::Module(id, m));
            }
            SpecItemKind::ModType { name, mty } => {
                let m = match mty {
                    Some(m) => Some(type_modtype_expr(sess, &env, m)?),
                    None => None,
                };
                let id = sess.fresh_ident(name);
                sess.set_span(&id, span.clone());
                sess.define_modtype(&id, m.clone());
                env.bind_modtype(name, Path::Ident(id.clone()));
                sig.push(SigItem::ModType(id, m));
            }
            SpecItemKind::Exception { name, arg } => {
                sig.push(type_exception(sess, &mut env, name, arg.as_ref(), span)?);
            }
            SpecItemKind::Open(m) => {
                // Never evaluated, so the elaborated form is discarded.
                let mut m = m.clone();
                let mut opened = env.clone();
                match open_module_expr(sess, &env, &mut opened, &mut m)? {
                    None => env = opened,
                    Some(h) => {
                        let rest = type_specs(sess, opened, &specs[i + 1..])?;
                        let hidden_type = sess.module_type_of_path(&Path::Ident(h.clone())).map_err(sem(span))?;
                        sig.extend(nondep_signature(sess, &h, &hidden_type, &rest, HiddenOrigin::Open, span)?);
                        return Ok(sig);
                    }
                }
            }
            SpecItemKind::Include(mte) => {
                let m = type_modtype_expr(sess, &env, mte)?;
                let items = opened_items(sess, &m, span)?;
                let items = freshen_items(sess, &items);
                env.add_items(&items, &Subst::new());
                sig.extend(items);
            }
            SpecItemKind::Local(d1, d2) => {
                let local = type_specs(sess, env.clone(), d1)?;
                let mut inner = env.clone();
                inner.add_items(&local, &Subst::new());
                let exported = type_specs(sess, inner, d2)?;
                let hidden_mod = ModType::Sig(local.clone());
                let anchor = local.first().map(|it| it.ident().clone());
                let exported = match anchor {
                    None => exported,
                    Some(anchor) => {
                        let hidden = hidden_set(&anchor, &hidden_mod);
                        nondep_items(sess, &hidden, &exported)
                            .map_err(|v| elimination_error(&anchor, v, HiddenOrigin::Open, span))?
                    }
                };
                env.add_items(&exported, &Subst::new());
                sig.extend(exported);
            }
        }
    }
    Ok(sig)
}
