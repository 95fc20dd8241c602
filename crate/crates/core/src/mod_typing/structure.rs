use std::collections::HashSet;

use super::{included_items, open_module_expr, sem, type_modtype_expr, type_module_expr};
use crate::core_typing::builtins::initial_env;
use crate::core_typing::error::{TypeError, TypeErrorKind};
use crate::core_typing::infer::{infer_bindings, infer_expr};
use crate::core_typing::typexpr::{translate_type, TyVarScope, VarPolicy};
use crate::desugar::{local_as_include, private_as_open};
use crate::nondep::{nondep_signature, HiddenOrigin};
use crate::semobj::*;
use crate::syntax::{
    FunctorParam, ModExpr, ModExprKind, ModPath, Program, SourceSpan, StructItem, StructItemKind, TypeDef,
    TypeExpr, TypeExprKind, TypeRepr,
};

/// A checked program: the elaborated items and the exported signature.
#[derive(Clone, Debug)]
pub struct TypedProgram {
    pub elaborated: Program,
    pub signature: Vec<SigItem>,
}

pub fn check_program(sess: &mut Session, program: &Program) -> Result<TypedProgram, TypeError> {
    let env = initial_env(sess);
    let mut items = program.items.clone();
    let signature = type_structure(sess, &env, &mut items)?;
    debug_assert!(!has_hidden_names(&ModType::Sig(signature.clone())));
    Ok(TypedProgram {
        elaborated: Program { items },
        signature,
    })
}

/// Types `items` in order, rewriting them in place into their elaborated
/// form, and returns the exported signature.
pub fn type_structure(sess: &mut Session, env: &Env, items: &mut Vec<StructItem>) -> Result<Vec<SigItem>, TypeError> {
    type_items_from(sess, env.clone(), items, 0)
}

fn hidden_bind(name: &str, body: ModExpr, span: &SourceSpan) -> StructItem {
    StructItem {
        kind: StructItemKind::Module {
            name: name.to_string(),
            params: Vec::new(),
            body,
        },
        span: span.clone(),
    }
}

fn path_expr(name: &str, span: &SourceSpan) -> ModExpr {
    ModExpr {
        kind: ModExprKind::Path(ModPath::Name(name.to_string())),
        span: span.clone(),
    }
}

fn type_items_from(
    sess: &mut Session,
    mut env: Env,
    items: &mut Vec<StructItem>,
    start: usize,
) -> Result<Vec<SigItem>, TypeError> {
    let mut sig = Vec::new();
    let mut i = start;
    while i < items.len() {
        let span = items[i].span.clone();
        match &mut items[i].kind {
            StructItemKind::Local(..) | StructItemKind::Private(_) => {
                let item = std::mem::replace(&mut items[i].kind, StructItemKind::Local(Vec::new(), Vec::new()));
                items[i] = match item {
                    StructItemKind::Local(d1, d2) => local_as_include(d1, d2, &span),
                    StructItemKind::Private(it) => private_as_open(*it, &span),
                    _ => unreachable!(),
                };
                continue;
            }
            StructItemKind::Open(m) if !matches!(m.kind, ModExprKind::Path(_)) => {
                let mut opened = env.clone();
                let h = open_module_expr(sess, &env, &mut opened, m)?.expect("non-path open binds a module");
                let body = std::mem::replace(m, path_expr(&h.name, &span));
                opened.bind_module(&h.name, Path::Ident(h.clone()));
                items.insert(i, hidden_bind(&h.name, body, &span));
                let rest = type_items_from(sess, opened, items, i + 2)?;
                let hidden_type = sess.module_type_of_path(&Path::Ident(h.clone())).map_err(sem(&span))?;
                sig.extend(nondep_signature(sess, &h, &hidden_type, &rest, HiddenOrigin::Open, &span)?);
                return Ok(sig);
            }
            StructItemKind::Open(m) => {
                let mut opened = env.clone();
                open_module_expr(sess, &env, &mut opened, m)?;
                env = opened;
            }
            StructItemKind::Include(m) if !matches!(m.kind, ModExprKind::Path(_)) => {
                let mty = type_module_expr(sess, &env, m)?;
                let h = sess.fresh_hidden("M");
                sess.set_span(&h, span.clone());
                sess.define_module(&h, mty.clone());
                let body = std::mem::replace(m, path_expr(&h.name, &span));
                items.insert(i, hidden_bind(&h.name, body, &span));
                let included = included_items(sess, &Path::Ident(h.clone()), &span)?;
                env.bind_module(&h.name, Path::Ident(h.clone()));
                env.add_items(&included, &Subst::new());
                let mut exported = included;
                exported.extend(type_items_from(sess, env, items, i + 2)?);
                sig.extend(nondep_signature(sess, &h, &mty, &exported, HiddenOrigin::Open, &span)?);
                return Ok(sig);
            }
            StructItemKind::Include(m) => {
                let ModExprKind::Path(mp) = &m.kind else { unreachable!() };
                let p = env.lookup_module(sess, mp).map_err(sem(&span))?;
                let included = included_items(sess, &p, &span)?;
                env.add_items(&included, &Subst::new());
                sig.extend(included);
            }
            StructItemKind::Let { rec_flag, bindings } => {
                for (name, scheme, vspan) in infer_bindings(sess, &env, *rec_flag, bindings)? {
                    let id = sess.fresh_ident(&name);
                    sess.set_span(&id, vspan);
                    env.bind_value(&name, scheme.clone());
                    sig.push(SigItem::Val(id, scheme));
                }
            }
            StructItemKind::Type { nonrec, defs } => {
                sig.extend(type_typedefs(sess, &mut env, *nonrec, defs)?);
            }
            StructItemKind::Module { name, params, body } => {
                if !params.is_empty() {
                    let inner = std::mem::replace(body, path_expr(name, &span));
                    *body = wrap_functor(std::mem::take(params), inner);
                }
                let mty = type_module_expr(sess, &env, body)?;
                let id = sess.fresh_ident(name);
                sess.set_span(&id, span.clone());
                sess.define_module(&id, mty.clone());
                env.bind_module(name, Path::Ident(id.clone()));
                sig.push(SigItem::Module(id, mty));
            }
            StructItemKind::ModType { name, mty } => {
                let m = type_modtype_expr(sess, &env, mty)?;
                let id = sess.fresh_ident(name);
                sess.set_span(&id, span.clone());
                sess.define_modtype(&id, Some(m.clone()));
                env.bind_modtype(name, Path::Ident(id.clone()));
                sig.push(SigItem::ModType(id, Some(m)));
            }
            StructItemKind::Exception { name, arg } => {
                let item = type_exception(sess, &mut env, name, arg.as_ref(), &span)?;
                sig.push(item);
            }
            StructItemKind::Expr(e) => {
                infer_expr(sess, &env, e)?;
            }
        }
        i += 1;
    }
    Ok(sig)
}

/// `module M (X : S) (Y : T) = m` as nested functors.
pub(crate) fn wrap_functor(params: Vec<FunctorParam>, body: ModExpr) -> ModExpr {
    params.into_iter().rev().fold(body, |acc, p| {
        let span = p.mty.span.to(&acc.span);
        ModExpr {
            kind: ModExprKind::Functor(Box::new(p), Box::new(acc)),
            span,
        }
    })
}

fn exception_args(sess: &mut Session, env: &Env, arg: Option<&TypeExpr>) -> Result<Vec<Ty>, TypeError> {
    let Some(te) = arg else { return Ok(Vec::new()) };
    let parts: Vec<&TypeExpr> = match &te.kind {
        TypeExprKind::Tuple(ts) => ts.iter().collect(),
        _ => vec![te],
    };
    let mut scope = TyVarScope::new(VarPolicy::Closed);
    parts.into_iter().map(|t| translate_type(sess, env, t, &mut scope)).collect()
}

pub(crate) fn type_exception(
    sess: &mut Session,
    env: &mut Env,
    name: &str,
    arg: Option<&TypeExpr>,
    span: &SourceSpan,
) -> Result<SigItem, TypeError> {
    let args = exception_args(sess, env, arg)?;
    let id = sess.fresh_ident(name);
    sess.set_span(&id, span.clone());
    let item = SigItem::Exn(id, args);
    env.add_items(std::slice::from_ref(&item), &Subst::new());
    Ok(item)
}

/// A `type ... and ...` group. Unless `nonrec`, the names are in scope in
/// every right-hand side.
pub(crate) fn type_typedefs(
    sess: &mut Session,
    env: &mut Env,
    nonrec: bool,
    defs: &[TypeDef],
) -> Result<Vec<SigItem>, TypeError> {
    let ids: Vec<Ident> = defs.iter().map(|d| sess.fresh_ident(&d.name)).collect();
    let params: Vec<Vec<TyVar>> = defs
        .iter()
        .map(|d| d.params.iter().map(|_| sess.fresh_param()).collect())
        .collect();
    let mut rhs_env = env.clone();
    if !nonrec {
        for ((d, id), ps) in defs.iter().zip(&ids).zip(&params) {
            sess.define_type(id, TypeDecl::abstract_(ps.clone()));
            rhs_env.bind_type(&d.name, Path::Ident(id.clone()));
        }
    }
    let mut decls = Vec::with_capacity(defs.len());
    for (d, ps) in defs.iter().zip(&params) {
        let mut scope = TyVarScope::with_params(VarPolicy::Closed, &d.params, ps);
        let decl = match &d.repr {
            TypeRepr::Abstract => TypeDecl::abstract_(ps.clone()),
            TypeRepr::Manifest(te) => TypeDecl::alias(ps.clone(), translate_type(sess, &rhs_env, te, &mut scope)?),
            TypeRepr::Variant { manifest, ctors } => {
                let manifest = match manifest {
                    Some(te) => Some(translate_type(sess, &rhs_env, te, &mut scope)?),
                    None => None,
                };
                let mut cs = Vec::with_capacity(ctors.len());
                for c in ctors {
                    let args = c
                        .args
                        .iter()
                        .map(|t| translate_type(sess, &rhs_env, t, &mut scope))
                        .collect::<Result<_, _>>()?;
                    cs.push(CtorSig {
                        name: c.name.clone(),
                        args,
                    });
                }
                TypeDecl {
                    params: ps.clone(),
                    manifest,
                    variant: Some(cs),
                }
            }
        };
        decls.push(decl);
    }
    for ((d, id), decl) in defs.iter().zip(&ids).zip(&decls) {
        sess.define_type(id, decl.clone());
        sess.set_span(id, d.span.clone());
    }
    let group: HashSet<Ident> = ids.iter().cloned().collect();
    for ((d, id), decl) in defs.iter().zip(&ids).zip(&decls) {
        if let Some(m) = &decl.manifest {
            if reaches_cycle(sess, m, &group, &mut vec![id.clone()]) {
                return Err(TypeError::new(TypeErrorKind::CyclicAbbrev(d.name.clone()), &d.span));
            }
        }
    }
    let items: Vec<SigItem> = ids.into_iter().zip(decls).map(|(id, d)| SigItem::Type(id, d)).collect();
    env.add_items(&items, &Subst::new());
    Ok(items)
}

/// Whether expanding the abbreviations of `group` inside `t` leads back to
/// one of `visiting`.
fn reaches_cycle(sess: &Session, t: &Ty, group: &HashSet<Ident>, visiting: &mut Vec<Ident>) -> bool {
    match t {
        Ty::Var(_) => false,
        Ty::Arrow(a, b) => reaches_cycle(sess, a, group, visiting) || reaches_cycle(sess, b, group, visiting),
        Ty::Tuple(ts) => ts.iter().any(|t| reaches_cycle(sess, t, group, visiting)),
        Ty::Constr(p, args) => {
            if let Path::Ident(x) = p {
                if group.contains(x) {
                    if visiting.contains(x) {
                        return true;
                    }
                    if let Ok(TypeDecl {
                        manifest: Some(m),
                        variant: None,
                        ..
                    }) = sess.type_decl(p)
                    {
                        visiting.push(x.clone());
                        let found = reaches_cycle(sess, &m, group, visiting);
                        visiting.pop();
                        if found {
                            return true;
                        }
                    }
                }
            }
            args.iter().any(|a| reaches_cycle(sess, a, group, visiting))
        }
    }
}
