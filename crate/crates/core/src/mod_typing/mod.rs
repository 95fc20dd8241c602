//! Typing and elaboration of module expressions, structures and signatures.

mod signature;
mod structure;

pub use signature::{type_modtype_expr, type_signature};
pub use structure::{check_program, type_structure, TypedProgram};

use crate::core_typing::error::{TypeError, TypeErrorKind};
use crate::nondep::{hidden_set, nondep_modtype, nondep_signature, EliminationError, HiddenOrigin};
use crate::semobj::strengthen::strengthen_items;
use crate::semobj::*;
use crate::syntax::{ModExpr, ModExprKind};

/// Gives fresh idents to the top-level items of a signature and records
/// their descriptors.
pub(crate) fn freshen_items(sess: &mut Session, items: &[SigItem]) -> Vec<SigItem> {
    let mut sub = Subst::new();
    let mut renamed = Vec::with_capacity(items.len());
    for it in items {
        let old = it.ident();
        let new = sess.fresh_ident(&old.name);
        if let Some(span) = sess.span_of(old).cloned() {
            sess.set_span(&new, span);
        }
        sub.add_path(old, Path::Ident(new.clone()));
        renamed.push(new);
    }
    let out: Vec<SigItem> = items
        .iter()
        .zip(renamed)
        .map(|(it, id)| match sub.item(it) {
            SigItem::Val(_, s) => SigItem::Val(id, s),
            SigItem::Type(_, d) => SigItem::Type(id, d),
            SigItem::Module(_, m) => SigItem::Module(id, m),
            SigItem::ModType(_, m) => SigItem::ModType(id, m),
            SigItem::Exn(_, a) => SigItem::Exn(id, a),
        })
        .collect();
    sess.register_items(&out, true);
    out
}

pub(crate) fn freshen_modtype(sess: &mut Session, m: &ModType) -> ModType {
    match m {
        ModType::Sig(items) => ModType::Sig(freshen_items(sess, items)),
        _ => m.clone(),
    }
}

fn sem(span: &crate::syntax::SourceSpan) -> impl Fn(SemError) -> TypeError + '_ {
    move |e| TypeError::new(e, span)
}

fn elimination_error(
    hidden: &Ident,
    victims: Vec<crate::nondep::Victim>,
    origin: HiddenOrigin,
    span: &crate::syntax::SourceSpan,
) -> TypeError {
    EliminationError {
        hidden: hidden.clone(),
        origin,
        open_span: span.clone(),
        victims,
    }
    .into()
}

pub fn type_module_expr(sess: &mut Session, env: &Env, m: &mut ModExpr) -> Result<ModType, TypeError> {
    let span = m.span.clone();
    match &mut m.kind {
        ModExprKind::Path(mp) => {
            let p = env.lookup_module(sess, mp).map_err(sem(&span))?;
            let mty = sess.module_type_of_path(&p).map_err(sem(&span))?;
            Ok(strengthen(sess, &mty, &p))
        }
        ModExprKind::Struct(items) => Ok(ModType::Sig(type_structure(sess, env, items)?)),
        ModExprKind::Functor(param, body) => {
            let pm = type_modtype_expr(sess, env, &param.mty)?;
            let x = sess.fresh_ident(&param.name);
            sess.set_span(&x, param.mty.span.clone());
            sess.define_module(&x, pm.clone());
            let mut env2 = env.clone();
            env2.bind_module(&param.name, Path::Ident(x.clone()));
            let res = type_module_expr(sess, &env2, body)?;
            Ok(ModType::Functor(x, Box::new(pm), Box::new(res)))
        }
        ModExprKind::Apply(f, a) => {
            let tf = type_module_expr(sess, env, f)?;
            let (x, pm, rm) = match sess.expand_modtype(&tf).map_err(sem(&f.span))? {
                ModType::Functor(x, pm, rm) => (x, pm, rm),
                _ => return Err(TypeError::new(TypeErrorKind::NotAFunctor, &f.span)),
            };
            let arg_span = a.span.clone();
            let ta = type_module_expr(sess, env, a)?;
            if let ModExprKind::Path(mp) = &a.kind {
                let pa = env.lookup_module(sess, mp).map_err(sem(&arg_span))?;
                match_modtype(sess, &ta, &pm).map_err(|e| TypeError::new(e, &arg_span))?;
                let res = subst_module(&rm, &x, &pa);
                return Ok(freshen_modtype(sess, &res));
            }
            let h = sess.fresh_hidden("M");
            sess.set_span(&h, arg_span.clone());
            sess.define_module(&h, ta.clone());
            let hp = Path::Ident(h.clone());
            let ta_str = strengthen(sess, &ta, &hp);
            match_modtype(sess, &ta_str, &pm).map_err(|e| TypeError::new(e, &arg_span))?;
            let res = freshen_modtype(sess, &subst_module(&rm, &x, &hp));
            let res = sess.expand_modtype(&res).map_err(sem(&span))?;
            match &res {
                ModType::Sig(items) => {
                    let items = nondep_signature(sess, &h, &ta, items, HiddenOrigin::FunctorArgument, &arg_span)?;
                    Ok(ModType::Sig(items))
                }
                _ => {
                    let set = hidden_set(&h, &ta);
                    nondep_modtype(sess, &set, &res)
                        .map_err(|v| elimination_error(&h, v, HiddenOrigin::FunctorArgument, &arg_span))
                }
            }
        }
        ModExprKind::Ascribe(inner, mte) => {
            let tm = type_module_expr(sess, env, inner)?;
            let ts = type_modtype_expr(sess, env, mte)?;
            match_modtype(sess, &tm, &ts).map_err(|e| TypeError::new(e, &span))?;
            Ok(ts)
        }
    }
}

/// Makes the components of `m` visible in `env_out`. A non-path `m` is bound
/// to a fresh hidden ident, which is returned.
pub fn open_module_expr(
    sess: &mut Session,
    env: &Env,
    env_out: &mut Env,
    m: &mut ModExpr,
) -> Result<Option<Ident>, TypeError> {
    let span = m.span.clone();
    if let ModExprKind::Path(mp) = &m.kind {
        let p = env.lookup_module(sess, mp).map_err(sem(&span))?;
        let items = opened_items(sess, &sess.module_type_of_path(&p).map_err(sem(&span))?, &span)?;
        env_out.open_items(&p, &items);
        return Ok(None);
    }
    let mty = type_module_expr(sess, env, m)?;
    let items = opened_items(sess, &mty, &span)?;
    let h = sess.fresh_hidden("M");
    sess.set_span(&h, span);
    sess.define_module(&h, ModType::Sig(items.clone()));
    env_out.open_items(&Path::Ident(h.clone()), &items);
    Ok(Some(h))
}

fn opened_items(sess: &Session, mty: &ModType, span: &crate::syntax::SourceSpan) -> Result<Vec<SigItem>, TypeError> {
    match sess.expand_modtype(mty).map_err(sem(span))? {
        ModType::Sig(items) => Ok(items),
        _ => Err(TypeError::new(TypeErrorKind::CannotOpenFunctor, span)),
    }
}

/// Components re-exported by `include` of the module at `p`.
fn included_items(sess: &mut Session, p: &Path, span: &crate::syntax::SourceSpan) -> Result<Vec<SigItem>, TypeError> {
    let mty = sess.module_type_of_path(p).map_err(sem(span))?;
    let items = opened_items(sess, &mty, span)?;
    let strengthened = strengthen_items(sess, &items, p);
    Ok(freshen_items(sess, &strengthened))
}
