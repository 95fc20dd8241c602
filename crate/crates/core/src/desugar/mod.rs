//! Source-to-source translations between `local`, `private` and `open` of
//! arbitrary module expressions, plus a source printer.

mod source;

pub use source::{mod_expr as print_mod_expr, print_items, print_source};

use std::collections::BTreeSet;

use crate::syntax::*;

/// `local d1 in d2 end` as `include struct open struct d1 end d2 end`.
///
/// Names that `d1` brings into scope with `open` must reach `d2`, so those
/// opens become `include`s; the outer `open` keeps them unexported.
pub fn local_as_include(d1: Vec<StructItem>, d2: Vec<StructItem>, span: &SourceSpan) -> StructItem {
    let d1 = d1
        .into_iter()
        .map(|it| match it.kind {
            StructItemKind::Open(m) => StructItem {
                kind: StructItemKind::Include(m),
                span: it.span,
            },
            kind => StructItem { kind, span: it.span },
        })
        .collect();
    let opened = StructItem {
        kind: StructItemKind::Open(ModExpr {
            kind: ModExprKind::Struct(d1),
            span: span.clone(),
        }),
        span: span.clone(),
    };
    let mut body = vec![opened];
    body.extend(d2);
    StructItem {
        kind: StructItemKind::Include(ModExpr {
            kind: ModExprKind::Struct(body),
            span: span.clone(),
        }),
        span: span.clone(),
    }
}

/// `private d` as `open struct d end`.
pub fn private_as_open(item: StructItem, span: &SourceSpan) -> StructItem {
    StructItem {
        kind: StructItemKind::Open(ModExpr {
            kind: ModExprKind::Struct(vec![item]),
            span: span.clone(),
        }),
        span: span.clone(),
    }
}

// -------------------------------------------------------------------
// Traversal

/// Applies `f` to every structure item list in the tree, innermost first.
fn walk_items(items: &mut Vec<StructItem>, f: &mut dyn FnMut(&mut Vec<StructItem>)) {
    for it in items.iter_mut() {
        walk_item(it, f);
    }
    f(items);
}

fn walk_item(it: &mut StructItem, f: &mut dyn FnMut(&mut Vec<StructItem>)) {
    match &mut it.kind {
        StructItemKind::Let { bindings, .. } => bindings.iter_mut().for_each(|b| walk_expr(&mut b.body, f)),
        StructItemKind::Type { .. } | StructItemKind::Exception { .. } => {}
        StructItemKind::Module { params, body, .. } => {
            params.iter_mut().for_each(|p| walk_mod_type(&mut p.mty, f));
            walk_mod_expr(body, f);
        }
        StructItemKind::ModType { mty, .. } => walk_mod_type(mty, f),
        StructItemKind::Open(m) | StructItemKind::Include(m) => walk_mod_expr(m, f),
        StructItemKind::Local(d1, d2) => {
            walk_items(d1, f);
            walk_items(d2, f);
        }
        StructItemKind::Private(inner) => walk_item(inner, f),
        StructItemKind::Expr(e) => walk_expr(e, f),
    }
}

fn walk_mod_expr(m: &mut ModExpr, f: &mut dyn FnMut(&mut Vec<StructItem>)) {
    match &mut m.kind {
        ModExprKind::Path(_) => {}
        ModExprKind::Struct(items) => walk_items(items, f),
        ModExprKind::Functor(p, body) => {
            walk_mod_type(&mut p.mty, f);
            walk_mod_expr(body, f);
        }
        ModExprKind::Apply(a, b) => {
            walk_mod_expr(a, f);
            walk_mod_expr(b, f);
        }
        ModExprKind::Ascribe(inner, mty) => {
            walk_mod_expr(inner, f);
            walk_mod_type(mty, f);
        }
    }
}

fn walk_mod_type(m: &mut ModTypeExpr, f: &mut dyn FnMut(&mut Vec<StructItem>)) {
    match &mut m.kind {
        ModTypeKind::Path(_) => {}
        ModTypeKind::Sig(specs) => specs.iter_mut().for_each(|s| walk_spec(s, f)),
        ModTypeKind::Functor(p, r) => {
            walk_mod_type(&mut p.mty, f);
            walk_mod_type(r, f);
        }
        ModTypeKind::With(base, _) => walk_mod_type(base, f),
    }
}

fn walk_spec(s: &mut SpecItem, f: &mut dyn FnMut(&mut Vec<StructItem>)) {
    match &mut s.kind {
        SpecItemKind::Module { params, mty, .. } => {
            params.iter_mut().for_each(|p| walk_mod_type(&mut p.mty, f));
            walk_mod_type(mty, f);
        }
        SpecItemKind::ModType { mty: Some(m), .. } | SpecItemKind::Include(m) => walk_mod_type(m, f),
        SpecItemKind::Open(m) => walk_mod_expr(m, f),
        SpecItemKind::Local(d1, d2) => {
            d1.iter_mut().for_each(|s| walk_spec(s, f));
            d2.iter_mut().for_each(|s| walk_spec(s, f));
        }
        _ => {}
    }
}

fn walk_expr(e: &mut Expr, f: &mut dyn FnMut(&mut Vec<StructItem>)) {
    match &mut e.kind {
        ExprKind::Lit(_) | ExprKind::Var(_) | ExprKind::Constr(_, None) => {}
        ExprKind::Constr(_, Some(x))
        | ExprKind::Fun(_, x)
        | ExprKind::Raise(x)
        | ExprKind::Assert(x)
        | ExprKind::Annot(x, _)
        | ExprKind::LetExceptionIn(_, _, x) => walk_expr(x, f),
        ExprKind::Tuple(es) => es.iter_mut().for_each(|x| walk_expr(x, f)),
        ExprKind::Apply(a, b) | ExprKind::Sequence(a, b) => {
            walk_expr(a, f);
            walk_expr(b, f);
        }
        ExprKind::LetIn { bindings, body, .. } => {
            bindings.iter_mut().for_each(|b| walk_expr(&mut b.body, f));
            walk_expr(body, f);
        }
        ExprKind::Match(s, cases) | ExprKind::TryWith(s, cases) => {
            walk_expr(s, f);
            cases.iter_mut().for_each(|c| walk_expr(&mut c.body, f));
        }
        ExprKind::LetModuleIn(_, m, body) | ExprKind::LetOpenIn(m, body) => {
            walk_mod_expr(m, f);
            walk_expr(body, f);
        }
        ExprKind::If(c, t, e) => {
            walk_expr(c, f);
            walk_expr(t, f);
            if let Some(e) = e {
                walk_expr(e, f);
            }
        }
    }
}

// -------------------------------------------------------------------
// Forward translations

/// Replaces every `local d1 in d2 end` by `include struct open struct d1 end d2 end`.
pub fn expand_local(items: &[StructItem]) -> Vec<StructItem> {
    let mut items = items.to_vec();
    walk_items(&mut items, &mut |list| {
        for it in list.iter_mut() {
            if let StructItemKind::Local(..) = it.kind {
                let StructItemKind::Local(d1, d2) =
                    std::mem::replace(&mut it.kind, StructItemKind::Local(Vec::new(), Vec::new()))
                else {
                    unreachable!()
                };
                *it = local_as_include(d1, d2, &it.span);
            }
        }
    });
    items
}

/// Replaces every `private d` by `open struct d end`.
pub fn expand_private(items: &[StructItem]) -> Vec<StructItem> {
    let mut items = items.to_vec();
    walk_items(&mut items, &mut |list| {
        for it in list.iter_mut() {
            expand_private_item(it);
        }
    });
    items
}

fn expand_private_item(it: &mut StructItem) {
    if let StructItemKind::Private(inner) = &mut it.kind {
        expand_private_item(inner);
        let inner = std::mem::replace(
            &mut **inner,
            StructItem {
                kind: StructItemKind::Local(Vec::new(), Vec::new()),
                span: it.span.clone(),
            },
        );
        *it = private_as_open(inner, &it.span);
    }
}

// -------------------------------------------------------------------
// Reverse translations

/// Every capitalized identifier occurring in `items`: an over-approximation
/// of the module names they may refer to.
pub fn approx_module_names(items: &[StructItem]) -> BTreeSet<String> {
    let text = print_items(items);
    let mut names = BTreeSet::new();
    if let Ok(toks) = tokenize("approx", &text) {
        for t in toks {
            if let Tok::UIdent(n) = t.tok {
                names.insert(n);
            }
        }
    }
    names
}

fn fresh_module_name(avoid: &BTreeSet<String>) -> String {
    (0..)
        .map(|i| format!("M{i}"))
        .find(|n| !avoid.contains(n))
        .expect("unbounded name supply")
}

fn is_non_path_open(it: &StructItem) -> bool {
    matches!(&it.kind, StructItemKind::Open(m) if !matches!(m.kind, ModExprKind::Path(_)))
}

fn module_bind(name: &str, body: ModExpr, span: &SourceSpan) -> StructItem {
    StructItem {
        kind: StructItemKind::Module {
            name: name.to_string(),
            params: Vec::new(),
            body,
        },
        span: span.clone(),
    }
}

fn open_path(name: &str, span: &SourceSpan) -> StructItem {
    StructItem {
        kind: StructItemKind::Open(ModExpr {
            kind: ModExprKind::Path(ModPath::Name(name.to_string())),
            span: span.clone(),
        }),
        span: span.clone(),
    }
}

/// Splits off the first non-path `open`, returning the items before it, the
/// opened expression and the remainder.
fn split_open(list: &mut Vec<StructItem>) -> Option<(Vec<StructItem>, ModExpr, SourceSpan, Vec<StructItem>)> {
    let k = list.iter().position(is_non_path_open)?;
    let rest = list.split_off(k + 1);
    let open = list.pop().expect("open item");
    let StructItemKind::Open(m) = open.kind else { unreachable!() };
    Some((std::mem::take(list), m, open.span, rest))
}

/// Rewrites `open m; d` (with `m` not a path) into
/// `local module M = m open M in d end`.
pub fn introduce_local(items: &[StructItem]) -> Vec<StructItem> {
    let mut items = items.to_vec();
    walk_items(&mut items, &mut introduce_local_list);
    items
}

fn introduce_local_list(list: &mut Vec<StructItem>) {
    let Some((mut before, m, span, mut rest)) = split_open(list) else { return };
    introduce_local_list(&mut rest);
    let name = fresh_module_name(&approx_module_names(&rest));
    let d1 = vec![module_bind(&name, m, &span), open_path(&name, &span)];
    let end = rest.last().map(|it| span.to(&it.span)).unwrap_or_else(|| span.clone());
    before.push(StructItem {
        kind: StructItemKind::Local(d1, rest),
        span: end,
    });
    *list = before;
}

/// Rewrites `open m; d` (with `m` not a path) into
/// `private module M = m; open M; d`.
pub fn introduce_private(items: &[StructItem]) -> Vec<StructItem> {
    let mut items = items.to_vec();
    walk_items(&mut items, &mut introduce_private_list);
    items
}

fn introduce_private_list(list: &mut Vec<StructItem>) {
    let Some((mut before, m, span, mut rest)) = split_open(list) else { return };
    introduce_private_list(&mut rest);
    let name = fresh_module_name(&approx_module_names(&rest));
    before.push(StructItem {
        kind: StructItemKind::Private(Box::new(module_bind(&name, m, &span))),
        span: span.clone(),
    });
    before.push(open_path(&name, &span));
    before.extend(rest);
    *list = before;
}
