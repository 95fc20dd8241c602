//! Source printer. The output re-parses to the same tree (spans aside).

use crate::syntax::*;

pub fn print_source(p: &Program) -> String {
    let mut out = String::new();
    for it in &p.items {
        out.push_str(&struct_item(it, 0));
        out.push('\n');
    }
    out
}

pub fn print_items(items: &[StructItem]) -> String {
    print_source(&Program { items: items.to_vec() })
}

fn pad(n: usize) -> String {
    " ".repeat(n)
}

/// `open`, `struct ... end` and friends: inline when there is at most one
/// single-line item.
fn block<T>(
    opener: &str,
    items: &[T],
    ind: usize,
    print: impl Fn(&T, usize) -> String,
) -> String {
    if items.is_empty() {
        return format!("{opener} end");
    }
    if items.len() == 1 {
        let one = print(&items[0], ind + 2);
        if !one.contains('\n') {
            return format!("{opener} {one} end");
        }
    }
    let mut s = opener.to_string();
    for it in items {
        s.push('\n');
        s.push_str(&pad(ind + 2));
        s.push_str(&print(it, ind + 2));
    }
    s.push('\n');
    s.push_str(&pad(ind));
    s.push_str("end");
    s
}

fn local_block<T>(d1: &[T], d2: &[T], ind: usize, print: impl Fn(&T, usize) -> String) -> String {
    let mut s = "local".to_string();
    for it in d1 {
        s.push_str(&format!("\n{}{}", pad(ind + 2), print(it, ind + 2)));
    }
    s.push_str(&format!("\n{}in", pad(ind)));
    for it in d2 {
        s.push_str(&format!("\n{}{}", pad(ind + 2), print(it, ind + 2)));
    }
    s.push_str(&format!("\n{}end", pad(ind)));
    s
}

pub fn struct_item(it: &StructItem, ind: usize) -> String {
    match &it.kind {
        StructItemKind::Let { rec_flag, bindings } => let_bindings(*rec_flag, bindings, ind),
        StructItemKind::Type { nonrec, defs } => type_defs(*nonrec, defs),
        StructItemKind::Module { name, params, body } => {
            format!("module {name}{} = {}", functor_params(params, ind), mod_expr(body, ind))
        }
        StructItemKind::ModType { name, mty } => format!("module type {name} = {}", mod_type(mty, ind)),
        StructItemKind::Exception { name, arg } => exception(name, arg.as_ref()),
        StructItemKind::Open(m) => format!("open {}", mod_expr(m, ind)),
        StructItemKind::Include(m) => format!("include {}", mod_expr(m, ind)),
        StructItemKind::Local(d1, d2) => local_block(d1, d2, ind, struct_item),
        StructItemKind::Private(inner) => format!("private {}", struct_item(inner, ind)),
        StructItemKind::Expr(e) => {
            if opens_with_let(e) {
                format!("({})", expr(e, 0, true, ind))
            } else {
                expr(e, 0, true, ind)
            }
        }
    }
}

fn opens_with_let(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::LetIn { .. }
        | ExprKind::LetModuleIn(..)
        | ExprKind::LetExceptionIn(..)
        | ExprKind::LetOpenIn(..) => true,
        ExprKind::Sequence(a, _) => opens_with_let(a),
        _ => false,
    }
}

fn functor_params(params: &[FunctorParam], ind: usize) -> String {
    params
        .iter()
        .map(|p| format!(" ({} : {})", p.name, mod_type(&p.mty, ind)))
        .collect()
}

fn exception(name: &str, arg: Option<&TypeExpr>) -> String {
    match arg {
        Some(t) => format!("exception {name} of {}", type_expr(t, 0)),
        None => format!("exception {name}"),
    }
}

fn let_bindings(rec_flag: bool, bindings: &[Binding], ind: usize) -> String {
    let head = if rec_flag { "let rec " } else { "let " };
    let parts: Vec<String> = bindings.iter().map(|b| binding(b, ind)).collect();
    format!("{head}{}", parts.join(" and "))
}

fn binding(b: &Binding, ind: usize) -> String {
    let mut s = match &b.pat.kind {
        PatternKind::Tuple(ps) if ps.iter().all(|p| matches!(p.kind, PatternKind::Var(_))) => {
            ps.iter().map(pattern_atom).collect::<Vec<_>>().join(", ")
        }
        _ => pattern_atom(&b.pat),
    };
    for p in &b.params {
        s.push(' ');
        s.push_str(&pattern_atom(p));
    }
    format!("{s} = {}", expr(&b.body, 0, true, ind))
}

// -------------------------------------------------------------------
// Types

fn type_params(params: &[String]) -> String {
    match params {
        [] => String::new(),
        [p] => format!("'{p} "),
        ps => format!("({}) ", ps.iter().map(|p| format!("'{p}")).collect::<Vec<_>>().join(", ")),
    }
}

fn type_defs(nonrec: bool, defs: &[TypeDef]) -> String {
    let parts: Vec<String> = defs.iter().map(type_def).collect();
    let head = if nonrec { "type nonrec " } else { "type " };
    format!("{head}{}", parts.join(" and "))
}

fn type_def(d: &TypeDef) -> String {
    let mut s = format!("{}{}", type_params(&d.params), d.name);
    match &d.repr {
        TypeRepr::Abstract => {}
        TypeRepr::Manifest(t) => s.push_str(&format!(" = {}", type_expr(t, 0))),
        TypeRepr::Variant { manifest, ctors } => {
            if let Some(m) = manifest {
                s.push_str(&format!(" = {}", type_expr(m, 0)));
            }
            let cs: Vec<String> = ctors.iter().map(ctor_decl).collect();
            s.push_str(&format!(" = {}", cs.join(" | ")));
        }
    }
    s
}

fn ctor_decl(c: &CtorDecl) -> String {
    if c.args.is_empty() {
        c.name.clone()
    } else {
        let args: Vec<String> = c.args.iter().map(|t| type_expr(t, 2)).collect();
        format!("{} of {}", c.name, args.join(" * "))
    }
}

pub fn mod_path(p: &ModPath) -> String {
    match p {
        ModPath::Name(n) => n.clone(),
        ModPath::Dot(q, n) => format!("{}.{n}", mod_path(q)),
        ModPath::Apply(f, a) => format!("{}({})", mod_path(f), mod_path(a)),
    }
}

fn long_ident(li: &LongIdent) -> String {
    match &li.module {
        Some(m) => format!("{}.{}", mod_path(m), li.name),
        None => li.name.clone(),
    }
}

/// Levels: 0 arrow, 1 tuple, 2 application, 3 atom.
pub fn type_expr(t: &TypeExpr, prec: u8) -> String {
    let (own, s) = match &t.kind {
        TypeExprKind::Var(v) => (3, format!("'{v}")),
        TypeExprKind::Arrow(a, b) => (0, format!("{} -> {}", type_expr(a, 1), type_expr(b, 0))),
        TypeExprKind::Tuple(ts) => (
            1,
            ts.iter().map(|t| type_expr(t, 2)).collect::<Vec<_>>().join(" * "),
        ),
        TypeExprKind::Constr(li, args) => match args.as_slice() {
            [] => (3, long_ident(li)),
            [a] => (2, format!("{} {}", type_expr(a, 2), long_ident(li))),
            args => (
                2,
                format!(
                    "({}) {}",
                    args.iter().map(|t| type_expr(t, 0)).collect::<Vec<_>>().join(", "),
                    long_ident(li)
                ),
            ),
        },
    };
    if own < prec {
        format!("({s})")
    } else {
        s
    }
}

// -------------------------------------------------------------------
// Module expressions and module types

pub fn mod_expr(m: &ModExpr, ind: usize) -> String {
    match &m.kind {
        ModExprKind::Path(p) => mod_path(p),
        ModExprKind::Struct(items) => block("struct", items, ind, struct_item),
        ModExprKind::Functor(p, body) => format!(
            "functor ({} : {}) -> {}",
            p.name,
            mod_type(&p.mty, ind),
            mod_expr(body, ind)
        ),
        ModExprKind::Apply(f, a) => {
            let head = match f.kind {
                ModExprKind::Functor(..) => format!("({})", mod_expr(f, ind)),
                _ => mod_expr(f, ind),
            };
            format!("{head}({})", mod_expr(a, ind))
        }
        ModExprKind::Ascribe(inner, mty) => format!("({} : {})", mod_expr(inner, ind), mod_type(mty, ind)),
    }
}

pub fn mod_type(m: &ModTypeExpr, ind: usize) -> String {
    match &m.kind {
        ModTypeKind::Path(li) => long_ident(li),
        ModTypeKind::Sig(items) => block("sig", items, ind, spec_item),
        ModTypeKind::Functor(p, r) => format!("functor ({} : {}) -> {}", p.name, mod_type(&p.mty, ind), mod_type(r, ind)),
        ModTypeKind::With(base, c) => {
            let b = match base.kind {
                ModTypeKind::Functor(..) => format!("({})", mod_type(base, ind)),
                _ => mod_type(base, ind),
            };
            let op = match c.mode {
                WithMode::Equal => "=",
                WithMode::Substitute => ":=",
            };
            format!("{b} with type {}{} {op} {}", type_params(&c.params), c.name, type_expr(&c.ty, 0))
        }
    }
}

fn value_name(name: &str) -> String {
    if is_operator(name) {
        format!("( {name} )")
    } else {
        name.to_string()
    }
}

pub fn spec_item(it: &SpecItem, ind: usize) -> String {
    match &it.kind {
        SpecItemKind::Val { name, ty } => format!("val {} : {}", value_name(name), type_expr(ty, 0)),
        SpecItemKind::Type { nonrec, defs } => type_defs(*nonrec, defs),
        SpecItemKind::TypeSubst { params, name, ty } => {
            format!("type {}{name} := {}", type_params(params), type_expr(ty, 0))
        }
        SpecItemKind::Module { name, params, mty } => {
            format!("module {name}{} : {}", functor_params(params, ind), mod_type(mty, ind))
        }
        SpecItemKind::ModType { name, mty: Some(m) } => format!("module type {name} = {}", mod_type(m, ind)),
        SpecItemKind::ModType { name, mty: None } => format!("module type {name}"),
        SpecItemKind::Exception { name, arg } => exception(name, arg.as_ref()),
        SpecItemKind::Open(m) => format!("open {}", mod_expr(m, ind)),
        SpecItemKind::Include(m) => format!("include {}", mod_type(m, ind)),
        SpecItemKind::Local(d1, d2) => local_block(d1, d2, ind, spec_item),
    }
}

// -------------------------------------------------------------------
// Patterns

fn literal(l: &Literal) -> String {
    match l {
        Literal::Int(n) => n.to_string(),
        Literal::Str(s) => {
            let mut out = String::from("\"");
            for c in s.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    c => out.push(c),
                }
            }
            out.push('"');
            out
        }
        Literal::Bool(b) => b.to_string(),
        Literal::Unit => "()".into(),
    }
}

fn pattern_atom(p: &Pattern) -> String {
    match &p.kind {
        PatternKind::Wildcard => "_".into(),
        PatternKind::Var(v) => v.clone(),
        PatternKind::Lit(l) => literal(l),
        PatternKind::Constr(li, None) => long_ident(li),
        PatternKind::Annot(inner, t) => format!("({} : {})", pattern(inner), type_expr(t, 0)),
        PatternKind::Constr(_, Some(_)) | PatternKind::Tuple(_) => format!("({})", pattern(p)),
    }
}

fn pattern(p: &Pattern) -> String {
    match &p.kind {
        PatternKind::Tuple(ps) => ps.iter().map(pattern_ctor).collect::<Vec<_>>().join(", "),
        _ => pattern_ctor(p),
    }
}

fn pattern_ctor(p: &Pattern) -> String {
    match &p.kind {
        PatternKind::Constr(li, Some(arg)) => format!("{} {}", long_ident(li), pattern_atom(arg)),
        _ => pattern_atom(p),
    }
}

// -------------------------------------------------------------------
// Expressions
//
// Levels: 0 sequence, 1 let/fun/match/try/if, 2 `:=`, 3 tuple, 4 `= <`,
// 5 `+ -`, 6 `*`, 7 application, 8 prefix `!`, 9 atom. Level-1 forms
// extend as far right as possible, so outside a tail position they are
// parenthesized.

fn infix(e: &Expr) -> Option<(&str, &Expr, &Expr)> {
    if let ExprKind::Apply(f, r) = &e.kind {
        if let ExprKind::Apply(op, l) = &f.kind {
            if let ExprKind::Var(LongIdent { module: None, name }) = &op.kind {
                if INFIX_OPS.contains(&name.as_str()) {
                    return Some((name, l, r));
                }
            }
        }
    }
    None
}

fn deref(e: &Expr) -> Option<&Expr> {
    if let ExprKind::Apply(f, x) = &e.kind {
        if let ExprKind::Var(LongIdent { module: None, name }) = &f.kind {
            if name == "!" {
                return Some(x);
            }
        }
    }
    None
}

fn level(e: &Expr) -> u8 {
    if let Some((op, _, _)) = infix(e) {
        return match op {
            ":=" => 2,
            "=" | "<" => 4,
            "+" | "-" => 5,
            _ => 6,
        };
    }
    if deref(e).is_some() {
        return 8;
    }
    match &e.kind {
        ExprKind::Sequence(..) => 0,
        ExprKind::LetIn { .. }
        | ExprKind::LetModuleIn(..)
        | ExprKind::LetExceptionIn(..)
        | ExprKind::LetOpenIn(..)
        | ExprKind::Fun(..)
        | ExprKind::Match(..)
        | ExprKind::TryWith(..)
        | ExprKind::If(..) => 1,
        ExprKind::Tuple(_) => 3,
        ExprKind::Apply(..) | ExprKind::Raise(_) | ExprKind::Assert(_) | ExprKind::Constr(_, Some(_)) => 7,
        ExprKind::Lit(_) | ExprKind::Var(_) | ExprKind::Constr(_, None) | ExprKind::Annot(..) => 9,
    }
}

pub fn expr(e: &Expr, prec: u8, tail: bool, ind: usize) -> String {
    let own = level(e);
    if own < prec || (own == 1 && !tail) {
        return format!("({})", expr(e, 0, true, ind));
    }
    if let Some((op, l, r)) = infix(e) {
        let (lp, rp) = match own {
            2 => (3, 2),
            _ => (own, own + 1),
        };
        return format!("{} {op} {}", expr(l, lp, false, ind), expr(r, rp, false, ind));
    }
    if let Some(x) = deref(e) {
        let arg = expr(x, 8, false, ind);
        let sep = if arg.starts_with('!') { " " } else { "" };
        return format!("!{sep}{arg}");
    }
    match &e.kind {
        ExprKind::Lit(l) => literal(l),
        ExprKind::Var(li) if li.module.is_none() && is_operator(&li.name) => format!("( {} )", li.name),
        ExprKind::Var(li) => long_ident(li),
        ExprKind::Constr(li, None) => long_ident(li),
        ExprKind::Constr(li, Some(a)) => format!("{} {}", long_ident(li), expr(a, 8, false, ind)),
        ExprKind::Tuple(es) => es
            .iter()
            .map(|x| expr(x, 4, false, ind))
            .collect::<Vec<_>>()
            .join(", "),
        ExprKind::Fun(p, body) => format!("fun {} -> {}", pattern_atom(p), expr(body, 0, tail, ind)),
        ExprKind::Apply(f, a) => {
            let head = match f.kind {
                ExprKind::Raise(_) | ExprKind::Assert(_) | ExprKind::Constr(_, Some(_)) => {
                    format!("({})", expr(f, 0, true, ind))
                }
                _ => expr(f, 7, false, ind),
            };
            format!("{head} {}", expr(a, 8, false, ind))
        }
        ExprKind::LetIn {
            rec_flag,
            bindings,
            body,
        } => format!("{} in {}", let_bindings(*rec_flag, bindings, ind), expr(body, 0, tail, ind)),
        ExprKind::Match(s, cases) => format!("match {} with {}", expr(s, 0, true, ind), print_cases(cases, tail, ind)),
        ExprKind::TryWith(b, cases) => format!("try {} with {}", expr(b, 0, true, ind), print_cases(cases, tail, ind)),
        ExprKind::Raise(x) => format!("raise {}", expr(x, 7, false, ind)),
        ExprKind::Assert(x) => format!("assert {}", expr(x, 7, false, ind)),
        ExprKind::Sequence(a, b) => format!("{}; {}", expr(a, 1, false, ind), expr(b, 0, tail, ind)),
        ExprKind::LetModuleIn(name, m, body) => {
            format!("let module {name} = {} in {}", mod_expr(m, ind), expr(body, 0, tail, ind))
        }
        ExprKind::LetExceptionIn(name, arg, body) => {
            format!("let {} in {}", exception(name, arg.as_ref()), expr(body, 0, tail, ind))
        }
        ExprKind::LetOpenIn(m, body) => format!("let open {} in {}", mod_expr(m, ind), expr(body, 0, tail, ind)),
        ExprKind::If(c, t, f) => {
            let cond = expr(c, 0, true, ind);
            match f {
                Some(f) => format!(
                    "if {cond} then {} else {}",
                    expr(t, 2, false, ind),
                    expr(f, 1, tail, ind)
                ),
                None => format!("if {cond} then {}", expr(t, 1, tail, ind)),
            }
        }
        ExprKind::Annot(x, t) => format!("({} : {})", expr(x, 0, true, ind), type_expr(t, 0)),
    }
}

fn print_cases(cases: &[Case], tail: bool, ind: usize) -> String {
    let n = cases.len();
    cases
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let exn = if c.exception { "exception " } else { "" };
            format!(
                "| {exn}{} -> {}",
                pattern(&c.pat),
                expr(&c.body, 0, tail && i + 1 == n, ind)
            )
        })
        .collect::<Vec<_>>()
        .join(" ")
}
