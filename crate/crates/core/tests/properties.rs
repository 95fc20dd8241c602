mod common;

use std::collections::{BTreeSet, HashMap};

use proptest::prelude::*;

use common::planted::has_hidden_name;
use common::*;
use minimod::desugar::{
    approx_module_names, expand_local, expand_private, introduce_local, introduce_private, print_source,
};
use minimod::mod_typing::check_program;
use minimod::printer::{print_signature, PrintMode};
use minimod::semobj::{match_modtype, strengthen, ModType, Path, Session, SigItem};
use minimod::syntax::{parse_program, ModExpr, ModExprKind, ModPath, Program, StructItem, StructItemKind};

fn round_trip(p: &Program) -> Result<(), String> {
    let text = print_source(p);
    let back = parse_program(&text).map_err(|e| format!("{e} in\n{text}"))?;
    if &back != p {
        return Err(format!("reparse differs:\n{text}"));
    }
    Ok(())
}

#[test]
fn corpus_source_round_trip() {
    for f in corpus_files() {
        let p = parse_program(&read(&f)).unwrap();
        round_trip(&p).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
    }
}

// -------------------------------------------------------------------
// Random surface programs

fn expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0..100i64).prop_map(|n| n.to_string()),
        prop_oneof![Just("x"), Just("y"), Just("f")].prop_map(String::from),
        Just("\"s\\n\"".to_string()),
        Just("()".to_string()),
        Just("true".to_string()),
        Just("M.v".to_string()),
        Just("None".to_string()),
    ];
    leaf.prop_recursive(4, 24, 3, |e| {
        prop_oneof![
            (e.clone(), prop_oneof![Just("+"), Just("-"), Just("*"), Just("<"), Just("="), Just(";"), Just(":=")], e.clone())
                .prop_map(|(a, op, b)| format!("({a} {op} {b})")),
            (e.clone(), e.clone(), e.clone()).prop_map(|(a, b, c)| format!("(if {a} then {b} else {c})")),
            e.clone().prop_map(|a| format!("(fun x -> {a})")),
            (e.clone(), e.clone()).prop_map(|(a, b)| format!("(let y = {a} in {b})")),
            (e.clone(), e.clone()).prop_map(|(a, b)| format!("({a}, {b})")),
            (e.clone(), e.clone()).prop_map(|(a, b)| format!("({a} {b})")),
            (e.clone(), e.clone(), e.clone())
                .prop_map(|(a, b, c)| format!("(match {a} with Some y -> {b} | None -> {c})")),
            e.clone().prop_map(|a| format!("(let open struct let z = 1 end in {a})")),
            e.clone().prop_map(|a| format!("(let module N = M in {a})")),
            (e.clone(), e.clone()).prop_map(|(a, b)| format!("(try {a} with Not_found -> {b})")),
            e.clone().prop_map(|a| format!("(assert {a})")),
            e.clone().prop_map(|a| format!("(raise {a})")),
            e.clone().prop_map(|a| format!("(!{a})")),
            e.clone().prop_map(|a| format!("(Some {a})")),
            e.prop_map(|a| format!("begin {a} end")),
        ]
    })
}

fn ty() -> impl Strategy<Value = String> {
    prop_oneof![Just("int"), Just("t"), Just("M.t"), Just("'a"), Just("F(M).t")]
        .prop_map(String::from)
        .prop_recursive(3, 8, 2, |t| {
            prop_oneof![
                (t.clone(), t.clone()).prop_map(|(a, b)| format!("({a} -> {b})")),
                (t.clone(), t.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
                t.prop_map(|a| format!("{a} list")),
            ]
        })
}

fn spec() -> impl Strategy<Value = String> {
    prop_oneof![
        ty().prop_map(|t| format!("val v : {t}")),
        Just("type t".to_string()),
        ty().prop_map(|t| format!("type 'a u = {t}")),
        ty().prop_map(|t| format!("type t' := {t}")),
        ty().prop_map(|t| format!("open struct type w = {t} end")),
        Just("module N : sig type t end".to_string()),
        ty().prop_map(|t| format!("exception X of {t}")),
    ]
}

fn sig_expr() -> impl Strategy<Value = String> {
    prop_oneof![
        prop::collection::vec(spec(), 0..4).prop_map(|s| format!("sig {} end", s.join(" "))),
        Just("S".to_string()),
        ty().prop_map(|t| format!("S with type t = {t}")),
        ty().prop_map(|t| format!("S with type t := {t}")),
    ]
}

fn item() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        expr().prop_map(|e| format!("let x = {e}")),
        (expr(), expr()).prop_map(|(a, b)| format!("let rec f x = {a} and g y = {b}")),
        ty().prop_map(|t| format!("type t = A | B of {t}")),
        ty().prop_map(|t| format!("type nonrec t = {t} and u = C")),
        ty().prop_map(|t| format!("exception E of {t}")),
        expr().prop_map(|e| format!("let _ = {e}")),
        Just("open M".to_string()),
        sig_expr().prop_map(|s| format!("module type S = {s}")),
        Just("module A = F(M)".to_string()),
        sig_expr().prop_map(|s| format!("module B = (M : {s})")),
    ];
    leaf.prop_recursive(3, 16, 3, |it| {
        let items = prop::collection::vec(it.clone(), 0..3).prop_map(|v| v.join("\n"));
        prop_oneof![
            items.clone().prop_map(|b| format!("module M = struct\n{b}\nend")),
            items.clone().prop_map(|b| format!("open struct\n{b}\nend")),
            items.clone().prop_map(|b| format!("include struct\n{b}\nend")),
            (items.clone(), items.clone()).prop_map(|(a, b)| format!("local\n{a}\nin\n{b}\nend")),
            it.prop_map(|i| format!("private {i}")),
            (sig_expr(), items).prop_map(|(s, b)| format!("module F (X : {s}) = struct\n{b}\nend")),
        ]
    })
}

fn program_text() -> impl Strategy<Value = String> {
    prop::collection::vec(item(), 0..5).prop_map(|v| v.join("\n"))
}

proptest! {
    #[test]
    fn generated_source_round_trip(src in program_text()) {
        let p = parse_program(&src).map_err(|e| TestCaseError::fail(format!("{e} in\n{src}")))?;
        round_trip(&p).map_err(TestCaseError::fail)?;
        prop_assert_eq!(parse_program(&src).unwrap(), p);
    }

    #[test]
    fn planted_source_round_trip(p in common::planted::planted()) {
        for src in [p.with_open(), p.with_named()] {
            let prog = parse_program(&src).map_err(|e| TestCaseError::fail(e.to_string()))?;
            round_trip(&prog).map_err(TestCaseError::fail)?;
        }
    }
}

// -------------------------------------------------------------------
// Semantic objects

fn module_items(items: &[SigItem], out: &mut Vec<(Path, ModType)>, at: Option<&Path>) {
    for it in items {
        if let SigItem::Module(id, m) = it {
            let p = match at {
                None => Path::Ident(id.clone()),
                Some(q) => q.clone().dot(id.name.clone()),
            };
            if let ModType::Sig(inner) = m {
                module_items(inner, out, Some(&p));
            }
            out.push((p, m.clone()));
        }
    }
}

#[test]
fn strengthen_is_idempotent_and_a_subtype() {
    for (f, p) in accepted_corpus() {
        let mut sess = Session::new();
        let sig = signature_in(&mut sess, &p);
        let whole = ModType::Sig(sig.clone());
        match_modtype(&mut sess, &whole, &whole).unwrap_or_else(|e| panic!("{}: reflexivity: {e}", f.display()));
        let mut mods = Vec::new();
        module_items(&sig, &mut mods, None);
        for (path, m) in mods {
            let once = strengthen(&sess, &m, &path);
            let twice = strengthen(&sess, &once, &path);
            assert_eq!(once, twice, "{} {path}", f.display());
            match_modtype(&mut sess, &once, &m).unwrap_or_else(|e| panic!("{} {path}: {e}", f.display()));
            match_modtype(&mut sess, &m, &m).unwrap_or_else(|e| panic!("{} {path}: {e}", f.display()));
        }
    }
}

#[test]
fn exported_signatures_have_no_hidden_idents() {
    for (f, p) in accepted_corpus() {
        let mut sess = Session::new();
        let sig = signature_in(&mut sess, &p);
        assert!(!has_hidden_name(&sig), "{}", f.display());
        for mode in [PrintMode::Plain, PrintMode::Stamps, PrintMode::Aliases] {
            let text = print_signature(&sess, &sig, mode).unwrap();
            assert!(!text.contains('#'), "{}: {text}", f.display());
        }
    }
}

// -------------------------------------------------------------------
// Printer

/// Declared idents of `items` in printing order, keyed by the keyword that
/// introduces them.
fn declared(items: &[SigItem], out: &mut Vec<(&'static str, u32)>) {
    fn modtype(m: &ModType, out: &mut Vec<(&'static str, u32)>) {
        match m {
            ModType::Sig(items) => declared(items, out),
            ModType::Functor(_, p, r) => {
                modtype(p, out);
                modtype(r, out);
            }
            ModType::Named(_) => {}
        }
    }
    for it in items {
        match it {
            SigItem::Val(id, _) => out.push(("val", id.stamp)),
            SigItem::Type(id, _) => out.push(("type", id.stamp)),
            SigItem::Exn(id, _) => out.push(("exception", id.stamp)),
            SigItem::Module(id, m) => {
                out.push(("module", id.stamp));
                modtype(m, out);
            }
            SigItem::ModType(id, m) => {
                out.push(("module type", id.stamp));
                if let Some(m) = m {
                    modtype(m, out);
                }
            }
        }
    }
}

/// Declaration headers of a rendered signature: keyword and rendered name.
fn headers(text: &str) -> Vec<(&'static str, String)> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let name_at = |mut j: usize| -> String {
        while j < toks.len() && (toks[j].starts_with('\'') || toks[j].starts_with('(') && toks[j] != "(") {
            j += 1;
        }
        if toks[j] == "(" {
            let close = toks[j..].iter().position(|t| *t == ")").unwrap() + j;
            return toks[j..=close].join(" ");
        }
        toks[j].to_string()
    };
    while i < toks.len() {
        let kw = match toks[i] {
            "val" => Some("val"),
            "type" | "and" => Some("type"),
            "exception" => Some("exception"),
            "module" if toks.get(i + 1) == Some(&"type") => {
                i += 1;
                Some("module type")
            }
            "module" => Some("module"),
            _ => None,
        };
        if let Some(kw) = kw {
            out.push((kw, name_at(i + 1)));
        }
        i += 1;
    }
    out
}

#[test]
fn stamp_mode_is_unambiguous() {
    let mut checked = 0;
    for (f, p) in accepted_corpus() {
        let mut sess = Session::new();
        let sig = signature_in(&mut sess, &p);
        let text = print_signature(&sess, &sig, PrintMode::Stamps).unwrap();
        let mut ids = Vec::new();
        declared(&sig, &mut ids);
        let heads = headers(&text);
        assert_eq!(ids.len(), heads.len(), "{}:\n{text}", f.display());
        let mut by_render: HashMap<(&str, &str), BTreeSet<u32>> = HashMap::new();
        for ((kw, stamp), (kw2, name)) in ids.iter().zip(&heads) {
            assert_eq!(kw, kw2, "{}:\n{text}", f.display());
            by_render.entry((kw, name.as_str())).or_default().insert(*stamp);
        }
        for ((kw, name), stamps) in by_render {
            assert_eq!(stamps.len(), 1, "{}: {kw} {name} renders {stamps:?}\n{text}", f.display());
        }
        checked += 1;
    }
    assert!(checked >= 12);
}

#[test]
fn stamp_mode_separates_shadowed_types() {
    let p = parse_program(&read(&corpus_file("t17_unprintable"))).unwrap();
    let mut sess = Session::new();
    let sig = signature_in(&mut sess, &p);
    let text = print_signature(&sess, &sig, PrintMode::Stamps).unwrap();
    let f = text.lines().find(|l| l.contains("val f")).unwrap();
    let parts: Vec<&str> = f.split_whitespace().collect();
    let (dom, cod) = (parts[3], parts[5]);
    assert!(dom.starts_with("t/") && cod.starts_with("t/") && dom != cod, "{text}");
}

#[test]
fn alias_rendering_rechecks_for_corpus() {
    for (f, p) in accepted_corpus() {
        alias_rendering_rechecks(&p).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
    }
}

#[test]
fn renders_are_deterministic() {
    for (_, p) in accepted_corpus() {
        let render = |mode| {
            let mut sess = Session::new();
            let sig = signature_in(&mut sess, &p);
            print_signature(&sess, &sig, mode).unwrap()
        };
        for mode in [PrintMode::Plain, PrintMode::Stamps, PrintMode::Aliases] {
            assert_eq!(render(mode), render(mode));
        }
    }
}

// -------------------------------------------------------------------
// Desugaring

fn any_item(items: &[StructItem], pred: &dyn Fn(&StructItem) -> bool) -> bool {
    fn in_mod(m: &ModExpr, pred: &dyn Fn(&StructItem) -> bool) -> bool {
        match &m.kind {
            ModExprKind::Path(_) => false,
            ModExprKind::Struct(items) => any_item(items, pred),
            ModExprKind::Functor(_, b) => in_mod(b, pred),
            ModExprKind::Apply(f, a) => in_mod(f, pred) || in_mod(a, pred),
            ModExprKind::Ascribe(m, _) => in_mod(m, pred),
        }
    }
    items.iter().any(|it| {
        pred(it)
            || match &it.kind {
                StructItemKind::Module { body, .. } => in_mod(body, pred),
                StructItemKind::Open(m) | StructItemKind::Include(m) => in_mod(m, pred),
                StructItemKind::Local(a, b) => any_item(a, pred) || any_item(b, pred),
                StructItemKind::Private(i) => any_item(std::slice::from_ref(i), pred),
                _ => false,
            }
    })
}

fn is_local(it: &StructItem) -> bool {
    matches!(it.kind, StructItemKind::Local(..))
}

fn is_private(it: &StructItem) -> bool {
    matches!(it.kind, StructItemKind::Private(..))
}

fn is_non_path_open(it: &StructItem) -> bool {
    matches!(&it.kind, StructItemKind::Open(m) if !matches!(m.kind, ModExprKind::Path(_)))
}

fn program(items: Vec<StructItem>) -> Program {
    Program { items }
}

#[test]
fn desugaring_preserves_signatures() {
    for (f, p) in accepted_corpus() {
        let introduced = introduce_local(&p.items);
        assert!(!any_item(&introduced, &is_non_path_open), "{}", f.display());
        let local = expand_local(&introduced);
        assert!(!any_item(&local, &is_local), "{}", f.display());
        let private = expand_private(&introduce_private(&p.items));
        assert!(!any_item(&private, &is_private), "{}", f.display());
        for q in [program(introduced), program(local), program(private)] {
            round_trip(&q).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
            same_signature(&p, &q).unwrap_or_else(|e| panic!("{}: {e}\n{}", f.display(), print_source(&q)));
        }
    }
}

#[test]
fn local_and_private_expand_away() {
    for (f, p) in accepted_corpus() {
        let q = program(expand_private(&expand_local(&p.items)));
        assert!(!any_item(&q.items, &is_local) && !any_item(&q.items, &is_private));
        same_signature(&p, &q).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
    }
}

/// Name of the module in a generated `module M = m` followed by `open M`.
fn generated_pair(a: &StructItem, b: &StructItem) -> Option<String> {
    let a = match &a.kind {
        StructItemKind::Private(inner) => inner,
        _ => a,
    };
    let (StructItemKind::Module { name, .. }, StructItemKind::Open(m)) = (&a.kind, &b.kind) else {
        return None;
    };
    match &m.kind {
        ModExprKind::Path(ModPath::Name(n)) if n == name => Some(name.clone()),
        _ => None,
    }
}

#[test]
fn fresh_module_names_avoid_the_remainder() {
    let mut seen = 0;
    for (f, p) in accepted_corpus() {
        for it in introduce_local(&p.items) {
            if let StructItemKind::Local(d1, d2) = &it.kind {
                if let [a, b] = &d1[..] {
                    if let Some(name) = generated_pair(a, b) {
                        assert!(!approx_module_names(d2).contains(&name), "{}", f.display());
                        seen += 1;
                    }
                }
            }
        }
        let items = introduce_private(&p.items);
        for k in 1..items.len() {
            if let Some(name) = generated_pair(&items[k - 1], &items[k]) {
                assert!(!approx_module_names(&items[k + 1..]).contains(&name), "{}", f.display());
                seen += 1;
            }
        }
    }
    assert!(seen > 0);
}

#[test]
fn fresh_name_skips_names_in_use() {
    let p = parse_program("open struct let x = 3 end\nmodule M0 = struct end\nlet y = x").unwrap();
    let out = introduce_local(&p.items);
    let StructItemKind::Local(d1, _) = &out[0].kind else { panic!() };
    let StructItemKind::Module { name, .. } = &d1[0].kind else { panic!() };
    assert_eq!(name, "M1");
}

#[test]
fn introduce_local_matches_the_reverse_translation() {
    let p = parse_program("open struct let x = 3 end\nlet y = x").unwrap();
    let expected = parse_program("local\n  module M0 = struct let x = 3 end\n  open M0\nin\n  let y = x\nend").unwrap();
    assert_eq!(introduce_local(&p.items), expected.items);
    let expected = parse_program("private module M0 = struct let x = 3 end\nopen M0\nlet y = x").unwrap();
    assert_eq!(introduce_private(&p.items), expected.items);
}

#[test]
fn expand_local_matches_the_forward_translation() {
    let p = parse_program("local let a = 1 in let b = a end").unwrap();
    let expected = parse_program("include struct open struct let a = 1 end let b = a end").unwrap();
    assert_eq!(expand_local(&p.items), expected.items);
    let p = parse_program("private let x = 3").unwrap();
    let expected = parse_program("open struct let x = 3 end").unwrap();
    assert_eq!(expand_private(&p.items), expected.items);
}

#[test]
fn open_and_include_bind_the_same_names() {
    for (f, p) in accepted_corpus() {
        for it in &p.items {
            let StructItemKind::Open(m) = &it.kind else { continue };
            let as_include = Program {
                items: vec![StructItem {
                    kind: StructItemKind::Include(m.clone()),
                    span: it.span.clone(),
                }],
            };
            let mut sess = Session::new();
            let Ok(t) = check_program(&mut sess, &as_include) else { continue };
            // Every name the include re-exports can be referred to after the open.
            for si in &t.signature {
                if let SigItem::Val(id, _) = si {
                    let probe = format!(
                        "{}\nlet _ = {}",
                        minimod::desugar::print_items(std::slice::from_ref(it)),
                        id.name
                    );
                    let q = parse_program(&probe).unwrap();
                    check_program(&mut Session::new(), &q)
                        .unwrap_or_else(|e| panic!("{}: {} not bound by open: {e}", f.display(), id.name));
                }
            }
        }
    }
}
