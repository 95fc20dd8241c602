//! One line per acceptance criterion, then a single verdict.

mod common;

use proptest::test_runner::{Config, TestRunner};

use common::planted::{check_planted, has_hidden_name, planted};
use common::*;
use minimod::desugar::{expand_local, expand_private, introduce_local, introduce_private, print_source};
use minimod::printer::{print_signature, PrintMode};
use minimod::semobj::{match_modtype, ModType, Session};
use minimod::syntax::{parse_program, ModExpr, ModExprKind, ModPath, Program, StructItem, StructItemKind};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond { Ok(()) } else { Err(msg()) }
}

fn infer(stem: &str) -> Invocation {
    cli_on("infer", &corpus_file(stem), &[])
}

fn expect_stdout(inv: &Invocation, expected: &str) -> Outcome {
    ensure(inv.code == 0 && inv.stdout == expected, || {
        format!("exit {}, stdout {:?}, expected {expected:?}\n{}", inv.code, inv.stdout, inv.stderr)
    })
}

fn unexported_value() -> Outcome {
    let inv = infer("t01_unexported");
    expect_stdout(&inv, "val y : int\n")?;
    ensure(!inv.stdout.contains("val x"), || "x is exported".into())
}

fn shadowing_workaround() -> Outcome {
    let f = corpus_file("t02_shadowing");
    let check = cli_on("check", &f, &[]);
    ensure(check.code == 0, || check.stderr.clone())?;
    let p = parse_program(&read(&f)).map_err(|e| e.to_string())?;
    let text = alias_rendering_rechecks(&p)?;
    ensure(text == "type t = A\ntype t' := t\nmodule M : sig type t = B of t * t' | C end", || text.clone())?;
    let inv = cli_on("infer", &f, &["--print-mode", "aliases"]);
    ensure(inv.stdout == format!("{text}\n"), || inv.stdout.clone())
}

/// The `name/stamp` after `prefix` in `text`.
fn stamped_after<'t>(text: &'t str, prefix: &str) -> Option<&'t str> {
    let rest = &text[text.find(prefix)? + prefix.len()..];
    rest.split_whitespace().next()
}

fn elimination_error() -> Outcome {
    let inv = cli_on("check", &corpus_file("t03_elim_error"), &[]);
    ensure(inv.code == 1 && inv.stdout.is_empty(), || format!("exit {}", inv.code))?;
    let e = &inv.stderr;
    ensure(e.contains("introduced by this open appears in the signature"), || e.clone())?;
    let hidden = stamped_after(e, "Error: The type ").ok_or_else(|| e.clone())?;
    ensure(hidden.starts_with("t/"), || e.clone())?;
    ensure(e.contains(&format!("The value x has no valid type if {hidden} is hidden")), || e.clone())?;
    ensure(e.contains("Line 2, characters 4-5:"), || e.clone())
}

fn functor_application() -> Outcome {
    let inv = infer("t04_functor_path");
    ensure(inv.code == 0 && inv.stdout.ends_with("module B : sig val x : A.t end\n"), || inv.stdout.clone())?;
    let inv = infer("t05_functor_anon");
    ensure(inv.code == 1 && inv.stdout.is_empty(), || format!("exit {}", inv.code))?;
    ensure(inv.stderr.contains("introduced by this functor argument appears in the signature"), || {
        inv.stderr.clone()
    })?;
    ensure(inv.stderr.contains("The value x has no valid type if t/"), || inv.stderr.clone())
}

fn avoidance() -> Outcome {
    expect_stdout(
        &infer("t06_avoid_open"),
        "module M : sig type u type v end\nmodule N : sig type u type v = u end\n",
    )?;
    let inv = infer("t07_avoid_functor");
    for line in [
        "module FC : sig type u = Char.t type v = Char.t end",
        "module GC : sig type u = Char.t type v = u end",
        "module FI : sig type u type v end",
        "module GI : sig type u type v = u end",
    ] {
        ensure(inv.stdout.lines().any(|l| l == line), || format!("missing {line:?} in\n{}", inv.stdout))?;
    }
    Ok(())
}

fn destructive_substitution() -> Outcome {
    let inv = infer("t08_destructive");
    ensure(inv.stdout.ends_with("module type S = sig val f : int -> int end\n"), || inv.stdout.clone())
}

fn non_evaluation() -> Outcome {
    for (stem, code) in [("t09_sig_no_eval", 0), ("t10_functor_type_path", 0), ("t11_assert_struct", 3)] {
        let inv = cli_on("run", &corpus_file(stem), &[]);
        ensure(inv.code == code, || format!("{stem}: exit {} {}", inv.code, inv.stderr))?;
    }
    let inv = cli_on("run", &corpus_file("t11_assert_struct"), &[]);
    ensure(inv.stderr.contains("Exception: Assert_failure"), || inv.stderr.clone())
}

fn evaluator() -> Outcome {
    let run = |stem: &str| cli_on("run", &corpus_file(stem), &[]);
    expect_stdout(&run("t12_counter"), "1")?;
    expect_stdout(&run("t13_interrupt"), "failed")?;
    expect_stdout(&run("t14_open_once"), "x")
}

/// Replaces every `open m` with `m` not a path by `module Hidden_k = m`
/// followed by `open Hidden_k`, counting in `k`.
fn name_hidden_modules(items: &mut Vec<StructItem>, k: &mut usize) {
    fn in_mod(m: &mut ModExpr, k: &mut usize) {
        match &mut m.kind {
            ModExprKind::Path(_) => {}
            ModExprKind::Struct(items) => name_hidden_modules(items, k),
            ModExprKind::Functor(_, b) => in_mod(b, k),
            ModExprKind::Apply(f, a) => {
                in_mod(f, k);
                in_mod(a, k);
            }
            ModExprKind::Ascribe(m, _) => in_mod(m, k),
        }
    }
    let mut out = Vec::with_capacity(items.len());
    for mut it in items.drain(..) {
        match &mut it.kind {
            StructItemKind::Module { body, .. } => in_mod(body, k),
            StructItemKind::Include(m) => in_mod(m, k),
            StructItemKind::Local(a, b) => {
                name_hidden_modules(a, k);
                name_hidden_modules(b, k);
            }
            StructItemKind::Open(m) if !matches!(m.kind, ModExprKind::Path(_)) => {
                in_mod(m, k);
                let name = format!("Hidden_{k}");
                *k += 1;
                let path = ModExpr {
                    kind: ModExprKind::Path(ModPath::Name(name.clone())),
                    span: m.span.clone(),
                };
                let body = std::mem::replace(m, path);
                out.push(StructItem {
                    kind: StructItemKind::Module { name, params: Vec::new(), body },
                    span: it.span.clone(),
                });
            }
            _ => {}
        }
        out.push(it);
    }
    *items = out;
}

fn nondep_supertype() -> Outcome {
    let mut programs = 0;
    for (f, p) in accepted_corpus() {
        let mut named = p.clone();
        let mut k = 0;
        name_hidden_modules(&mut named.items, &mut k);
        if k == 0 {
            continue;
        }
        programs += 1;
        let mut sess = Session::new();
        let original = signature_in(&mut sess, &named);
        let eliminated = signature_in(&mut sess, &p);
        let name = f.display();
        ensure(!has_hidden_name(&eliminated), || format!("{name}: hidden ident exported"))?;
        let plain = print_signature(&sess, &eliminated, PrintMode::Plain).map_err(|e| e.to_string())?;
        ensure(!plain.contains("Hidden_"), || format!("{name}: {plain}"))?;
        match_modtype(&mut sess, &ModType::Sig(original), &ModType::Sig(eliminated))
            .map_err(|e| format!("{name}: {e}"))?;
    }
    ensure(programs >= 12, || format!("only {programs} corpus programs with extended opens"))?;
    let mut runner = TestRunner::new_with_rng(
        Config { cases: 200, failure_persistence: None, ..Config::default() },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    runner.run(&planted(), |p| check_planted(&p)).map_err(|e| e.to_string())
}

fn desugaring() -> Outcome {
    let mut n = 0;
    for (f, p) in accepted_corpus() {
        let local = Program { items: expand_local(&introduce_local(&p.items)) };
        let private = Program { items: expand_private(&introduce_private(&p.items)) };
        for q in [local, private] {
            let text = print_source(&q);
            let back = parse_program(&text).map_err(|e| format!("{}: {e}\n{text}", f.display()))?;
            ensure(back == q, || format!("{}: reparse differs\n{text}", f.display()))?;
            same_signature(&p, &q).map_err(|e| format!("{}: {e}", f.display()))?;
        }
        n += 1;
    }
    ensure(n >= 12, || format!("only {n} accepted corpus programs"))
}

fn transcript() -> Vec<Invocation> {
    let mut out = Vec::new();
    for f in corpus_files() {
        for (cmd, extra) in [
            ("check", &[][..]),
            ("infer", &["--print-mode", "plain"][..]),
            ("infer", &["--print-mode", "stamps"][..]),
            ("infer", &["--print-mode", "aliases"][..]),
            ("run", &[][..]),
            ("desugar", &["--eliminate", "local"][..]),
            ("desugar", &["--eliminate", "private"][..]),
            ("desugar", &["--eliminate", "open"][..]),
            ("elaborate", &[][..]),
        ] {
            out.push(cli_on(cmd, &f, extra));
        }
    }
    out
}

fn determinism() -> Outcome {
    ensure(transcript() == transcript(), || "CLI outputs differ between runs".into())?;
    let first = nondep_supertype();
    let second = nondep_supertype();
    ensure(first == second, || "property outcomes differ between runs".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 11] = [
        ("unexported value", unexported_value),
        ("shadowing workaround", shadowing_workaround),
        ("dependency elimination error", elimination_error),
        ("functor application", functor_application),
        ("avoidance", avoidance),
        ("destructive substitution", destructive_substitution),
        ("non-evaluation of type contexts", non_evaluation),
        ("evaluator semantics", evaluator),
        ("nondep supertype property", nondep_supertype),
        ("desugaring round trips", desugaring),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(()) => println!("criterion {}: PASS ({name})", i + 1),
            Err(e) => {
                println!("criterion {}: FAIL ({name})\n{e}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
