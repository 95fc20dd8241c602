mod common;

use proptest::prelude::*;

use common::planted::{check_planted, planted};
use common::*;
use minimod::core_typing::error::TypeErrorKind;
use minimod::mod_typing::check_program;
use minimod::nondep::HiddenOrigin;
use minimod::semobj::{ItemKind, Session};
use minimod::syntax::parse_program;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn planted_hidden_module(p in planted()) {
        check_planted(&p)?;
    }
}

#[test]
fn open_of_variant_reports_exactly_one_victim() {
    let src = read(&corpus_file("t03_elim_error"));
    let p = parse_program(&src).unwrap();
    let err = check_program(&mut Session::new(), &p).unwrap_err();
    let TypeErrorKind::Elimination(e) = err.kind else { panic!("{err}") };
    assert_eq!(e.origin, HiddenOrigin::Open);
    let victims: Vec<_> = e
        .victims
        .iter()
        .map(|v| (v.kind, v.name.as_str(), v.span.as_ref().map(|s| s.start_line)))
        .collect();
    assert_eq!(victims, [(ItemKind::Value, "x", Some(2))]);
    assert_eq!(e.victims[0].blocking.name, "t");
}

#[test]
fn generator_covers_both_outcomes() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let mut runner = TestRunner::deterministic();
    let (mut accepted, mut rejected, mut dropped) = (0, 0, 0);
    for _ in 0..200 {
        let p = planted().new_tree(&mut runner).unwrap().current();
        if p.expect_accepted() {
            accepted += 1;
            dropped += p.expect_manifest().iter().zip(&p.after).filter(|(k, d)| !**k && matches!(d, common::planted::Decl::Alias(_))).count();
        } else {
            rejected += 1;
        }
    }
    assert!(accepted >= 20 && rejected >= 20 && dropped >= 5, "{accepted} {rejected} {dropped}");
}
