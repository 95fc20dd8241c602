use minimod::eval::{eval_program, ModValue, RunResult, Value};
use minimod::syntax::{parse_program, Program};

fn parse(src: &str) -> Program {
    parse_program(src).unwrap_or_else(|e| panic!("{e}"))
}

fn run(program: &Program) -> (RunResult<'_>, String) {
    let mut out = Vec::new();
    let result = eval_program(program, &mut out);
    (result, String::from_utf8(out).unwrap())
}

fn value<'a>(r: &RunResult<'a>, name: &str) -> Value<'a> {
    r.exports.values.get(name).unwrap_or_else(|| panic!("no value {name}")).clone()
}

#[test]
fn arithmetic() {
    let p = parse("let x = 1 + 2");
    let (r, _) = run(&p);
    assert!(matches!(value(&r, "x"), Value::Int(3)));
    assert!(r.uncaught.is_none());
}

#[test]
fn assert_false_is_uncaught() {
    let p = parse("let _ = assert false");
    let (r, _) = run(&p);
    assert_eq!(r.uncaught.expect("uncaught").exception, "Assert_failure");
}

#[test]
fn match_failure() {
    let p = parse("let x = match 3 with 1 -> 0");
    let (r, _) = run(&p);
    assert_eq!(r.uncaught.expect("uncaught").exception, "Match_failure");
}

#[test]
fn exception_declarations_are_generative() {
    let p = parse(
        "module F (X : sig end) = struct exception E let raise_e () = raise E end
         module A = F(struct end)
         module B = F(struct end)
         let r = try B.raise_e (); 0 with A.E -> 1 | B.E -> 2",
    );
    let (r, _) = run(&p);
    assert!(matches!(value(&r, "r"), Value::Int(2)));
}

#[test]
fn hidden_exceptions_are_generative() {
    let p = parse(
        "let f = let open struct exception E end in fun () -> raise E
         let g = let open struct exception E end in fun x -> x
         exception E
         let r = try f (); 0 with E -> 1 | _ -> 2",
    );
    let (r, _) = run(&p);
    assert!(matches!(value(&r, "r"), Value::Int(2)));
}

#[test]
fn open_body_runs_once() {
    let p = parse(&std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/corpus/t14_open_once.mml")).unwrap());
    let (r, out) = run(&p);
    assert_eq!(out, "x");
    assert_eq!(r.effects, 1);
    assert!(matches!(value(&r, "c"), Value::Int(4)));
    assert!(!r.exports.values.contains_key("a"));
}

#[test]
fn counter_example() {
    let p = parse(&std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/corpus/t12_counter.mml")).unwrap());
    let (r, out) = run(&p);
    assert!(matches!(value(&r, "n"), Value::Int(1)));
    assert_eq!(out, "1");
    assert!(!r.exports.values.contains_key("counter"));
    assert!(!r.exports.values.contains_key("inc"));
}

#[test]
fn interrupt_example() {
    let p = parse(&std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/corpus/t13_interrupt.mml")).unwrap());
    let (r, _) = run(&p);
    assert_eq!(value(&r, "r").to_string(), "Error \"failed\"");
    assert!(!r.exports.ctors.contains_key("Interrupt"));
}

#[test]
fn signatures_have_no_effects() {
    let p = parse("module type S = sig open struct let _ = print \"no\" let _ = assert false end end");
    let (r, out) = run(&p);
    assert_eq!(r.effects, 0);
    assert_eq!(out, "");
    assert!(r.uncaught.is_none());
}

#[test]
fn functor_type_paths_have_no_effects() {
    let p = parse(
        "module F (X : sig end) = struct let _ = print \"no\" type t = int end
         module L = struct end
         let f (x : F(L).t) = x",
    );
    let (r, out) = run(&p);
    assert_eq!(r.effects, 0);
    assert_eq!(out, "");
}

#[test]
fn functors_apply() {
    let p = parse(
        "module F (X : sig val x : int end) = struct let y = X.x * 2 end
         module A = F(struct let x = 21 end)",
    );
    let (r, _) = run(&p);
    let Some(ModValue::Struct(a)) = r.exports.modules.get("A") else { panic!("A") };
    assert!(matches!(a.values.get("y"), Some(Value::Int(42))));
}

#[test]
fn ascription_restricts_fields() {
    let p = parse("module M = (struct let x = 1 let y = 2 end : sig val x : int end)");
    let (r, _) = run(&p);
    let Some(ModValue::Struct(m)) = r.exports.modules.get("M") else { panic!("M") };
    assert!(m.values.contains_key("x"));
    assert!(!m.values.contains_key("y"));
}

#[test]
fn effects_stop_at_uncaught_exception() {
    let p = parse("let _ = print \"a\" let _ = raise (Failure \"boom\") let _ = print \"b\"");
    let (r, out) = run(&p);
    assert_eq!(out, "a");
    assert_eq!(r.uncaught.expect("uncaught").exception, "Failure \"boom\"");
}
