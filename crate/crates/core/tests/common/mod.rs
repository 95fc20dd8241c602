#![allow(dead_code)]

pub mod planted;

use std::path::{Path, PathBuf};

use minimod::cli::run_cli;
use minimod::core_typing::builtins::initial_env;
use minimod::mod_typing::{check_program, type_signature};
use minimod::printer::{print_signature, PrintMode};
use minimod::semobj::{match_modtype, ModType, Session, SigItem};
use minimod::syntax::{parse_program, parse_signature, Program};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

/// Every `.mml` file of the corpus, sorted by name.
pub fn corpus_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "mml"))
        .collect();
    files.sort();
    files
}

pub fn corpus_file(stem: &str) -> PathBuf {
    corpus_dir().join(format!("{stem}.mml"))
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Captured result of one driver invocation.
#[derive(Debug, PartialEq, Eq)]
pub struct Invocation {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn cli(args: &[&str]) -> Invocation {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_cli(args, &mut out, &mut err);
    Invocation {
        code,
        stdout: String::from_utf8(out).expect("utf-8 stdout"),
        stderr: String::from_utf8(err).expect("utf-8 stderr"),
    }
}

/// Runs `command` on a corpus file, passing `--no-color`.
pub fn cli_on(command: &str, path: &Path, extra: &[&str]) -> Invocation {
    let p = path.to_str().expect("utf-8 path");
    let mut args = vec!["--no-color", command, p];
    args.extend_from_slice(extra);
    cli(&args)
}

/// Programs of the corpus that type-check, with their source.
pub fn accepted_corpus() -> Vec<(PathBuf, Program)> {
    corpus_files()
        .into_iter()
        .filter_map(|f| {
            let p = parse_program(&read(&f)).ok()?;
            check_program(&mut Session::new(), &p).ok()?;
            Some((f, p))
        })
        .collect()
}

/// Exported signature of `program` checked in `sess`.
pub fn signature_in(sess: &mut Session, program: &Program) -> Vec<SigItem> {
    check_program(sess, program)
        .unwrap_or_else(|e| panic!("program rejected: {e}"))
        .signature
}

/// Whether two signatures of the same session match in both directions.
pub fn equivalent(sess: &mut Session, a: &[SigItem], b: &[SigItem]) -> Result<(), String> {
    let (ma, mb) = (ModType::Sig(a.to_vec()), ModType::Sig(b.to_vec()));
    match_modtype(sess, &ma, &mb).map_err(|e| format!("forward: {e}"))?;
    match_modtype(sess, &mb, &ma).map_err(|e| format!("backward: {e}"))?;
    Ok(())
}

/// Signatures of two programs agree up to stamps: same plain rendering and
/// mutual matching.
pub fn same_signature(p: &Program, q: &Program) -> Result<(), String> {
    let mut sess = Session::new();
    let a = signature_in(&mut sess, p);
    let b = signature_in(&mut sess, q);
    let pa = print_signature(&sess, &a, PrintMode::Plain).map_err(|e| e.to_string())?;
    let pb = print_signature(&sess, &b, PrintMode::Plain).map_err(|e| e.to_string())?;
    if pa != pb {
        return Err(format!("renderings differ:\n{pa}\n---\n{pb}"));
    }
    equivalent(&mut sess, &a, &b)
}

/// Prints the signature of `program` in alias mode, parses the text back
/// as a signature and checks it against the original in both directions.
pub fn alias_rendering_rechecks(program: &Program) -> Result<String, String> {
    let mut sess = Session::new();
    let sig = signature_in(&mut sess, program);
    let text = print_signature(&sess, &sig, PrintMode::Aliases).map_err(|e| e.to_string())?;
    let specs = parse_signature(&text).map_err(|e| format!("{e} in\n{text}"))?;
    let env = initial_env(&mut sess);
    let reparsed = type_signature(&mut sess, &env, &specs).map_err(|e| format!("{e} in\n{text}"))?;
    equivalent(&mut sess, &sig, &reparsed).map_err(|e| format!("{e} in\n{text}"))?;
    Ok(text)
}
