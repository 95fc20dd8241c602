//! Snapshot tests: `infer` and `run` on every corpus program.
//!
//! Regenerate with `UPDATE_GOLDENS=1 cargo test --test golden`, then review
//! the diff by hand.

mod common;

use std::path::Path;

use common::*;

fn transcript(path: &Path) -> String {
    let dir = format!("{}/", corpus_dir().display());
    let mut out = String::new();
    for (command, extra) in [("infer", &[][..]), ("run", &[][..])] {
        let inv = cli_on(command, path, extra);
        out.push_str(&format!("$ minimod {command} [exit {}]\n", inv.code));
        out.push_str("--- stdout\n");
        out.push_str(&inv.stdout);
        if !inv.stdout.is_empty() && !inv.stdout.ends_with('\n') {
            out.push_str("\n[no newline]\n");
        }
        out.push_str("--- stderr\n");
        out.push_str(&inv.stderr.replace(&dir, ""));
    }
    out
}

#[test]
fn corpus_matches_goldens() {
    let update = std::env::var_os("UPDATE_GOLDENS").is_some();
    let mut failures = Vec::new();
    for file in corpus_files() {
        let actual = transcript(&file);
        let golden = file.with_extension("golden");
        if update {
            std::fs::write(&golden, &actual).expect("write golden");
            continue;
        }
        let expected = std::fs::read_to_string(&golden).unwrap_or_default();
        if actual != expected {
            failures.push(format!(
                "{}\n--- expected\n{expected}--- actual\n{actual}",
                file.display()
            ));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn corpus_is_large_enough() {
    assert!(corpus_files().len() >= 12);
}
