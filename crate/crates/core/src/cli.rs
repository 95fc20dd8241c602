//! The `minimod` command-line driver.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::desugar::{expand_local, expand_private, introduce_local, print_source};
use crate::eval::eval_program;
use crate::mod_typing::{check_program, TypedProgram};
use crate::printer::{print_signature, render_diagnostic, PrintMode};
use crate::semobj::Session;
use crate::syntax::{parse_program_named, Program};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TYPE_ERROR: i32 = 1;
pub const EXIT_PARSE_ERROR: i32 = 2;
pub const EXIT_RUNTIME_ERROR: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "minimod", about = "Type-check, infer, run and desugar MiniMod programs")]
struct Cli {
    /// Print diagnostics without ANSI escapes.
    #[arg(long, global = true)]
    no_color: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Type-check a program.
    Check { file: PathBuf },
    /// Print the signature of a program.
    Infer {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "aliases")]
        print_mode: ModeArg,
    },
    /// Type-check and evaluate a program.
    Run { file: PathBuf },
    /// Print a program with one construct translated away.
    Desugar {
        file: PathBuf,
        #[arg(long, value_enum)]
        eliminate: Construct,
    },
    /// Print the program with extended opens bound to hidden modules.
    Elaborate { file: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Plain,
    Stamps,
    Aliases,
}

impl From<ModeArg> for PrintMode {
    fn from(m: ModeArg) -> PrintMode {
        match m {
            ModeArg::Plain => PrintMode::Plain,
            ModeArg::Stamps => PrintMode::Stamps,
            ModeArg::Aliases => PrintMode::Aliases,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Construct {
    Local,
    Private,
    Open,
}

struct Driver<'o> {
    out: &'o mut dyn Write,
    err: &'o mut dyn Write,
    color: bool,
}

/// Runs the driver on `args` (without the program name) and returns the
/// process exit code.
pub fn run_cli<S: AsRef<str>>(args: &[S], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let argv = std::iter::once("minimod").chain(args.iter().map(|a| a.as_ref()));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let mut driver = Driver {
        out,
        err,
        color: !cli.no_color,
    };
    driver.dispatch(cli.command)
}

impl Driver<'_> {
    fn dispatch(&mut self, command: Command) -> i32 {
        let file = match &command {
            Command::Check { file }
            | Command::Infer { file, .. }
            | Command::Run { file }
            | Command::Desugar { file, .. }
            | Command::Elaborate { file } => file.clone(),
        };
        let source = match std::fs::read_to_string(&file) {
            Ok(s) => s,
            Err(e) => {
                let _ = writeln!(self.err, "minimod: cannot read {}: {e}", file.display());
                return EXIT_USAGE;
            }
        };
        let name = file.display().to_string();
        let program = match parse_program_named(&name, &source) {
            Ok(p) => p,
            Err(e) => {
                let _ = write!(self.err, "{}", render_diagnostic(&e, &source, self.color));
                return EXIT_PARSE_ERROR;
            }
        };
        match command {
            Command::Desugar { eliminate, .. } => {
                let items = match eliminate {
                    Construct::Local => expand_local(&program.items),
                    Construct::Private => expand_private(&program.items),
                    Construct::Open => introduce_local(&program.items),
                };
                let _ = write!(self.out, "{}", print_source(&Program { items }));
                EXIT_OK
            }
            Command::Check { .. } => match self.check(&program, &source) {
                Ok(_) => EXIT_OK,
                Err(code) => code,
            },
            Command::Infer { print_mode, .. } => {
                let mut sess = Session::new();
                let typed = match check_program(&mut sess, &program) {
                    Ok(t) => t,
                    Err(e) => {
                        let _ = write!(self.err, "{}", render_diagnostic(&e, &source, self.color));
                        return EXIT_TYPE_ERROR;
                    }
                };
                match print_signature(&sess, &typed.signature, print_mode.into()) {
                    Ok(text) if text.is_empty() => {}
                    Ok(text) => {
                        let _ = writeln!(self.out, "{text}");
                    }
                    Err(e) => {
                        let _ = writeln!(self.err, "minimod: internal error: {e}");
                        return EXIT_TYPE_ERROR;
                    }
                }
                EXIT_OK
            }
            Command::Elaborate { .. } => match self.check(&program, &source) {
                Ok(typed) => {
                    let _ = write!(self.out, "{}", print_source(&typed.elaborated));
                    EXIT_OK
                }
                Err(code) => code,
            },
            Command::Run { .. } => {
                let typed = match self.check(&program, &source) {
                    Ok(t) => t,
                    Err(code) => return code,
                };
                let result = eval_program(&typed.elaborated, &mut *self.out);
                let _ = self.out.flush();
                match result.uncaught {
                    None => EXIT_OK,
                    Some(exn) => {
                        let _ = writeln!(self.err, "{}:\n{exn}", exn.span);
                        EXIT_RUNTIME_ERROR
                    }
                }
            }
        }
    }

    fn check(&mut self, program: &Program, source: &str) -> Result<TypedProgram, i32> {
        let mut sess = Session::new();
        check_program(&mut sess, program).map_err(|e| {
            let _ = write!(self.err, "{}", render_diagnostic(&e, source, self.color));
            EXIT_TYPE_ERROR
        })
    }
}
