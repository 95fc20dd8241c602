//! Surface syntax: spans, tokens, the abstract syntax tree and the parser.

pub mod ast;
pub mod lexer;
pub mod parser;

use std::fmt;
use std::sync::Arc;

pub use ast::*;
pub use lexer::{tokenize, LexError, Tok, Token};
pub use parser::{parse_program, parse_program_named, parse_signature, ParseError, SyntaxError};

/// A region of source text. Lines are 1-based, columns 0-based.
///
/// Spans always compare equal so that derived equality on the syntax tree
/// is structural equality "modulo spans".
#[derive(Clone, Debug, Default)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
}

impl PartialEq for SourceSpan {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for SourceSpan {}

impl SourceSpan {
    pub fn new(file: Arc<str>, start: (usize, usize), end: (usize, usize)) -> SourceSpan {
        SourceSpan {
            file,
            start_line: start.0,
            start_col: start.1,
            end_line: end.0,
            end_col: end.1,
        }
    }

    /// Smallest span covering both `self` and `other`.
    pub fn to(&self, other: &SourceSpan) -> SourceSpan {
        SourceSpan {
            file: self.file.clone(),
            start_line: self.start_line,
            start_col: self.start_col,
            end_line: other.end_line,
            end_col: other.end_col,
        }
    }

    pub fn same_position(&self, other: &SourceSpan) -> bool {
        (self.start_line, self.start_col, self.end_line, self.end_col)
            == (other.start_line, other.start_col, other.end_line, other.end_col)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.start_line == self.end_line {
            write!(
                f,
                "File \"{}\", line {}, characters {}-{}",
                self.file, self.start_line, self.start_col, self.end_col
            )
        } else {
            write!(
                f,
                "File \"{}\", lines {}-{}, characters {}-{}",
                self.file, self.start_line, self.end_line, self.start_col, self.end_col
            )
        }
    }
}
