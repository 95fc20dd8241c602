use crate::core_typing::error::{TypeError, TypeErrorKind};
use crate::syntax::{SourceSpan, SyntaxError};

/// Any error reported by the front end.
#[derive(Clone, Copy, Debug)]
pub enum Diagnostic<'a> {
    Syntax(&'a SyntaxError),
    Type(&'a TypeError),
}

impl<'a> From<&'a SyntaxError> for Diagnostic<'a> {
    fn from(e: &'a SyntaxError) -> Self {
        Diagnostic::Syntax(e)
    }
}

impl<'a> From<&'a TypeError> for Diagnostic<'a> {
    fn from(e: &'a TypeError) -> Self {
        Diagnostic::Type(e)
    }
}

const MESSAGE_INDENT: &str = "       ";

/// Renders `err` against the source text it was reported for:
///
/// ```text
/// File "a.mml", line 1, characters 0-26:
/// 1 | open struct type t = T end
///     ^^^^^^^^^^^^^^^^^^^^^^^^^^
/// Error: The type t/3 introduced by this open appears in the signature
///        Line 2, characters 4-5:
///          The value x has no valid type if t/3 is hidden
/// ```
pub fn render_diagnostic<'a>(err: impl Into<Diagnostic<'a>>, source: &str, color: bool) -> String {
    let (span, message) = match err.into() {
        Diagnostic::Syntax(e) => (e.span().clone(), e.to_string()),
        Diagnostic::Type(e) => (e.span.clone(), type_error_message(e)),
    };
    let mut out = format!("{span}:\n");
    out.push_str(&excerpt(&span, source));
    let label = if color { "\x1b[1mError:\x1b[0m" } else { "Error:" };
    let mut lines = message.lines();
    out.push_str(&format!("{label} {}\n", lines.next().unwrap_or("")));
    for l in lines {
        out.push_str(&format!("{MESSAGE_INDENT}{l}\n"));
    }
    out
}

fn type_error_message(e: &TypeError) -> String {
    let TypeErrorKind::Elimination(el) = &e.kind else {
        return e.to_string();
    };
    let mut msg = el.headline();
    for v in &el.victims {
        if let Some(s) = &v.span {
            msg.push_str(&format!("\nLine {}, characters {}-{}:", s.start_line, s.start_col, s.end_col));
        }
        msg.push_str(&format!(
            "\n  The {} {} has no valid type if {} is hidden",
            v.kind.word(),
            v.name,
            v.blocking.with_stamp()
        ));
    }
    msg
}

/// The first line of `span`, numbered and underlined with carets.
fn excerpt(span: &SourceSpan, source: &str) -> String {
    let Some(line) = source.lines().nth(span.start_line.saturating_sub(1)) else {
        return String::new();
    };
    let gutter = format!("{} | ", span.start_line);
    let start = span.start_col.min(line.len());
    let end = if span.end_line == span.start_line {
        span.end_col.min(line.len())
    } else {
        line.len()
    };
    let width = end.saturating_sub(start).max(1);
    format!(
        "{gutter}{line}\n{}{}\n",
        " ".repeat(gutter.len() + start),
        "^".repeat(width)
    )
}
