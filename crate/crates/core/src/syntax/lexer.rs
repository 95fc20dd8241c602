use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::SourceSpan;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    UIdent(String),
    TyVar(String),
    Int(i64),
    Str(String),

    Open,
    Include,
    Struct,
    Sig,
    End,
    Module,
    Type,
    Let,
    Rec,
    And,
    In,
    Nonrec,
    Functor,
    Exception,
    Local,
    Private,
    Val,
    With,
    Of,
    Match,
    Try,
    Raise,
    Assert,
    Fun,
    If,
    Then,
    Else,
    True,
    False,
    Begin,

    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    ColonEq,
    Eq,
    Arrow,
    Bar,
    Star,
    Plus,
    Minus,
    Lt,
    Bang,
    Dot,
    Underscore,
}

impl Tok {
    fn keyword(word: &str) -> Option<Tok> {
        Some(match word {
            "open" => Tok::Open,
            "include" => Tok::Include,
            "struct" => Tok::Struct,
            "sig" => Tok::Sig,
            "end" => Tok::End,
            "module" => Tok::Module,
            "type" => Tok::Type,
            "let" => Tok::Let,
            "rec" => Tok::Rec,
            "and" => Tok::And,
            "in" => Tok::In,
            "nonrec" => Tok::Nonrec,
            "functor" => Tok::Functor,
            "exception" => Tok::Exception,
            "local" => Tok::Local,
            "private" => Tok::Private,
            "val" => Tok::Val,
            "with" => Tok::With,
            "of" => Tok::Of,
            "match" => Tok::Match,
            "try" => Tok::Try,
            "raise" => Tok::Raise,
            "assert" => Tok::Assert,
            "fun" => Tok::Fun,
            "if" => Tok::If,
            "then" => Tok::Then,
            "else" => Tok::Else,
            "true" => Tok::True,
            "false" => Tok::False,
            "begin" => Tok::Begin,
            _ => return None,
        })
    }

    pub fn is_keyword(word: &str) -> bool {
        Tok::keyword(word).is_some()
    }

    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(_) => "identifier".into(),
            Tok::UIdent(_) => "capitalized identifier".into(),
            Tok::TyVar(_) => "type variable".into(),
            Tok::Int(_) => "integer".into(),
            Tok::Str(_) => "string".into(),
            other => format!("'{other}'"),
        }
    }
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) | Tok::UIdent(s) => return f.write_str(s),
            Tok::TyVar(s) => return write!(f, "'{s}"),
            Tok::Int(n) => return write!(f, "{n}"),
            Tok::Str(s) => return write!(f, "{s:?}"),
            Tok::Open => "open",
            Tok::Include => "include",
            Tok::Struct => "struct",
            Tok::Sig => "sig",
            Tok::End => "end",
            Tok::Module => "module",
            Tok::Type => "type",
            Tok::Let => "let",
            Tok::Rec => "rec",
            Tok::And => "and",
            Tok::In => "in",
            Tok::Nonrec => "nonrec",
            Tok::Functor => "functor",
            Tok::Exception => "exception",
            Tok::Local => "local",
            Tok::Private => "private",
            Tok::Val => "val",
            Tok::With => "with",
            Tok::Of => "of",
            Tok::Match => "match",
            Tok::Try => "try",
            Tok::Raise => "raise",
            Tok::Assert => "assert",
            Tok::Fun => "fun",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Begin => "begin",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::ColonEq => ":=",
            Tok::Eq => "=",
            Tok::Arrow => "->",
            Tok::Bar => "|",
            Tok::Star => "*",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Lt => "<",
            Tok::Bang => "!",
            Tok::Dot => ".",
            Tok::Underscore => "_",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{message}")]
pub struct LexError {
    pub message: String,
    pub span: SourceSpan,
}

struct Lexer {
    file: Arc<str>,
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 0;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self) -> (usize, usize) {
        (self.line, self.col)
    }

    fn span_from(&self, start: (usize, usize)) -> SourceSpan {
        SourceSpan::new(self.file.clone(), start, self.here())
    }

    fn error(&self, start: (usize, usize), message: impl Into<String>) -> LexError {
        LexError {
            message: message.into(),
            span: self.span_from(start),
        }
    }

    fn skip_comment(&mut self, start: (usize, usize)) -> Result<(), LexError> {
        // positioned after the opening "(*"
        let mut depth = 1;
        while depth > 0 {
            match self.bump() {
                None => return Err(self.error(start, "unterminated comment")),
                Some('(') if self.peek() == Some('*') => {
                    self.bump();
                    depth += 1;
                }
                Some('*') if self.peek() == Some(')') => {
                    self.bump();
                    depth -= 1;
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    fn string(&mut self, start: (usize, usize)) -> Result<Tok, LexError> {
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error(start, "unterminated string literal")),
                Some('"') => return Ok(Tok::Str(out)),
                Some('\\') => match self.bump() {
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some('\\') => out.push('\\'),
                    Some('"') => out.push('"'),
                    Some(c) => return Err(self.error(start, format!("illegal escape '\\{c}'"))),
                    None => return Err(self.error(start, "unterminated string literal")),
                },
                Some(c) => out.push(c),
            }
        }
    }

    fn word(&mut self) -> String {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                out.push(c);
                self.bump();
            } else {
                break;
            }
        }
        out
    }

    fn next_token(&mut self) -> Result<Option<Token>, LexError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('(') if self.peek2() == Some('*') => {
                    let start = self.here();
                    self.bump();
                    self.bump();
                    self.skip_comment(start)?;
                }
                _ => break,
            }
        }
        let start = self.here();
        let Some(c) = self.bump() else {
            return Ok(None);
        };
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            ':' if self.peek() == Some('=') => {
                self.bump();
                Tok::ColonEq
            }
            ':' => Tok::Colon,
            '=' => Tok::Eq,
            '-' if self.peek() == Some('>') => {
                self.bump();
                Tok::Arrow
            }
            '-' => Tok::Minus,
            '|' => Tok::Bar,
            '*' => Tok::Star,
            '+' => Tok::Plus,
            '<' => Tok::Lt,
            '!' => Tok::Bang,
            '.' => Tok::Dot,
            '"' => self.string(start)?,
            '\'' => match self.peek() {
                Some(c) if c.is_ascii_lowercase() || c == '_' => Tok::TyVar(self.word()),
                _ => return Err(self.error(start, "illegal character '''")),
            },
            c if c.is_ascii_digit() => {
                let mut digits = c.to_string();
                while let Some(d) = self.peek().filter(char::is_ascii_digit) {
                    digits.push(d);
                    self.bump();
                }
                let n = digits
                    .parse::<i64>()
                    .map_err(|_| self.error(start, "integer literal out of range"))?;
                Tok::Int(n)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut w = c.to_string();
                w.push_str(&self.word());
                if w == "_" {
                    Tok::Underscore
                } else if let Some(k) = Tok::keyword(&w) {
                    k
                } else if c.is_ascii_uppercase() {
                    Tok::UIdent(w)
                } else {
                    Tok::Ident(w)
                }
            }
            c => return Err(self.error(start, format!("illegal character '{c}'"))),
        };
        Ok(Some(Token {
            tok,
            span: self.span_from(start),
        }))
    }
}

/// Splits `source` into tokens. No end-of-input token is produced.
pub fn tokenize(file: &str, source: &str) -> Result<Vec<Token>, LexError> {
    let mut lexer = Lexer {
        file: Arc::from(file),
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        col: 0,
    };
    let mut out = Vec::new();
    while let Some(t) = lexer.next_token()? {
        out.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize("t.mml", s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn empty_input() {
        assert!(toks("").is_empty());
        assert!(toks("  (* c (* nested *) *) ").is_empty());
    }

    #[test]
    fn open_struct_tokens() {
        assert_eq!(
            toks("open struct let x = 3 end"),
            vec![
                Tok::Open,
                Tok::Struct,
                Tok::Let,
                Tok::Ident("x".into()),
                Tok::Eq,
                Tok::Int(3),
                Tok::End
            ]
        );
    }

    #[test]
    fn colon_eq_is_one_token() {
        assert_eq!(
            toks("type t := int"),
            vec![
                Tok::Type,
                Tok::Ident("t".into()),
                Tok::ColonEq,
                Tok::Ident("int".into())
            ]
        );
    }

    #[test]
    fn primes_and_tyvars() {
        assert_eq!(
            toks("'a t'"),
            vec![Tok::TyVar("a".into()), Tok::Ident("t'".into())]
        );
    }

    #[test]
    fn errors_carry_spans() {
        let e = tokenize("f", "let x = #").unwrap_err();
        assert_eq!((e.span.start_line, e.span.start_col), (1, 8));
        let e = tokenize("f", "\"abc").unwrap_err();
        assert!(e.message.contains("unterminated"));
        assert_eq!(e.span.start_col, 0);
        assert_eq!(e.span.end_col, 4);
    }

    #[test]
    fn spans_are_positions() {
        let t = tokenize("f", "let\n  x").unwrap();
        assert_eq!((t[1].span.start_line, t[1].span.start_col), (2, 2));
    }
}
