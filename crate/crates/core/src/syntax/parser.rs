//! Recursive-descent parser.
//!
//! Layout: items are keyword-delimited, with one exception. An application
//! argument (or a postfix type constructor) that starts a new line at or
//! left of the column of the enclosing item begins a new item instead of
//! continuing the expression. This is what lets a bare expression follow a
//! `let` without a `;;` separator.
//!
//! Expression precedence, loosest first: `;`, `let`/`match`/`fun`/`if`/`try`,
//! `:=` (right), `,`, `=` `<` (left), `+` `-` (left), `*` (left),
//! application and `raise`/`assert`, prefix `!`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::ast::*;
use super::lexer::{tokenize, LexError, Tok, Token};
use super::SourceSpan;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub expected: Vec<String>,
    pub span: SourceSpan,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Syntax error")
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("{0}")]
    Lex(#[from] LexError),
    #[error("{0}")]
    Parse(#[from] ParseError),
}

impl SyntaxError {
    pub fn span(&self) -> &SourceSpan {
        match self {
            SyntaxError::Lex(e) => &e.span,
            SyntaxError::Parse(e) => &e.span,
        }
    }

    /// Extra line describing the problem, if any.
    pub fn detail(&self) -> String {
        match self {
            SyntaxError::Lex(e) => e.message.clone(),
            SyntaxError::Parse(e) if !e.message.is_empty() => e.message.clone(),
            SyntaxError::Parse(e) => format!("expected {}", e.expected.join(" or ")),
        }
    }
}

type PResult<T> = Result<T, ParseError>;

/// Parses a whole program. Diagnostics name the file `file`.
pub fn parse_program_named(file: &str, source: &str) -> Result<Program, SyntaxError> {
    let mut p = Parser::new(file, source)?;
    let items = p.struct_items(false)?;
    p.expect_eof()?;
    Ok(Program { items })
}

pub fn parse_program(source: &str) -> Result<Program, SyntaxError> {
    parse_program_named("input.mml", source)
}

/// Parses a sequence of signature items (the body of a `sig ... end`).
pub fn parse_signature(source: &str) -> Result<Vec<SpecItem>, SyntaxError> {
    let mut p = Parser::new("signature.mml", source)?;
    let items = p.spec_items(false)?;
    p.expect_eof()?;
    Ok(items)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof: SourceSpan,
    item_col: usize,
}

fn end_of_input(file: &str, source: &str) -> SourceSpan {
    let mut line = 1;
    let mut col = 0;
    for c in source.chars() {
        if c == '\n' {
            line += 1;
            col = 0;
        } else {
            col += 1;
        }
    }
    SourceSpan::new(Arc::from(file), (line, col), (line, col))
}

impl Parser {
    fn new(file: &str, source: &str) -> Result<Parser, LexError> {
        Ok(Parser {
            toks: tokenize(file, source)?,
            pos: 0,
            eof: end_of_input(file, source),
            item_col: 0,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, n: usize) -> Option<&Tok> {
        self.toks.get(self.pos + n).map(|t| &t.tok)
    }

    fn at(&self, tok: &Tok) -> bool {
        self.peek() == Some(tok)
    }

    fn span(&self) -> SourceSpan {
        self.toks
            .get(self.pos)
            .map(|t| t.span.clone())
            .unwrap_or_else(|| self.eof.clone())
    }

    fn prev_span(&self) -> SourceSpan {
        if self.pos == 0 {
            self.eof.clone()
        } else {
            self.toks[self.pos - 1].span.clone()
        }
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        self.pos += 1;
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            message: String::new(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            span: self.span(),
        }
    }

    fn error_msg(&self, span: SourceSpan, message: impl Into<String>) -> ParseError {
        ParseError {
            message: message.into(),
            expected: Vec::new(),
            span,
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<SourceSpan> {
        if self.at(&tok) {
            Ok(self.bump().span)
        } else {
            Err(self.error(&[&tok.describe()]))
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.error(&["end of input"])),
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn uident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::UIdent(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(&["capitalized identifier"])),
        }
    }

    /// True when the next token begins a new line at or left of the current
    /// item's column.
    fn layout_break(&self) -> bool {
        if self.pos == 0 || self.pos >= self.toks.len() {
            return false;
        }
        let next = &self.toks[self.pos].span;
        let prev = &self.toks[self.pos - 1].span;
        next.start_line > prev.end_line && next.start_col <= self.item_col
    }

    // ----------------------------------------------------------------
    // Structure items

    fn struct_items(&mut self, stop_at_in: bool) -> PResult<Vec<StructItem>> {
        let mut items = Vec::new();
        loop {
            match self.peek() {
                None | Some(Tok::End) => break,
                Some(Tok::In) if stop_at_in => break,
                _ => items.push(self.struct_item(stop_at_in)?),
            }
        }
        Ok(items)
    }

    fn struct_item(&mut self, stop_at_in: bool) -> PResult<StructItem> {
        let saved = self.item_col;
        self.item_col = self.span().start_col;
        let r = self.struct_item_inner(stop_at_in);
        self.item_col = saved;
        r
    }

    fn struct_item_inner(&mut self, stop_at_in: bool) -> PResult<StructItem> {
        let start = self.span();
        let kind = match self.peek() {
            Some(Tok::Let)
                if !matches!(
                    self.peek_at(1),
                    Some(Tok::Module) | Some(Tok::Exception) | Some(Tok::Open)
                ) =>
            {
                self.bump();
                let rec_flag = self.eat(&Tok::Rec);
                let bindings = self.bindings()?;
                if self.at(&Tok::In) && !stop_at_in {
                    self.bump();
                    let body = self.expr()?;
                    let span = start.to(&self.prev_span());
                    StructItemKind::Expr(Expr {
                        kind: ExprKind::LetIn {
                            rec_flag,
                            bindings,
                            body: Box::new(body),
                        },
                        span,
                    })
                } else {
                    StructItemKind::Let { rec_flag, bindings }
                }
            }
            Some(Tok::Type) => {
                self.bump();
                let nonrec = self.eat(&Tok::Nonrec);
                let mut defs = vec![self.type_def()?];
                while self.eat(&Tok::And) {
                    self.eat(&Tok::Type);
                    defs.push(self.type_def()?);
                }
                StructItemKind::Type { nonrec, defs }
            }
            Some(Tok::Module) if self.peek_at(1) == Some(&Tok::Type) => {
                self.bump();
                self.bump();
                let name = self.uident()?;
                self.expect(Tok::Eq)?;
                let mty = self.mod_type()?;
                StructItemKind::ModType { name, mty }
            }
            Some(Tok::Module) => {
                self.bump();
                let name = self.uident()?;
                let params = self.functor_params()?;
                let constraint = if self.eat(&Tok::Colon) {
                    Some(self.mod_type()?)
                } else {
                    None
                };
                self.expect(Tok::Eq)?;
                let mut body = self.mod_expr()?;
                if let Some(mty) = constraint {
                    let span = body.span.clone();
                    body = ModExpr {
                        kind: ModExprKind::Ascribe(Box::new(body), Box::new(mty)),
                        span,
                    };
                }
                StructItemKind::Module { name, params, body }
            }
            Some(Tok::Exception) => {
                self.bump();
                let name = self.uident()?;
                let arg = self.exception_arg()?;
                StructItemKind::Exception { name, arg }
            }
            Some(Tok::Open) => {
                self.bump();
                StructItemKind::Open(self.mod_expr()?)
            }
            Some(Tok::Include) => {
                self.bump();
                StructItemKind::Include(self.mod_expr()?)
            }
            Some(Tok::Local) => {
                self.bump();
                let first = self.struct_items(true)?;
                self.expect(Tok::In)?;
                let second = self.struct_items(false)?;
                self.expect(Tok::End)?;
                StructItemKind::Local(first, second)
            }
            Some(Tok::Private) => {
                self.bump();
                let item = self.struct_item(stop_at_in)?;
                StructItemKind::Private(Box::new(item))
            }
            Some(t) if starts_expr(t) => StructItemKind::Expr(self.expr()?),
            _ => return Err(self.error(&["structure item"])),
        };
        Ok(StructItem {
            kind,
            span: start.to(&self.prev_span()),
        })
    }

    fn exception_arg(&mut self) -> PResult<Option<TypeExpr>> {
        if self.eat(&Tok::Of) {
            Ok(Some(self.type_expr()?))
        } else {
            Ok(None)
        }
    }

    fn functor_params(&mut self) -> PResult<Vec<FunctorParam>> {
        let mut params = Vec::new();
        while self.at(&Tok::LParen) {
            self.bump();
            let name = self.uident()?;
            self.expect(Tok::Colon)?;
            let mty = self.mod_type()?;
            self.expect(Tok::RParen)?;
            params.push(FunctorParam { name, mty });
        }
        Ok(params)
    }

    fn bindings(&mut self) -> PResult<Vec<Binding>> {
        let mut out = vec![self.binding()?];
        while self.eat(&Tok::And) {
            out.push(self.binding()?);
        }
        Ok(out)
    }

    fn binding(&mut self) -> PResult<Binding> {
        let start = self.span();
        let mut pat = self.pattern_atom()?;
        let mut params = Vec::new();
        if matches!(pat.kind, PatternKind::Var(_)) {
            if self.at(&Tok::Comma) {
                let mut parts = vec![pat];
                while self.eat(&Tok::Comma) {
                    parts.push(self.pattern_atom()?);
                }
                pat = Pattern {
                    kind: PatternKind::Tuple(parts),
                    span: start.to(&self.prev_span()),
                };
            } else {
                while !self.at(&Tok::Eq) && self.peek().is_some_and(starts_pattern_atom) {
                    params.push(self.pattern_atom()?);
                }
            }
        }
        check_shallow(&pat).map_err(|sp| self.error_msg(sp, "nested patterns are not supported"))?;
        self.expect(Tok::Eq)?;
        let body = self.expr()?;
        Ok(Binding {
            pat,
            params,
            body,
            span: start.to(&self.prev_span()),
        })
    }

    fn type_params(&mut self) -> PResult<Vec<String>> {
        match self.peek() {
            Some(Tok::TyVar(v)) => {
                let v = v.clone();
                self.bump();
                Ok(vec![v])
            }
            Some(Tok::LParen) if matches!(self.peek_at(1), Some(Tok::TyVar(_))) => {
                self.bump();
                let mut out = Vec::new();
                loop {
                    match self.peek() {
                        Some(Tok::TyVar(v)) => {
                            out.push(v.clone());
                            self.bump();
                        }
                        _ => return Err(self.error(&["type variable"])),
                    }
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
                Ok(out)
            }
            _ => Ok(Vec::new()),
        }
    }

    fn type_def(&mut self) -> PResult<TypeDef> {
        let params = self.type_params()?;
        let span = self.span();
        let name = self.ident()?;
        let repr = if self.eat(&Tok::Eq) {
            self.type_repr()?
        } else {
            TypeRepr::Abstract
        };
        Ok(TypeDef {
            params,
            name,
            repr,
            span,
        })
    }

    fn type_repr(&mut self) -> PResult<TypeRepr> {
        let variant_start = match self.peek() {
            Some(Tok::Bar) => true,
            Some(Tok::UIdent(_)) => !matches!(self.peek_at(1), Some(Tok::Dot) | Some(Tok::LParen)),
            _ => false,
        };
        if variant_start {
            return Ok(TypeRepr::Variant {
                manifest: None,
                ctors: self.ctor_decls()?,
            });
        }
        let ty = self.type_expr()?;
        if self.eat(&Tok::Eq) {
            Ok(TypeRepr::Variant {
                manifest: Some(ty),
                ctors: self.ctor_decls()?,
            })
        } else {
            Ok(TypeRepr::Manifest(ty))
        }
    }

    fn ctor_decls(&mut self) -> PResult<Vec<CtorDecl>> {
        self.eat(&Tok::Bar);
        let mut out = vec![self.ctor_decl()?];
        while self.eat(&Tok::Bar) {
            out.push(self.ctor_decl()?);
        }
        Ok(out)
    }

    fn ctor_decl(&mut self) -> PResult<CtorDecl> {
        let span = self.span();
        let name = self.uident()?;
        let mut args = Vec::new();
        if self.eat(&Tok::Of) {
            args.push(self.type_app()?);
            while self.eat(&Tok::Star) {
                args.push(self.type_app()?);
            }
        }
        Ok(CtorDecl { name, args, span })
    }

    // ----------------------------------------------------------------
    // Module expressions and module types

    fn mod_expr(&mut self) -> PResult<ModExpr> {
        let start = self.span();
        if self.eat(&Tok::Functor) {
            self.expect(Tok::LParen)?;
            let name = self.uident()?;
            self.expect(Tok::Colon)?;
            let mty = self.mod_type()?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::Arrow)?;
            let body = self.mod_expr()?;
            return Ok(ModExpr {
                kind: ModExprKind::Functor(Box::new(FunctorParam { name, mty }), Box::new(body)),
                span: start.to(&self.prev_span()),
            });
        }
        let mut m = self.mod_expr_atom()?;
        while self.at(&Tok::LParen) && !self.layout_break() {
            self.bump();
            let arg_start = self.span();
            let mut arg = self.mod_expr()?;
            if self.eat(&Tok::Colon) {
                let mty = self.mod_type()?;
                arg = ModExpr {
                    kind: ModExprKind::Ascribe(Box::new(arg), Box::new(mty)),
                    span: arg_start.to(&self.prev_span()),
                };
            }
            self.expect(Tok::RParen)?;
            m = ModExpr {
                kind: ModExprKind::Apply(Box::new(m), Box::new(arg)),
                span: start.to(&self.prev_span()),
            };
        }
        Ok(m)
    }

    fn mod_expr_atom(&mut self) -> PResult<ModExpr> {
        let start = self.span();
        let kind = match self.peek() {
            Some(Tok::UIdent(_)) => {
                let mut path = ModPath::Name(self.uident()?);
                while self.at(&Tok::Dot) && matches!(self.peek_at(1), Some(Tok::UIdent(_))) {
                    self.bump();
                    path = ModPath::Dot(Box::new(path), self.uident()?);
                }
                ModExprKind::Path(path)
            }
            Some(Tok::Struct) => {
                self.bump();
                let items = self.struct_items(false)?;
                self.expect(Tok::End)?;
                ModExprKind::Struct(items)
            }
            Some(Tok::LParen) => {
                self.bump();
                let m = self.mod_expr()?;
                if self.eat(&Tok::Colon) {
                    let mty = self.mod_type()?;
                    self.expect(Tok::RParen)?;
                    ModExprKind::Ascribe(Box::new(m), Box::new(mty))
                } else {
                    self.expect(Tok::RParen)?;
                    return Ok(m);
                }
            }
            _ => return Err(self.error(&["module expression"])),
        };
        Ok(ModExpr {
            kind,
            span: start.to(&self.prev_span()),
        })
    }

    fn mod_type(&mut self) -> PResult<ModTypeExpr> {
        let start = self.span();
        if self.eat(&Tok::Functor) {
            self.expect(Tok::LParen)?;
            let name = self.uident()?;
            self.expect(Tok::Colon)?;
            let mty = self.mod_type()?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::Arrow)?;
            let body = self.mod_type()?;
            return Ok(ModTypeExpr {
                kind: ModTypeKind::Functor(Box::new(FunctorParam { name, mty }), Box::new(body)),
                span: start.to(&self.prev_span()),
            });
        }
        let mut mty = self.mod_type_atom()?;
        while self.at(&Tok::With) {
            self.bump();
            loop {
                self.expect(Tok::Type)?;
                let params = self.type_params()?;
                let name = self.ident()?;
                let mode = if self.eat(&Tok::Eq) {
                    WithMode::Equal
                } else if self.eat(&Tok::ColonEq) {
                    WithMode::Substitute
                } else {
                    return Err(self.error(&["'='", "':='"]));
                };
                let ty = self.type_expr()?;
                mty = ModTypeExpr {
                    kind: ModTypeKind::With(
                        Box::new(mty),
                        WithConstraint {
                            params,
                            name,
                            mode,
                            ty,
                        },
                    ),
                    span: start.to(&self.prev_span()),
                };
                if !self.eat(&Tok::And) {
                    break;
                }
            }
        }
        Ok(mty)
    }

    fn mod_type_atom(&mut self) -> PResult<ModTypeExpr> {
        let start = self.span();
        let kind = match self.peek() {
            Some(Tok::Sig) => {
                self.bump();
                let items = self.spec_items(false)?;
                self.expect(Tok::End)?;
                ModTypeKind::Sig(items)
            }
            Some(Tok::UIdent(_)) => {
                let mut names = vec![self.uident()?];
                while self.at(&Tok::Dot) && matches!(self.peek_at(1), Some(Tok::UIdent(_))) {
                    self.bump();
                    names.push(self.uident()?);
                }
                let name = names.pop().unwrap_or_default();
                ModTypeKind::Path(LongIdent {
                    module: path_of_names(names),
                    name,
                })
            }
            Some(Tok::LParen) => {
                self.bump();
                let m = self.mod_type()?;
                self.expect(Tok::RParen)?;
                return Ok(m);
            }
            _ => return Err(self.error(&["module type"])),
        };
        Ok(ModTypeExpr {
            kind,
            span: start.to(&self.prev_span()),
        })
    }

    fn spec_items(&mut self, stop_at_in: bool) -> PResult<Vec<SpecItem>> {
        let mut items = Vec::new();
        loop {
            match self.peek() {
                None | Some(Tok::End) => break,
                Some(Tok::In) if stop_at_in => break,
                _ => {
                    let saved = self.item_col;
                    self.item_col = self.span().start_col;
                    let item = self.spec_item();
                    self.item_col = saved;
                    items.push(item?);
                }
            }
        }
        Ok(items)
    }

    fn spec_item(&mut self) -> PResult<SpecItem> {
        let start = self.span();
        let kind = match self.peek() {
            Some(Tok::Val) => {
                self.bump();
                let name = self.value_name()?;
                self.expect(Tok::Colon)?;
                let ty = self.type_expr()?;
                SpecItemKind::Val { name, ty }
            }
            Some(Tok::Type) => {
                self.bump();
                let nonrec = self.eat(&Tok::Nonrec);
                let params = self.type_params()?;
                let span = self.span();
                let name = self.ident()?;
                if !nonrec && self.eat(&Tok::ColonEq) {
                    let ty = self.type_expr()?;
                    SpecItemKind::TypeSubst { params, name, ty }
                } else {
                    let repr = if self.eat(&Tok::Eq) {
                        self.type_repr()?
                    } else {
                        TypeRepr::Abstract
                    };
                    let mut defs = vec![TypeDef {
                        params,
                        name,
                        repr,
                        span,
                    }];
                    while self.eat(&Tok::And) {
                        self.eat(&Tok::Type);
                        defs.push(self.type_def()?);
                    }
                    SpecItemKind::Type { nonrec, defs }
                }
            }
            Some(Tok::Module) if self.peek_at(1) == Some(&Tok::Type) => {
                self.bump();
                self.bump();
                let name = self.uident()?;
                let mty = if self.eat(&Tok::Eq) {
                    Some(self.mod_type()?)
                } else {
                    None
                };
                SpecItemKind::ModType { name, mty }
            }
            Some(Tok::Module) => {
                self.bump();
                let name = self.uident()?;
                let params = self.functor_params()?;
                self.expect(Tok::Colon)?;
                let mty = self.mod_type()?;
                SpecItemKind::Module { name, params, mty }
            }
            Some(Tok::Exception) => {
                self.bump();
                let name = self.uident()?;
                let arg = self.exception_arg()?;
                SpecItemKind::Exception { name, arg }
            }
            Some(Tok::Open) => {
                self.bump();
                SpecItemKind::Open(self.mod_expr()?)
            }
            Some(Tok::Include) => {
                self.bump();
                SpecItemKind::Include(self.mod_type()?)
            }
            Some(Tok::Local) => {
                self.bump();
                let first = self.spec_items(true)?;
                self.expect(Tok::In)?;
                let second = self.spec_items(false)?;
                self.expect(Tok::End)?;
                SpecItemKind::Local(first, second)
            }
            _ => return Err(self.error(&["signature item"])),
        };
        Ok(SpecItem {
            kind,
            span: start.to(&self.prev_span()),
        })
    }

    fn value_name(&mut self) -> PResult<String> {
        if self.at(&Tok::LParen) {
            if let Some(op) = self.peek_at(1).and_then(operator_name) {
                if self.peek_at(2) == Some(&Tok::RParen) {
                    self.pos += 3;
                    return Ok(op.to_string());
                }
            }
        }
        self.ident()
    }

    // ----------------------------------------------------------------
    // Type expressions

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        let start = self.span();
        let lhs = self.type_tuple()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.type_expr()?;
            return Ok(TypeExpr {
                kind: TypeExprKind::Arrow(Box::new(lhs), Box::new(rhs)),
                span: start.to(&self.prev_span()),
            });
        }
        Ok(lhs)
    }

    fn type_tuple(&mut self) -> PResult<TypeExpr> {
        let start = self.span();
        let first = self.type_app()?;
        if !self.at(&Tok::Star) {
            return Ok(first);
        }
        let mut parts = vec![first];
        while self.eat(&Tok::Star) {
            parts.push(self.type_app()?);
        }
        Ok(TypeExpr {
            kind: TypeExprKind::Tuple(parts),
            span: start.to(&self.prev_span()),
        })
    }

    fn type_app(&mut self) -> PResult<TypeExpr> {
        let start = self.span();
        let mut ty = self.type_atom()?;
        while matches!(self.peek(), Some(Tok::Ident(_)) | Some(Tok::UIdent(_))) && !self.layout_break() {
            let ctor = self.type_longident()?;
            ty = TypeExpr {
                kind: TypeExprKind::Constr(ctor, vec![ty]),
                span: start.to(&self.prev_span()),
            };
        }
        Ok(ty)
    }

    fn type_atom(&mut self) -> PResult<TypeExpr> {
        let start = self.span();
        match self.peek() {
            Some(Tok::TyVar(v)) => {
                let v = v.clone();
                self.bump();
                Ok(TypeExpr {
                    kind: TypeExprKind::Var(v),
                    span: start,
                })
            }
            Some(Tok::Ident(_)) | Some(Tok::UIdent(_)) => {
                let li = self.type_longident()?;
                Ok(TypeExpr {
                    kind: TypeExprKind::Constr(li, Vec::new()),
                    span: start.to(&self.prev_span()),
                })
            }
            Some(Tok::LParen) => {
                self.bump();
                let first = self.type_expr()?;
                if self.eat(&Tok::Comma) {
                    let mut args = vec![first];
                    loop {
                        args.push(self.type_expr()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RParen)?;
                    let ctor = self.type_longident()?;
                    Ok(TypeExpr {
                        kind: TypeExprKind::Constr(ctor, args),
                        span: start.to(&self.prev_span()),
                    })
                } else {
                    self.expect(Tok::RParen)?;
                    Ok(first)
                }
            }
            _ => Err(self.error(&["type"])),
        }
    }

    /// `t`, `M.t`, `F(X).t`, `A.B.t`.
    fn type_longident(&mut self) -> PResult<LongIdent> {
        if let Some(Tok::Ident(n)) = self.peek() {
            let n = n.clone();
            self.bump();
            return Ok(LongIdent::simple(n));
        }
        let module = self.type_mod_path()?;
        self.expect(Tok::Dot)?;
        let name = self.ident()?;
        Ok(LongIdent {
            module: Some(module),
            name,
        })
    }

    fn type_mod_path(&mut self) -> PResult<ModPath> {
        let mut path = ModPath::Name(self.uident()?);
        loop {
            if self.at(&Tok::LParen) {
                self.bump();
                let arg = self.type_mod_path()?;
                self.expect(Tok::RParen)?;
                path = ModPath::Apply(Box::new(path), Box::new(arg));
            } else if self.at(&Tok::Dot) && matches!(self.peek_at(1), Some(Tok::UIdent(_))) {
                self.bump();
                path = ModPath::Dot(Box::new(path), self.uident()?);
            } else {
                return Ok(path);
            }
        }
    }

    // ----------------------------------------------------------------
    // Patterns

    fn pattern(&mut self) -> PResult<Pattern> {
        let start = self.span();
        let first = self.pattern_ctor()?;
        let p = if self.at(&Tok::Comma) {
            let mut parts = vec![first];
            while self.eat(&Tok::Comma) {
                parts.push(self.pattern_ctor()?);
            }
            Pattern {
                kind: PatternKind::Tuple(parts),
                span: start.to(&self.prev_span()),
            }
        } else {
            first
        };
        check_shallow(&p).map_err(|sp| self.error_msg(sp, "nested patterns are not supported"))?;
        Ok(p)
    }

    fn pattern_ctor(&mut self) -> PResult<Pattern> {
        let start = self.span();
        if matches!(self.peek(), Some(Tok::UIdent(_))) {
            let li = self.expr_longident_ctor()?;
            let arg = if self.peek().is_some_and(starts_pattern_atom) {
                Some(Box::new(self.pattern_atom()?))
            } else {
                None
            };
            return Ok(Pattern {
                kind: PatternKind::Constr(li, arg),
                span: start.to(&self.prev_span()),
            });
        }
        self.pattern_atom()
    }

    fn pattern_atom(&mut self) -> PResult<Pattern> {
        let start = self.span();
        let kind = match self.peek() {
            Some(Tok::Underscore) => {
                self.bump();
                PatternKind::Wildcard
            }
            Some(Tok::Ident(v)) => {
                let v = v.clone();
                self.bump();
                PatternKind::Var(v)
            }
            Some(Tok::Int(n)) => {
                let n = *n;
                self.bump();
                PatternKind::Lit(Literal::Int(n))
            }
            Some(Tok::Str(s)) => {
                let s = s.clone();
                self.bump();
                PatternKind::Lit(Literal::Str(s))
            }
            Some(Tok::True) => {
                self.bump();
                PatternKind::Lit(Literal::Bool(true))
            }
            Some(Tok::False) => {
                self.bump();
                PatternKind::Lit(Literal::Bool(false))
            }
            Some(Tok::UIdent(_)) => PatternKind::Constr(self.expr_longident_ctor()?, None),
            Some(Tok::LParen) => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    PatternKind::Lit(Literal::Unit)
                } else {
                    let p = self.pattern()?;
                    if self.eat(&Tok::Colon) {
                        let ty = self.type_expr()?;
                        self.expect(Tok::RParen)?;
                        PatternKind::Annot(Box::new(p), ty)
                    } else {
                        self.expect(Tok::RParen)?;
                        return Ok(p);
                    }
                }
            }
            _ => return Err(self.error(&["pattern"])),
        };
        Ok(Pattern {
            kind,
            span: start.to(&self.prev_span()),
        })
    }

    /// `C` or `M.N.C` (constructor reference).
    fn expr_longident_ctor(&mut self) -> PResult<LongIdent> {
        let mut names = vec![self.uident()?];
        while self.at(&Tok::Dot) && matches!(self.peek_at(1), Some(Tok::UIdent(_))) {
            self.bump();
            names.push(self.uident()?);
        }
        let name = names.pop().unwrap_or_default();
        Ok(LongIdent {
            module: path_of_names(names),
            name,
        })
    }

    // ----------------------------------------------------------------
    // Expressions

    fn expr(&mut self) -> PResult<Expr> {
        let start = self.span();
        let e = self.expr_nonseq()?;
        if self.at(&Tok::Semi) {
            self.bump();
            if !self.peek().is_some_and(starts_expr) {
                return Ok(e);
            }
            let rest = self.expr()?;
            return Ok(Expr {
                kind: ExprKind::Sequence(Box::new(e), Box::new(rest)),
                span: start.to(&self.prev_span()),
            });
        }
        Ok(e)
    }

    fn expr_nonseq(&mut self) -> PResult<Expr> {
        let start = self.span();
        let kind = match self.peek() {
            Some(Tok::Let) => {
                self.bump();
                match self.peek() {
                    Some(Tok::Module) => {
                        self.bump();
                        let name = self.uident()?;
                        let params = self.functor_params()?;
                        let constraint = if self.eat(&Tok::Colon) {
                            Some(self.mod_type()?)
                        } else {
                            None
                        };
                        self.expect(Tok::Eq)?;
                        let mut m = self.mod_expr()?;
                        if let Some(mty) = constraint {
                            let span = m.span.clone();
                            m = ModExpr {
                                kind: ModExprKind::Ascribe(Box::new(m), Box::new(mty)),
                                span,
                            };
                        }
                        for p in params.into_iter().rev() {
                            let span = m.span.clone();
                            m = ModExpr {
                                kind: ModExprKind::Functor(Box::new(p), Box::new(m)),
                                span,
                            };
                        }
                        self.expect(Tok::In)?;
                        let body = self.expr()?;
                        ExprKind::LetModuleIn(name, Box::new(m), Box::new(body))
                    }
                    Some(Tok::Exception) => {
                        self.bump();
                        let name = self.uident()?;
                        let arg = self.exception_arg()?;
                        self.expect(Tok::In)?;
                        let body = self.expr()?;
                        ExprKind::LetExceptionIn(name, arg, Box::new(body))
                    }
                    Some(Tok::Open) => {
                        self.bump();
                        let m = self.mod_expr()?;
                        self.expect(Tok::In)?;
                        let body = self.expr()?;
                        ExprKind::LetOpenIn(Box::new(m), Box::new(body))
                    }
                    _ => {
                        let rec_flag = self.eat(&Tok::Rec);
                        let bindings = self.bindings()?;
                        self.expect(Tok::In)?;
                        let body = self.expr()?;
                        ExprKind::LetIn {
                            rec_flag,
                            bindings,
                            body: Box::new(body),
                        }
                    }
                }
            }
            Some(Tok::Fun) => {
                self.bump();
                let mut params = vec![self.pattern_atom()?];
                while !self.at(&Tok::Arrow) {
                    params.push(self.pattern_atom()?);
                }
                self.expect(Tok::Arrow)?;
                let body = self.expr()?;
                return Ok(make_fun(params, body, start.to(&self.prev_span())));
            }
            Some(Tok::Match) => {
                self.bump();
                let scrutinee = self.expr()?;
                self.expect(Tok::With)?;
                let cases = self.cases()?;
                ExprKind::Match(Box::new(scrutinee), cases)
            }
            Some(Tok::Try) => {
                self.bump();
                let body = self.expr()?;
                self.expect(Tok::With)?;
                let cases = self.cases()?;
                ExprKind::TryWith(Box::new(body), cases)
            }
            Some(Tok::If) => {
                self.bump();
                let c = self.expr()?;
                self.expect(Tok::Then)?;
                let t = self.expr_nonseq()?;
                let e = if self.eat(&Tok::Else) {
                    Some(Box::new(self.expr_nonseq()?))
                } else {
                    None
                };
                ExprKind::If(Box::new(c), Box::new(t), e)
            }
            _ => return self.expr_assign(),
        };
        Ok(Expr {
            kind,
            span: start.to(&self.prev_span()),
        })
    }

    fn cases(&mut self) -> PResult<Vec<Case>> {
        self.eat(&Tok::Bar);
        let mut out = vec![self.case()?];
        while self.eat(&Tok::Bar) {
            out.push(self.case()?);
        }
        Ok(out)
    }

    fn case(&mut self) -> PResult<Case> {
        let exception = self.eat(&Tok::Exception);
        let pat = self.pattern()?;
        self.expect(Tok::Arrow)?;
        let body = self.expr()?;
        Ok(Case {
            exception,
            pat,
            body,
        })
    }

    fn expr_assign(&mut self) -> PResult<Expr> {
        let start = self.span();
        let lhs = self.expr_tuple()?;
        if self.at(&Tok::ColonEq) {
            let op_span = self.bump().span;
            let rhs = self.expr_assign()?;
            return Ok(binary(":=", op_span, lhs, rhs, start.to(&self.prev_span())));
        }
        Ok(lhs)
    }

    fn expr_tuple(&mut self) -> PResult<Expr> {
        let start = self.span();
        let first = self.expr_cmp()?;
        if !self.at(&Tok::Comma) {
            return Ok(first);
        }
        let mut parts = vec![first];
        while self.eat(&Tok::Comma) {
            if matches!(
                self.peek(),
                Some(Tok::Fun) | Some(Tok::Let) | Some(Tok::Match) | Some(Tok::If) | Some(Tok::Try)
            ) {
                parts.push(self.expr_nonseq()?);
            } else {
                parts.push(self.expr_cmp()?);
            }
        }
        Ok(Expr {
            kind: ExprKind::Tuple(parts),
            span: start.to(&self.prev_span()),
        })
    }

    fn expr_binary_level(
        &mut self,
        ops: &[(Tok, &'static str)],
        next: fn(&mut Parser) -> PResult<Expr>,
    ) -> PResult<Expr> {
        let start = self.span();
        let mut lhs = next(self)?;
        'outer: loop {
            for (tok, name) in ops {
                if self.at(tok) {
                    let op_span = self.bump().span;
                    let rhs = next(self)?;
                    lhs = binary(name, op_span, lhs, rhs, start.to(&self.prev_span()));
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn expr_cmp(&mut self) -> PResult<Expr> {
        self.expr_binary_level(&[(Tok::Eq, "="), (Tok::Lt, "<")], Parser::expr_add)
    }

    fn expr_add(&mut self) -> PResult<Expr> {
        self.expr_binary_level(&[(Tok::Plus, "+"), (Tok::Minus, "-")], Parser::expr_mul)
    }

    fn expr_mul(&mut self) -> PResult<Expr> {
        self.expr_binary_level(&[(Tok::Star, "*")], Parser::expr_app)
    }

    fn expr_app(&mut self) -> PResult<Expr> {
        let start = self.span();
        if self.eat(&Tok::Raise) {
            let e = self.expr_app()?;
            return Ok(Expr {
                kind: ExprKind::Raise(Box::new(e)),
                span: start.to(&self.prev_span()),
            });
        }
        if self.eat(&Tok::Assert) {
            let e = self.expr_app()?;
            return Ok(Expr {
                kind: ExprKind::Assert(Box::new(e)),
                span: start.to(&self.prev_span()),
            });
        }
        let mut head = self.expr_prefix()?;
        if let ExprKind::Constr(li, None) = &head.kind {
            if self.peek().is_some_and(starts_atom) && !self.layout_break() {
                let li = li.clone();
                let arg = self.expr_prefix()?;
                head = Expr {
                    kind: ExprKind::Constr(li, Some(Box::new(arg))),
                    span: start.to(&self.prev_span()),
                };
            }
        }
        while self.peek().is_some_and(starts_atom) && !self.layout_break() {
            let arg = self.expr_prefix()?;
            head = Expr {
                kind: ExprKind::Apply(Box::new(head), Box::new(arg)),
                span: start.to(&self.prev_span()),
            };
        }
        Ok(head)
    }

    fn expr_prefix(&mut self) -> PResult<Expr> {
        let start = self.span();
        if self.at(&Tok::Bang) {
            let op_span = self.bump().span;
            let arg = self.expr_prefix()?;
            let f = Expr {
                kind: ExprKind::Var(LongIdent::simple("!")),
                span: op_span,
            };
            return Ok(Expr {
                kind: ExprKind::Apply(Box::new(f), Box::new(arg)),
                span: start.to(&self.prev_span()),
            });
        }
        self.expr_atom()
    }

    fn expr_atom(&mut self) -> PResult<Expr> {
        let start = self.span();
        let kind = match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.bump();
                ExprKind::Lit(Literal::Int(n))
            }
            Some(Tok::Str(s)) => {
                let s = s.clone();
                self.bump();
                ExprKind::Lit(Literal::Str(s))
            }
            Some(Tok::True) => {
                self.bump();
                ExprKind::Lit(Literal::Bool(true))
            }
            Some(Tok::False) => {
                self.bump();
                ExprKind::Lit(Literal::Bool(false))
            }
            Some(Tok::Ident(v)) => {
                let v = v.clone();
                self.bump();
                ExprKind::Var(LongIdent::simple(v))
            }
            Some(Tok::UIdent(_)) => {
                let mut names = vec![self.uident()?];
                loop {
                    if !self.at(&Tok::Dot) {
                        break;
                    }
                    match self.peek_at(1) {
                        Some(Tok::UIdent(_)) => {
                            self.bump();
                            names.push(self.uident()?);
                        }
                        Some(Tok::Ident(_)) => {
                            self.bump();
                            let name = self.ident()?;
                            return Ok(Expr {
                                kind: ExprKind::Var(LongIdent {
                                    module: path_of_names(names),
                                    name,
                                }),
                                span: start.to(&self.prev_span()),
                            });
                        }
                        _ => break,
                    }
                }
                let name = names.pop().unwrap_or_default();
                ExprKind::Constr(
                    LongIdent {
                        module: path_of_names(names),
                        name,
                    },
                    None,
                )
            }
            Some(Tok::Begin) => {
                self.bump();
                if self.eat(&Tok::End) {
                    ExprKind::Lit(Literal::Unit)
                } else {
                    let e = self.expr()?;
                    self.expect(Tok::End)?;
                    return Ok(e);
                }
            }
            Some(Tok::LParen) => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    ExprKind::Lit(Literal::Unit)
                } else if let (Some(op), Some(Tok::RParen)) =
                    (self.peek().and_then(operator_name), self.peek_at(1))
                {
                    self.pos += 2;
                    ExprKind::Var(LongIdent::simple(op))
                } else {
                    let e = self.expr()?;
                    if self.eat(&Tok::Colon) {
                        let ty = self.type_expr()?;
                        self.expect(Tok::RParen)?;
                        ExprKind::Annot(Box::new(e), ty)
                    } else {
                        self.expect(Tok::RParen)?;
                        return Ok(e);
                    }
                }
            }
            _ => return Err(self.error(&["expression"])),
        };
        Ok(Expr {
            kind,
            span: start.to(&self.prev_span()),
        })
    }
}

fn operator_name(t: &Tok) -> Option<&'static str> {
    Some(match t {
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Star => "*",
        Tok::Eq => "=",
        Tok::Lt => "<",
        Tok::ColonEq => ":=",
        Tok::Bang => "!",
        _ => return None,
    })
}

fn path_of_names(names: Vec<String>) -> Option<ModPath> {
    let mut it = names.into_iter();
    let mut path = ModPath::Name(it.next()?);
    for n in it {
        path = ModPath::Dot(Box::new(path), n);
    }
    Some(path)
}

fn binary(op: &str, op_span: SourceSpan, lhs: Expr, rhs: Expr, span: SourceSpan) -> Expr {
    let f = Expr {
        kind: ExprKind::Var(LongIdent::simple(op)),
        span: op_span,
    };
    let partial = Expr {
        kind: ExprKind::Apply(Box::new(f), Box::new(lhs)),
        span: span.clone(),
    };
    Expr {
        kind: ExprKind::Apply(Box::new(partial), Box::new(rhs)),
        span,
    }
}

fn make_fun(params: Vec<Pattern>, body: Expr, span: SourceSpan) -> Expr {
    params.into_iter().rev().fold(body, |acc, p| Expr {
        kind: ExprKind::Fun(p, Box::new(acc)),
        span: span.clone(),
    })
}

fn starts_atom(t: &Tok) -> bool {
    matches!(
        t,
        Tok::Int(_)
            | Tok::Str(_)
            | Tok::True
            | Tok::False
            | Tok::Ident(_)
            | Tok::UIdent(_)
            | Tok::LParen
            | Tok::Begin
            | Tok::Bang
    )
}

fn starts_expr(t: &Tok) -> bool {
    starts_atom(t)
        || matches!(
            t,
            Tok::Let | Tok::Fun | Tok::Match | Tok::Try | Tok::If | Tok::Raise | Tok::Assert
        )
}

fn starts_pattern_atom(t: &Tok) -> bool {
    matches!(
        t,
        Tok::Underscore
            | Tok::Ident(_)
            | Tok::Int(_)
            | Tok::Str(_)
            | Tok::True
            | Tok::False
            | Tok::UIdent(_)
            | Tok::LParen
    )
}

/// Patterns are shallow: no constructor or tuple below a constructor
/// argument or a tuple component.
fn check_shallow(p: &Pattern) -> Result<(), SourceSpan> {
    fn leaf(p: &Pattern) -> Result<(), SourceSpan> {
        match &p.kind {
            PatternKind::Wildcard | PatternKind::Var(_) | PatternKind::Lit(_) => Ok(()),
            PatternKind::Annot(inner, _) => leaf(inner),
            _ => Err(p.span.clone()),
        }
    }
    match &p.kind {
        PatternKind::Constr(_, Some(arg)) => match &arg.kind {
            PatternKind::Tuple(ps) => ps.iter().try_for_each(leaf),
            _ => leaf(arg),
        },
        PatternKind::Tuple(ps) => ps.iter().try_for_each(leaf),
        PatternKind::Annot(inner, _) => check_shallow(inner),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Program {
        parse_program(s).unwrap_or_else(|e| panic!("{e:?}"))
    }

    #[test]
    fn empty_program() {
        assert_eq!(parse("").items.len(), 0);
    }

    #[test]
    fn open_struct_then_let() {
        let p = parse("open struct let x = 3 end\nlet y = x");
        assert_eq!(p.items.len(), 2);
        let StructItemKind::Open(m) = &p.items[0].kind else { panic!() };
        let ModExprKind::Struct(inner) = &m.kind else { panic!() };
        assert!(matches!(inner[0].kind, StructItemKind::Let { .. }));
        let StructItemKind::Let { bindings, .. } = &p.items[1].kind else { panic!() };
        assert!(matches!(&bindings[0].body.kind, ExprKind::Var(li) if li.name == "x"));
    }

    #[test]
    fn local_splits_at_in() {
        let p = parse("local let a = 1 in let b = a end");
        let StructItemKind::Local(a, b) = &p.items[0].kind else { panic!("{:?}", p.items[0]) };
        assert_eq!((a.len(), b.len()), (1, 1));
    }

    #[test]
    fn open_accepts_every_module_expression() {
        let p = parse("open F(M)\nopen (M : S)\nopen struct end\nopen M.N");
        assert_eq!(p.items.len(), 4);
        let StructItemKind::Open(m) = &p.items[0].kind else { panic!() };
        assert!(matches!(m.kind, ModExprKind::Apply(..)));
        let StructItemKind::Open(m) = &p.items[1].kind else { panic!() };
        assert!(matches!(m.kind, ModExprKind::Ascribe(..)));
    }

    #[test]
    fn bare_expression_after_let_on_new_line() {
        let p = parse("let f x = x\nprint \"a\"");
        assert_eq!(p.items.len(), 2);
        assert!(matches!(p.items[1].kind, StructItemKind::Expr(_)));
    }

    #[test]
    fn match_with_exception_case() {
        let p = parse("let r = match f () with\n  | exception M.E -> 1\n  | x -> x");
        let StructItemKind::Let { bindings, .. } = &p.items[0].kind else { panic!() };
        let ExprKind::Match(_, cases) = &bindings[0].body.kind else { panic!() };
        assert!(cases[0].exception);
        assert!(!cases[1].exception);
    }

    #[test]
    fn signature_items() {
        let items = parse_signature(
            "open struct type t = int -> int end\nval x : t\ntype u := int\nmodule type S = T with type t := int",
        )
        .unwrap();
        assert_eq!(items.len(), 4);
        assert!(matches!(items[2].kind, SpecItemKind::TypeSubst { .. }));
    }

    #[test]
    fn functor_application_type_path() {
        let p = parse("let f (x : F(List).t) = x");
        let StructItemKind::Let { bindings, .. } = &p.items[0].kind else { panic!() };
        let PatternKind::Annot(_, ty) = &bindings[0].params[0].kind else { panic!() };
        let TypeExprKind::Constr(li, _) = &ty.kind else { panic!() };
        assert!(matches!(li.module, Some(ModPath::Apply(..))));
    }

    #[test]
    fn variant_with_manifest() {
        let p = parse("type t = A.t = X | Y of int * string");
        let StructItemKind::Type { defs, .. } = &p.items[0].kind else { panic!() };
        let TypeRepr::Variant { manifest: Some(_), ctors } = &defs[0].repr else { panic!() };
        assert_eq!(ctors[1].args.len(), 2);
    }

    #[test]
    fn errors_stay_in_bounds() {
        let src = "let x = ";
        let e = parse_program(src).unwrap_err();
        let sp = e.span();
        assert_eq!((sp.start_line, sp.start_col), (1, 8));
        let e = parse_program("module M = struct").unwrap_err();
        assert_eq!(e.span().start_line, 1);
        assert_eq!(e.to_string(), "Syntax error");
    }

    #[test]
    fn nested_patterns_rejected() {
        assert!(parse_program("let f (A (B x)) = x").is_err());
    }

    #[test]
    fn parse_is_deterministic() {
        let src = "module M = struct open struct type t' = t end type t = B of t * t' | C end";
        assert_eq!(parse(src), parse(src));
    }
}
