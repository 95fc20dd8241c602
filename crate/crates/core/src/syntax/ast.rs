use super::SourceSpan;

pub type Span = SourceSpan;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Program {
    pub items: Vec<StructItem>,
}

/// Module path as written: `A`, `A.B`, `F(X)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ModPath {
    Name(String),
    Dot(Box<ModPath>, String),
    Apply(Box<ModPath>, Box<ModPath>),
}

impl ModPath {
    pub fn names(&self, out: &mut Vec<String>) {
        match self {
            ModPath::Name(n) => out.push(n.clone()),
            ModPath::Dot(p, n) => {
                p.names(out);
                out.push(n.clone());
            }
            ModPath::Apply(f, a) => {
                f.names(out);
                a.names(out);
            }
        }
    }
}

/// A possibly qualified name: `x`, `A.B.x`, `F(X).t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LongIdent {
    pub module: Option<ModPath>,
    pub name: String,
}

impl LongIdent {
    pub fn simple(name: impl Into<String>) -> LongIdent {
        LongIdent { module: None, name: name.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructItem {
    pub kind: StructItemKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructItemKind {
    Let { rec_flag: bool, bindings: Vec<Binding> },
    Type { nonrec: bool, defs: Vec<TypeDef> },
    Module { name: String, params: Vec<FunctorParam>, body: ModExpr },
    ModType { name: String, mty: ModTypeExpr },
    Exception { name: String, arg: Option<TypeExpr> },
    Open(ModExpr),
    Include(ModExpr),
    Local(Vec<StructItem>, Vec<StructItem>),
    Private(Box<StructItem>),
    Expr(Expr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub pat: Pattern,
    pub params: Vec<Pattern>,
    pub body: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctorParam {
    pub name: String,
    pub mty: ModTypeExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDef {
    pub params: Vec<String>,
    pub name: String,
    pub repr: TypeRepr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeRepr {
    Abstract,
    Manifest(TypeExpr),
    Variant { manifest: Option<TypeExpr>, ctors: Vec<CtorDecl> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtorDecl {
    pub name: String,
    pub args: Vec<TypeExpr>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModExpr {
    pub kind: ModExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModExprKind {
    Path(ModPath),
    Struct(Vec<StructItem>),
    Functor(Box<FunctorParam>, Box<ModExpr>),
    Apply(Box<ModExpr>, Box<ModExpr>),
    Ascribe(Box<ModExpr>, Box<ModTypeExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModTypeExpr {
    pub kind: ModTypeKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModTypeKind {
    Path(LongIdent),
    Sig(Vec<SpecItem>),
    Functor(Box<FunctorParam>, Box<ModTypeExpr>),
    With(Box<ModTypeExpr>, WithConstraint),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WithMode {
    /// `with type t = τ`
    Equal,
    /// `with type t := τ`
    Substitute,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WithConstraint {
    pub params: Vec<String>,
    pub name: String,
    pub mode: WithMode,
    pub ty: TypeExpr,
}

/// A signature item as written.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecItem {
    pub kind: SpecItemKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpecItemKind {
    Val { name: String, ty: TypeExpr },
    Type { nonrec: bool, defs: Vec<TypeDef> },
    /// `type t := τ`
    TypeSubst { params: Vec<String>, name: String, ty: TypeExpr },
    Module { name: String, params: Vec<FunctorParam>, mty: ModTypeExpr },
    ModType { name: String, mty: Option<ModTypeExpr> },
    Exception { name: String, arg: Option<TypeExpr> },
    Open(ModExpr),
    Include(ModTypeExpr),
    Local(Vec<SpecItem>, Vec<SpecItem>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeExpr {
    pub kind: TypeExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeExprKind {
    Var(String),
    Arrow(Box<TypeExpr>, Box<TypeExpr>),
    Tuple(Vec<TypeExpr>),
    Constr(LongIdent, Vec<TypeExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Literal {
    Int(i64),
    Str(String),
    Bool(bool),
    Unit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub kind: PatternKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PatternKind {
    Wildcard,
    Var(String),
    Lit(Literal),
    Constr(LongIdent, Option<Box<Pattern>>),
    Tuple(Vec<Pattern>),
    Annot(Box<Pattern>, TypeExpr),
}

impl Pattern {
    /// Variables bound by the pattern, left to right.
    pub fn bound_vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match &self.kind {
            PatternKind::Var(v) => out.push(v),
            PatternKind::Constr(_, Some(p)) | PatternKind::Annot(p, _) => p.collect_vars(out),
            PatternKind::Tuple(ps) => ps.iter().for_each(|p| p.collect_vars(out)),
            _ => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case {
    /// `| exception p -> e`
    pub exception: bool,
    pub pat: Pattern,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Lit(Literal),
    Var(LongIdent),
    Constr(LongIdent, Option<Box<Expr>>),
    Tuple(Vec<Expr>),
    Fun(Pattern, Box<Expr>),
    Apply(Box<Expr>, Box<Expr>),
    LetIn { rec_flag: bool, bindings: Vec<Binding>, body: Box<Expr> },
    Match(Box<Expr>, Vec<Case>),
    TryWith(Box<Expr>, Vec<Case>),
    Raise(Box<Expr>),
    Assert(Box<Expr>),
    Sequence(Box<Expr>, Box<Expr>),
    LetModuleIn(String, Box<ModExpr>, Box<Expr>),
    LetExceptionIn(String, Option<TypeExpr>, Box<Expr>),
    LetOpenIn(Box<ModExpr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Option<Box<Expr>>),
    Annot(Box<Expr>, TypeExpr),
}

/// Names of the infix operators; they are ordinary values in the initial
/// environment.
pub const INFIX_OPS: &[&str] = &["+", "-", "*", "=", "<", ":="];

pub fn is_operator(name: &str) -> bool {
    INFIX_OPS.contains(&name) || name == "!"
}
