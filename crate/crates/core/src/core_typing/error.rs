use std::fmt;

use thiserror::Error;

use crate::nondep::EliminationError;
use crate::semobj::{MatchError, SemError};
use crate::syntax::SourceSpan;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TypeErrorKind {
    #[error("{0}")]
    Sem(#[from] SemError),
    #[error("This expression has type {found} but was expected of type {expected}")]
    Mismatch { found: String, expected: String },
    #[error("This expression has type {found} but was expected of type {expected}\nThe type variable {var} occurs inside {expected}")]
    Occurs { found: String, expected: String, var: String },
    #[error("This expression has type {0}\nThis is not a function; it cannot be applied")]
    NotAFunction(String),
    #[error("The constructor {name} expects {expected} argument(s), but is applied here to {found} argument(s)")]
    CtorArity { name: String, expected: usize, found: usize },
    #[error("The type constructor {name} expects {expected} argument(s), but is here applied to {found} argument(s)")]
    TypeArity { name: String, expected: usize, found: usize },
    #[error("The type variable '{0} is unbound in this type declaration")]
    UnboundTypeVar(String),
    #[error("The type abbreviation {0} is cyclic")]
    CyclicAbbrev(String),
    #[error("Only variables are allowed as left-hand side of let rec")]
    LetRecLhs,
    #[error("The type constructor {0} would escape its scope")]
    Escape(String),
    #[error("This module is a functor; it cannot be opened or included")]
    CannotOpenFunctor,
    #[error("This module is not a functor; it cannot be applied")]
    NotAFunctor,
    #[error("{0}")]
    Match(#[from] MatchError),
    #[error("In this with constraint, the type {0} already has a definition")]
    WithOnNonAbstract(String),
    #[error("The signature constrained by with has no type component named {0}")]
    UnboundTypeInWith(String),
    #[error("{}", .0.headline())]
    Elimination(Box<EliminationError>),
}

/// A checking error anchored at a source span.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub span: SourceSpan,
}

impl TypeError {
    pub fn new(kind: impl Into<TypeErrorKind>, span: &SourceSpan) -> TypeError {
        TypeError {
            kind: kind.into(),
            span: span.clone(),
        }
    }
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

impl std::error::Error for TypeError {}

impl From<EliminationError> for TypeError {
    fn from(e: EliminationError) -> TypeError {
        let span = e.open_span.clone();
        TypeError {
            kind: TypeErrorKind::Elimination(Box::new(e)),
            span,
        }
    }
}
