//! Hindley-Milner inference for core expressions.

pub mod builtins;
pub mod error;
pub mod infer;
pub mod typexpr;
pub mod unify;
