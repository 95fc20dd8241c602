//! MiniMod: an ML module language with `open` over arbitrary module expressions.

pub mod cli;
pub mod core_typing;
pub mod desugar;
pub mod eval;
pub mod mod_typing;
pub mod nondep;
pub mod printer;
pub mod semobj;
pub mod syntax;
