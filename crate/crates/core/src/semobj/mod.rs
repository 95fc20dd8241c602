//! Semantic objects: stamped identifiers, paths, types, signatures and the
//! operations on them (substitution, strengthening, matching).

pub mod env;
pub mod ident;
pub mod matching;
pub mod session;
pub mod strengthen;
pub mod subst;
pub mod types;

pub use env::{CtorDesc, CtorKind, Env, Prims};
pub use ident::{Ident, Stamper};
pub use matching::{match_modtype, MatchError, MatchReason};
pub use session::{SemError, Session, GENERIC_LEVEL};
pub use strengthen::strengthen;
pub use subst::{prefix_subst, subst_module, Subst};
pub use types::*;
