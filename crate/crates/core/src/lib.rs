pub mod actions;
pub mod algebra;
pub mod error;
pub mod eval;
pub mod expr;
pub mod groups;
pub mod identities;
pub mod invariants;
pub mod wronskian;

pub use error::{Error, Result};
