pub mod abelian;
pub mod constructions;
pub mod decoder;
pub mod error;
pub mod lattice;
pub mod render;
pub mod search;
pub mod verifier;

pub use error::{PddsError, Result};
