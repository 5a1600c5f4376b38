//! Ramsey-theoretic synthesis and verification of multi-copy LOCC
//! discrimination protocols for orthogonal product states.

pub mod cliques;
pub mod error;
pub mod protocol;
pub mod ramsey;
pub mod simulate;
pub mod states;

pub use error::{Error, Result};
