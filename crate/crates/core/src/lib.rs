//! Hermitian hulls of λ-constacyclic codes over `F_{q^2}` and the exact
//! average hull dimension over all such codes of a given length.

pub mod avgdim;
pub mod codes;
pub mod error;
pub mod gf;
pub mod numth;
pub mod polyalg;
pub mod rational;
pub mod sweep;

pub use error::{HullError, Result};
pub use rational::Rational;
