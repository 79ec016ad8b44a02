//! Image differential invariants built from two fundamental operators.
//!
//! The [`symbolic`] module expands operator chains into exact polynomials in
//! the partial-derivative symbols f_ij. [`catalog`] holds the 230 reference
//! chains with their relations and independent sets, [`invariance`] and
//! [`independence`] check their algebraic properties, and [`numeric`] plus
//! [`experiments`] evaluate them on images.

pub mod catalog;
pub mod error;
pub mod experiments;
pub mod independence;
pub mod invariance;
pub mod numeric;
pub mod report;
pub mod scalar;
pub mod symbolic;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use symbolic::{DerivSymbol, InvariantPolynomial, OpKind, Operator, OperatorChain, Q};
