//! Operator-count heuristics over compliant variables.
//!
//! A planning problem's goal compliant variables give a linear system
//! `M·x = D` that every plan's operator counts satisfy. This crate builds
//! that system, precomputes its closed-form minimum-norm factor, solves the
//! l1, reweighted-l1 and integer variants, and uses them in forward search.

pub mod bench;
pub mod error;
pub mod format;
pub mod heuristics;
pub mod linalg;
pub mod lp;
pub mod opcount;
pub mod planning;
pub mod scalar;
pub mod search;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact arbitrary-precision rational.
pub type Rational = num_rational::BigRational;
pub type RationalMatrix = linalg::Matrix<Rational>;
pub type FloatMatrix = linalg::Matrix<f64>;
pub type FloatVector = Vec<f64>;
pub type RationalEchelon = linalg::EchelonResult<Rational>;
pub type FloatLp = lp::LpProblem<f64>;
pub type FloatLpSolution = lp::LpSolution<f64>;
pub type RationalLp = lp::LpProblem<Rational>;
