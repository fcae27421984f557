//! Dense matrices, exact row reduction and Cholesky solves.

mod cholesky;
mod echelon;
mod matrix;

use std::cell::Cell;

use thiserror::Error;

pub use cholesky::{solve_spd, Cholesky};
pub use echelon::{row_echelon_with_transform, EchelonResult, Residual};
pub use matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("ragged rows: row {row} has {len} entries, expected {expected}")]
    Ragged {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

thread_local! {
    static FACTORIZATIONS: Cell<usize> = const { Cell::new(0) };
}

pub(crate) fn record_factorization() {
    FACTORIZATIONS.with(|c| c.set(c.get() + 1));
}

/// Number of eliminations and Cholesky factorizations run on this thread.
pub fn factorization_count() -> usize {
    FACTORIZATIONS.with(Cell::get)
}
