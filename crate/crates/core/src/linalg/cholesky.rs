use num_traits::Float;

use super::{record_factorization, LinalgError, Matrix};
use crate::scalar::Scalar;

/// Lower-triangular factor `L` with `A = L·Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky<F> {
    lower: Matrix<F>,
}

impl<F: Scalar + Float> Cholesky<F> {
    pub fn factor(a: &Matrix<F>) -> Result<Self, LinalgError> {
        let n = a.rows();
        if a.cols() != n {
            return Err(LinalgError::DimensionMismatch {
                op: "cholesky",
                left: a.shape(),
                right: a.shape(),
            });
        }
        record_factorization();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut diag = a[(j, j)];
            for k in 0..j {
                diag = diag - l[(j, k)] * l[(j, k)];
            }
            if !(diag > F::zero()) || !Float::is_finite(diag) {
                return Err(LinalgError::NotPositiveDefinite { pivot: j });
            }
            let ljj = diag.sqrt();
            l[(j, j)] = ljj;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Cholesky { lower: l })
    }

    pub fn lower(&self) -> &Matrix<F> {
        &self.lower
    }

    /// Solves `A·X = B` by forward and back substitution.
    pub fn solve(&self, b: &Matrix<F>) -> Result<Matrix<F>, LinalgError> {
        let n = self.lower.rows();
        if b.rows() != n {
            return Err(LinalgError::DimensionMismatch {
                op: "cholesky solve",
                left: self.lower.shape(),
                right: b.shape(),
            });
        }
        let l = &self.lower;
        let mut x = b.clone();
        for c in 0..b.cols() {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s = s - l[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / l[(i, i)];
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in i + 1..n {
                    s = s - l[(k, i)] * x[(k, c)];
                }
                x[(i, c)] = s / l[(i, i)];
            }
        }
        Ok(x)
    }
}

/// Solves `A·X = B` for symmetric positive definite `A`.
pub fn solve_spd<F: Scalar + Float>(a: &Matrix<F>, b: &Matrix<F>) -> Result<Matrix<F>, LinalgError> {
    Cholesky::factor(a)?.solve(b)
}
