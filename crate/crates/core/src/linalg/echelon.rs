use super::{record_factorization, LinalgError, Matrix};
use crate::scalar::Scalar;

/// Row echelon form `R` of a matrix together with the row operations `T`
/// that produced it, so that `T·M = R`.
#[derive(Clone, Debug, PartialEq)]
pub struct EchelonResult<T> {
    pub transform: Matrix<T>,
    pub reduced: Matrix<T>,
    pub rank: usize,
    /// Column of the leading entry of each of the first `rank` rows of `R`.
    pub pivot_cols: Vec<usize>,
}

/// `T·d` split at the rank: the leading part `tau` and whether the tail vanishes.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual<T> {
    pub tau: Vec<T>,
    pub feasible: bool,
}

/// Gaussian elimination with partial pivoting, recording the transform.
///
/// The pivot in each column is the entry of largest magnitude at or below
/// the current row; ties go to the lowest row index.
pub fn row_echelon_with_transform<T: Scalar>(m: &Matrix<T>) -> EchelonResult<T> {
    record_factorization();
    let (rows, cols) = m.shape();
    let mut reduced = m.clone();
    let mut transform: Matrix<T> = Matrix::identity(rows);
    let mut pivot_cols = Vec::new();
    let mut rank = 0;

    for col in 0..cols {
        if rank == rows {
            break;
        }
        let mut best: Option<(usize, T)> = None;
        for i in rank..rows {
            let mag = reduced[(i, col)].abs();
            if mag.is_negligible() {
                continue;
            }
            if best.as_ref().map_or(true, |(_, b)| mag > *b) {
                best = Some((i, mag));
            }
        }
        let Some((pivot_row, _)) = best else { continue };
        reduced.swap_rows(rank, pivot_row);
        transform.swap_rows(rank, pivot_row);

        let pivot = reduced[(rank, col)].clone();
        for i in rank + 1..rows {
            if reduced[(i, col)].is_zero() {
                continue;
            }
            let factor = reduced[(i, col)].clone() / pivot.clone();
            for j in col..cols {
                let delta = factor.clone() * reduced[(rank, j)].clone();
                reduced[(i, j)] = reduced[(i, j)].clone() - delta;
            }
            reduced[(i, col)] = T::zero();
            for j in 0..rows {
                let delta = factor.clone() * transform[(rank, j)].clone();
                transform[(i, j)] = transform[(i, j)].clone() - delta;
            }
        }
        pivot_cols.push(col);
        rank += 1;
    }

    // float elimination can leave dust in the zero block
    for i in rank..rows {
        for v in reduced.row_mut(i) {
            if v.is_negligible() {
                *v = T::zero();
            }
        }
    }

    EchelonResult {
        transform,
        reduced,
        rank,
        pivot_cols,
    }
}

impl<T: Scalar> EchelonResult<T> {
    /// Applies the transform to a right-hand side and checks the rows beyond
    /// the rank, which must vanish for `M·x = d` to be solvable.
    pub fn residual(&self, d: &[T]) -> Result<Residual<T>, LinalgError> {
        let td = self.transform.matvec(d)?;
        let feasible = td[self.rank..].iter().all(Scalar::is_negligible);
        let mut tau = td;
        tau.truncate(self.rank);
        Ok(Residual { tau, feasible })
    }

    /// The nonzero rows of `R`, which span the row space of the input.
    pub fn basis_rows(&self) -> Matrix<T> {
        let which: Vec<usize> = (0..self.rank).collect();
        self.reduced.select_rows(&which)
    }
}
