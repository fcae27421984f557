use std::fmt;
use std::ops::{Index, IndexMut};

use super::LinalgError;
use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds from nested rows. An empty outer vector gives a 0×0 matrix.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        let n_rows = rows.len();
        let mut data = Vec::with_capacity(n_rows * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(LinalgError::Ragged {
                    row: i,
                    len: row.len(),
                    expected: cols,
                });
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite_value() {
                    return Err(LinalgError::NonFinite { row: i, col: j });
                }
            }
            data.extend(row);
        }
        Ok(Matrix {
            rows: n_rows,
            cols,
            data,
        })
    }

    pub fn column(values: Vec<T>) -> Self {
        Matrix {
            rows: values.len(),
            cols: 1,
            data: values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, which: &[usize]) -> Self {
        Matrix::from_fn(which.len(), self.cols, |i, j| self[(which[i], j)].clone())
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.clone() * other[(k, j)].clone();
                    let cell: &mut T = &mut out[(i, j)];
                    *cell = cell.clone() + prod;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[T]) -> Result<Vec<T>, LinalgError> {
        if self.cols != v.len() {
            return Err(LinalgError::DimensionMismatch {
                op: "matvec",
                left: self.shape(),
                right: (v.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Largest absolute entry; zero for an empty matrix.
    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|v| v.abs())
            .fold(T::zero(), |acc, v| if v > acc { v } else { acc })
    }

    pub fn sub(&self, other: &Matrix<T>) -> Result<Self, LinalgError> {
        if self.shape() != other.shape() {
            return Err(LinalgError::DimensionMismatch {
                op: "sub",
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        })
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_matvec() {
        let i3 = Matrix::<f64>::identity(3);
        assert_eq!(i3.matvec(&[1.0, -2.0, 5.0]).unwrap(), vec![1.0, -2.0, 5.0]);
    }

    #[test]
    fn transpose_shape() {
        let m = Matrix::from_rows(vec![vec![15.0, 4.0]]).unwrap();
        let c = Matrix::from_rows(vec![vec![0.5]]).unwrap();
        let p = m.transpose().matmul(&c).unwrap();
        assert_eq!(p.shape(), (2, 1));
        assert_eq!(p.to_rows(), vec![vec![7.5], vec![2.0]]);
    }

    #[test]
    fn mismatch_and_ragged() {
        let a = Matrix::<f64>::zeros(2, 3);
        assert!(matches!(
            a.matmul(&a),
            Err(LinalgError::DimensionMismatch { op: "matmul", .. })
        ));
        assert!(a.matvec(&[1.0]).is_err());
        assert!(matches!(
            Matrix::from_rows(vec![vec![1.0, 2.0], vec![1.0]]),
            Err(LinalgError::Ragged { row: 1, .. })
        ));
        assert!(matches!(
            Matrix::from_rows(vec![vec![f64::NAN]]),
            Err(LinalgError::NonFinite { row: 0, col: 0 })
        ));
    }

    fn mat3() -> impl Strategy<Value = Matrix<f64>> {
        proptest::collection::vec(-10i32..10, 9).prop_map(|v| {
            Matrix::from_fn(3, 3, |i, j| f64::from(v[i * 3 + j]))
        })
    }

    proptest! {
        #[test]
        fn transpose_of_product(a in mat3(), b in mat3()) {
            let lhs = a.matmul(&b).unwrap().transpose();
            let rhs = b.transpose().matmul(&a.transpose()).unwrap();
            // integer-valued entries: products are exact
            prop_assert_eq!(lhs, rhs);
        }
    }
}
