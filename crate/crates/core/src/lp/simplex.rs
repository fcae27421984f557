use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// `min c·x  s.t.  A·x = b, x ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem<T> {
    pub a: Matrix<T>,
    pub b: Vec<T>,
    pub c: Vec<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub x: Vec<T>,
    pub objective: T,
    pub iterations: usize,
    /// Phase-two reduced costs of the structural columns (zero for basics).
    pub reduced_costs: Vec<T>,
}

impl<T: Scalar> LpSolution<T> {
    fn without_point(status: LpStatus, n: usize, iterations: usize) -> Self {
        LpSolution {
            status,
            x: vec![T::zero(); n],
            objective: T::zero(),
            iterations,
            reduced_costs: vec![T::zero(); n],
        }
    }
}

const MAX_PIVOTS: usize = 200_000;

struct Tableau<T> {
    /// Constraint rows; the last entry of each row is the right-hand side.
    rows: Vec<Vec<T>>,
    /// Reduced costs; the last entry is minus the objective value.
    obj: Vec<T>,
    basis: Vec<usize>,
    n_struct: usize,
    iterations: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl<T: Scalar> Tableau<T> {
    fn width(&self) -> usize {
        self.obj.len() - 1
    }

    fn clean(v: &mut T) {
        let tol = T::zero_tolerance();
        if !tol.is_zero() && v.abs() < tol.clone() * T::from_f64(1e-3).unwrap_or_else(T::zero) {
            *v = T::zero();
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.rows[row].len();
        let p = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v = v.clone() / p.clone();
        }
        self.rows[row][col] = T::one();
        let prow = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let f = r[col].clone();
            for j in 0..width {
                if prow[j].is_zero() {
                    continue;
                }
                r[j] = r[j].clone() - f.clone() * prow[j].clone();
                Self::clean(&mut r[j]);
            }
            r[col] = T::zero();
        }
        if !self.obj[col].is_zero() {
            let f = self.obj[col].clone();
            for j in 0..width {
                if prow[j].is_zero() {
                    continue;
                }
                self.obj[j] = self.obj[j].clone() - f.clone() * prow[j].clone();
                Self::clean(&mut self.obj[j]);
            }
            self.obj[col] = T::zero();
        }
        self.basis[row] = col;
        self.iterations += 1;
    }

    /// Bland's rule: lowest-index improving column, ratio ties to the
    /// lowest-index basic variable.
    fn run(&mut self, allowed: usize) -> Result<Outcome> {
        let tol = T::zero_tolerance();
        let neg_tol = -tol.clone();
        loop {
            if self.iterations > MAX_PIVOTS {
                return Err(Error::Internal("simplex pivot limit exceeded".into()));
            }
            let Some(col) = (0..allowed).find(|&j| self.obj[j] < neg_tol) else {
                return Ok(Outcome::Optimal);
            };
            let rhs = self.width();
            let mut best: Option<(usize, T)> = None;
            for (i, r) in self.rows.iter().enumerate() {
                if r[col] > tol {
                    let ratio = r[rhs].clone() / r[col].clone();
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => {
                            ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                None => return Ok(Outcome::Unbounded),
                Some((row, _)) => self.pivot(row, col),
            }
        }
    }
}

/// Dense two-phase primal simplex with Bland's anti-cycling rule.
pub fn simplex_solve<T: Scalar>(lp: &LpProblem<T>) -> Result<LpSolution<T>> {
    let (m, n) = lp.a.shape();
    if lp.b.len() != m || lp.c.len() != n {
        return Err(Error::input(format!(
            "LP shapes disagree: A is {m}x{n}, b has {}, c has {}",
            lp.b.len(),
            lp.c.len()
        )));
    }
    let finite = |v: &T| v.is_finite_value();
    let a_finite = (0..m).all(|i| lp.a.row(i).iter().all(finite));
    if !a_finite || !lp.b.iter().all(finite) || !lp.c.iter().all(finite) {
        return Err(Error::input("LP data contains a non-finite value"));
    }

    // phase one: artificial basis, rows flipped so that b ≥ 0
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    let mut bmax = T::zero();
    for i in 0..m {
        let flip = lp.b[i].is_negative();
        let mut r = vec![T::zero(); width + 1];
        for j in 0..n {
            r[j] = if flip { -lp.a[(i, j)].clone() } else { lp.a[(i, j)].clone() };
        }
        r[n + i] = T::one();
        r[width] = lp.b[i].abs();
        if r[width] > bmax {
            bmax = r[width].clone();
        }
        rows.push(r);
    }
    let mut obj = vec![T::zero(); width + 1];
    for r in &rows {
        for j in 0..n {
            obj[j] = obj[j].clone() - r[j].clone();
        }
        obj[width] = obj[width].clone() - r[width].clone();
    }
    let mut tab = Tableau {
        rows,
        obj,
        basis: (n..n + m).collect(),
        n_struct: n,
        iterations: 0,
    };
    tab.run(width)?;

    let infeas = -tab.obj[width].clone();
    let phase1_tol = T::zero_tolerance() * T::from_int(100) * (T::one() + bmax);
    if infeas > phase1_tol {
        return Ok(LpSolution::without_point(LpStatus::Infeasible, n, tab.iterations));
    }

    // drive artificials out of the basis; rows that cannot be are redundant
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= n {
            let mut col: Option<usize> = None;
            for j in 0..n {
                let v = tab.rows[i][j].abs();
                if !v.is_negligible() && col.map_or(true, |c| v > tab.rows[i][c].abs()) {
                    col = Some(j);
                }
            }
            match col {
                Some(j) => {
                    tab.pivot(i, j);
                    i += 1;
                }
                None => {
                    tab.rows.remove(i);
                    tab.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    // phase two over structural columns only
    let mut obj = vec![T::zero(); width + 1];
    obj[..n].clone_from_slice(&lp.c);
    for (r, &bv) in tab.rows.iter().zip(&tab.basis) {
        let cb = lp.c[bv].clone();
        if cb.is_zero() {
            continue;
        }
        for j in 0..=width {
            obj[j] = obj[j].clone() - cb.clone() * r[j].clone();
        }
    }
    tab.obj = obj;
    let outcome = tab.run(tab.n_struct)?;
    if let Outcome::Unbounded = outcome {
        return Ok(LpSolution::without_point(LpStatus::Unbounded, n, tab.iterations));
    }

    let mut x = vec![T::zero(); n];
    for (r, &bv) in tab.rows.iter().zip(&tab.basis) {
        x[bv] = r[width].clone();
    }
    let objective = x
        .iter()
        .zip(&lp.c)
        .fold(T::zero(), |acc, (xi, ci)| acc + xi.clone() * ci.clone());
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
        iterations: tab.iterations,
        reduced_costs: tab.obj[..n].to_vec(),
    })
}
