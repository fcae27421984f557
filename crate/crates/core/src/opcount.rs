//! The state transformation system `M·x = D` over goal compliant variables,
//! its precomputed closed-form factor, and landmark adjustments.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::linalg::{row_echelon_with_transform, solve_spd, EchelonResult, LinalgError, Matrix};
use crate::planning::{Goal, PlanningProblem, State};
use crate::scalar::Scalar;
use crate::{FloatMatrix, Rational, RationalMatrix};

/// Tolerance on `‖Y·Z − I‖∞` accepted at build time.
pub const RECONSTRUCTION_TOL: f64 = 1e-6;

/// `d_i = goal(f_i) − current(f_i)` over the goal compliant variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GoalDelta(pub Vec<i64>);

impl GoalDelta {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&v| v as f64).collect()
    }
}

/// An action that occurs at least `cardinality` times in every plan.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Landmark {
    pub action: usize,
    pub cardinality: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedForm {
    pub x: Vec<f64>,
    pub feasible: bool,
}

/// `T` rows scaled to integers: row `i` of `T` is `numer[i] / denom[i]`.
#[derive(Clone, Debug, PartialEq)]
struct ScaledTransform {
    numer: Vec<Vec<i64>>,
    denom: Vec<i64>,
}

impl ScaledTransform {
    fn new(t: &RationalMatrix) -> Option<Self> {
        let mut numer = Vec::with_capacity(t.rows());
        let mut denom = Vec::with_capacity(t.rows());
        for i in 0..t.rows() {
            let lcm = t
                .row(i)
                .iter()
                .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            let row = t
                .row(i)
                .iter()
                .map(|v| (v.numer() * (&lcm / v.denom())).to_i64())
                .collect::<Option<Vec<_>>>()?;
            numer.push(row);
            denom.push(lcm.to_i64()?);
        }
        Some(ScaledTransform { numer, denom })
    }

    /// Row `i` of `T·d`, scaled by `denom[i]`.
    fn scaled_row(&self, i: usize, d: &[i64]) -> i128 {
        self.numer[i]
            .iter()
            .zip(d)
            .map(|(&a, &b)| i128::from(a) * i128::from(b))
            .sum()
    }
}

/// Everything the closed-form and LP heuristics need that depends only on
/// the action model and the goal compliant variables, never on a state.
#[derive(Clone, Debug)]
pub struct TransformSystem {
    phi: Vec<usize>,
    goal_values: Vec<i64>,
    m: RationalMatrix,
    m_int: Vec<Vec<i64>>,
    costs: Vec<Rational>,
    costs_f64: Vec<f64>,
    echelon: EchelonResult<Rational>,
    scaled: Option<ScaledTransform>,
    z: FloatMatrix,
}

impl TransformSystem {
    /// Builds `M`, `Q`, the echelon transform and `Z` for a problem.
    pub fn build(problem: &PlanningProblem) -> Result<Self> {
        let phi = problem.goal_compliant_set();
        if phi.is_empty() {
            return Err(Error::NotApplicable);
        }
        let actions = problem.actions();
        let m_int: Vec<Vec<i64>> = phi
            .iter()
            .map(|&f| {
                actions
                    .iter()
                    .map(|a| a.effect_on(f).map_or(0, |e| e.delta()))
                    .collect()
            })
            .collect();
        let costs: Vec<Rational> = actions.iter().map(|a| a.cost.clone()).collect();
        let goal_values = phi.iter().map(|f| problem.goal()[f]).collect();
        let m = Matrix::from_fn(phi.len(), actions.len(), |i, j| Rational::from_int(m_int[i][j]));
        let echelon = row_echelon_with_transform(&m);
        Self::assemble(phi, goal_values, m, costs, echelon, None)
    }

    /// Rebuilds from stored parts, recomputing only `Z`; the echelon result is
    /// checked against `M` rather than recomputed.
    pub fn from_parts(
        phi: Vec<usize>,
        goal_values: Vec<i64>,
        m: RationalMatrix,
        costs: Vec<Rational>,
        echelon: EchelonResult<Rational>,
    ) -> Result<Self> {
        if echelon.transform.matmul(&m)? != echelon.reduced {
            return Err(Error::input("stored transform does not reduce M"));
        }
        Self::assemble(phi, goal_values, m, costs, echelon, None)
    }

    /// Like `from_parts` but reuses a stored `Z`, which must invert `Y`.
    pub fn from_stored(
        phi: Vec<usize>,
        goal_values: Vec<i64>,
        m: RationalMatrix,
        costs: Vec<Rational>,
        echelon: EchelonResult<Rational>,
        z: FloatMatrix,
    ) -> Result<Self> {
        if echelon.transform.matmul(&m)? != echelon.reduced {
            return Err(Error::input("stored transform does not reduce M"));
        }
        if z.shape() != (m.cols(), echelon.rank) {
            return Err(Error::input(format!(
                "stored Z is {:?}, expected {:?}",
                z.shape(),
                (m.cols(), echelon.rank)
            )));
        }
        let y = echelon.basis_rows().map(Scalar::to_f64_lossy);
        let err = y.matmul(&z)?.sub(&Matrix::identity(echelon.rank))?.max_abs();
        if !(err <= RECONSTRUCTION_TOL) {
            return Err(Error::input(format!("stored Z does not invert Y (error {err:e})")));
        }
        Self::assemble(phi, goal_values, m, costs, echelon, Some(z))
    }

    fn assemble(
        phi: Vec<usize>,
        goal_values: Vec<i64>,
        m: RationalMatrix,
        costs: Vec<Rational>,
        echelon: EchelonResult<Rational>,
        z: Option<FloatMatrix>,
    ) -> Result<Self> {
        let n = m.cols();
        if phi.len() != m.rows() || goal_values.len() != m.rows() || costs.len() != n {
            return Err(Error::input("transform system parts disagree in size"));
        }
        if let Some(j) = costs.iter().position(|c| !c.is_positive()) {
            return Err(Error::input(format!(
                "action #{j} has cost {} but the cost matrix must be invertible",
                costs[j]
            )));
        }
        let mut m_int = Vec::with_capacity(m.rows());
        for i in 0..m.rows() {
            let row = m
                .row(i)
                .iter()
                .map(|v| {
                    if v.is_integer() {
                        v.to_integer().to_i64()
                    } else {
                        None
                    }
                })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::input("M must hold integers"))?;
            m_int.push(row);
        }
        let costs_f64: Vec<f64> = costs.iter().map(Scalar::to_f64_lossy).collect();
        let z = match z {
            Some(z) => z,
            None => closed_form_factor(&echelon, &costs_f64)?,
        };
        let scaled = ScaledTransform::new(&echelon.transform);
        Ok(TransformSystem {
            phi,
            goal_values,
            m,
            m_int,
            costs,
            costs_f64,
            echelon,
            scaled,
            z,
        })
    }

    pub fn phi(&self) -> &[usize] {
        &self.phi
    }

    pub fn goal_values(&self) -> &[i64] {
        &self.goal_values
    }

    pub fn m(&self) -> &RationalMatrix {
        &self.m
    }

    pub fn m_rows(&self) -> &[Vec<i64>] {
        &self.m_int
    }

    pub fn m_f64(&self) -> FloatMatrix {
        Matrix::from_fn(self.m.rows(), self.m.cols(), |i, j| self.m_int[i][j] as f64)
    }

    pub fn n_rows(&self) -> usize {
        self.phi.len()
    }

    pub fn n_actions(&self) -> usize {
        self.m.cols()
    }

    pub fn costs(&self) -> &[Rational] {
        &self.costs
    }

    pub fn costs_f64(&self) -> &[f64] {
        &self.costs_f64
    }

    pub fn echelon(&self) -> &EchelonResult<Rational> {
        &self.echelon
    }

    pub fn rank(&self) -> usize {
        self.echelon.rank
    }

    pub fn z(&self) -> &FloatMatrix {
        &self.z
    }

    /// `d_i = goal(f_i) − s(f_i)`.
    pub fn build_delta(&self, s: &State, goal: &Goal) -> Result<GoalDelta> {
        self.phi
            .iter()
            .map(|f| {
                goal.get(f)
                    .map(|g| g - s.get(*f))
                    .ok_or_else(|| Error::input(format!("goal does not fix variable #{f}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(GoalDelta)
    }

    /// Delta against the goal the system was built for.
    pub fn delta(&self, s: &State) -> GoalDelta {
        GoalDelta(
            self.phi
                .iter()
                .zip(&self.goal_values)
                .map(|(&f, &g)| g - s.get(f))
                .collect(),
        )
    }

    /// Removes the net change of each landmark's required occurrences.
    pub fn apply_landmarks(&self, d: &GoalDelta, landmarks: &[Landmark]) -> Result<GoalDelta> {
        let mut out = d.0.clone();
        for lm in landmarks {
            if lm.action >= self.n_actions() {
                return Err(Error::input(format!("landmark names unknown action #{}", lm.action)));
            }
            let k = i64::try_from(lm.cardinality)
                .map_err(|_| Error::input("landmark cardinality too large"))?;
            for (i, row) in self.m_int.iter().enumerate() {
                out[i] -= k * row[lm.action];
            }
        }
        Ok(GoalDelta(out))
    }

    /// `(T·d)[..r]` as floats, or `None` when `d` is outside the row space of `M`.
    pub fn tau(&self, d: &GoalDelta) -> Option<Vec<f64>> {
        let r = self.rank();
        if d.0.len() != self.n_rows() {
            return None;
        }
        match &self.scaled {
            Some(st) => {
                if (r..self.n_rows()).any(|i| st.scaled_row(i, &d.0) != 0) {
                    return None;
                }
                Some(
                    (0..r)
                        .map(|i| st.scaled_row(i, &d.0) as f64 / st.denom[i] as f64)
                        .collect(),
                )
            }
            None => {
                let exact: Vec<Rational> = d.0.iter().map(|&v| Rational::from_int(v)).collect();
                let res = self.echelon.residual(&exact).ok()?;
                res.feasible
                    .then(|| res.tau.iter().map(Scalar::to_f64_lossy).collect())
            }
        }
    }

    /// True when no count vector, even a real one, satisfies `M·x = d`.
    pub fn is_infeasible(&self, d: &GoalDelta) -> bool {
        self.tau(d).is_none()
    }

    /// Minimizer of `‖Q·x‖₂` over `M·x = d`, as `Z·τ`.
    pub fn closed_form_counts(&self, d: &GoalDelta) -> ClosedForm {
        match self.tau(d) {
            None => ClosedForm {
                x: vec![0.0; self.n_actions()],
                feasible: false,
            },
            Some(tau) => ClosedForm {
                x: self.z.matvec(&tau).expect("Z has rank columns"),
                feasible: true,
            },
        }
    }

    /// Exact check of `M·x = d` for an integer count vector.
    pub fn satisfies_flow(&self, x: &[u64], d: &GoalDelta) -> bool {
        if x.len() != self.n_actions() || d.0.len() != self.n_rows() {
            return false;
        }
        let xs: Vec<Rational> = x
            .iter()
            .map(|&v| Rational::from_integer(BigInt::from(v)))
            .collect();
        let lhs = self.m.matvec(&xs).expect("shape checked");
        lhs.iter()
            .zip(&d.0)
            .all(|(l, &r)| *l == Rational::from_integer(BigInt::from(r)))
    }
}

/// `Z = Q⁻²Yᵀ(YQ⁻²Yᵀ)⁻¹` with `Y` the nonzero rows of the echelon form.
fn closed_form_factor(echelon: &EchelonResult<Rational>, costs: &[f64]) -> Result<FloatMatrix> {
    let y = echelon.basis_rows().map(Scalar::to_f64_lossy);
    let (r, n) = y.shape();
    let inv_q2: Vec<f64> = costs.iter().map(|c| 1.0 / (c * c)).collect();
    // Y·Q⁻² (r×n) and the Gram matrix Y·Q⁻²·Yᵀ (r×r)
    let yq = Matrix::from_fn(r, n, |i, j| y[(i, j)] * inv_q2[j]);
    let gram = yq.matmul(&y.transpose())?;
    let z = if r == 0 {
        Matrix::zeros(n, 0)
    } else {
        solve_spd(&gram, &yq)?.transpose()
    };
    let recon = y.matmul(&z)?.sub(&Matrix::identity(r))?.max_abs();
    if recon > RECONSTRUCTION_TOL {
        return Err(Error::Linalg(LinalgError::NotPositiveDefinite { pivot: r }));
    }
    Ok(z)
}
