use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::opcount::{GoalDelta, TransformSystem};

use super::simplex::{simplex_solve, LpProblem, LpStatus};

const INTEGRALITY_TOL: f64 = 1e-6;
const PRUNE_TOL: f64 = 1e-9;

/// `min c·x  s.t.  A·x = b, x ∈ ℤ≥0ⁿ` with integer `A` and `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegerProgram {
    pub a: Vec<Vec<i64>>,
    pub b: Vec<i64>,
    pub c: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    NodeLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Best integer point found; all zeros when there is none.
    pub x: Vec<u64>,
    pub objective: f64,
    pub nodes_explored: usize,
    pub has_incumbent: bool,
}

#[derive(Debug)]
struct Node {
    bound: f64,
    seq: usize,
    lo: Vec<i64>,
    hi: Vec<Option<i64>>,
    x: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // max-heap: smaller bound first, then older node first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl IntegerProgram {
    fn n(&self) -> usize {
        self.c.len()
    }

    fn check(&self) -> Result<()> {
        if self.a.len() != self.b.len() || self.a.iter().any(|r| r.len() != self.n()) {
            return Err(Error::input("integer program shapes disagree"));
        }
        if self.c.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::input("integer program costs must be finite and nonnegative"));
        }
        Ok(())
    }

    pub fn is_feasible_point(&self, x: &[u64]) -> bool {
        x.len() == self.n()
            && self.a.iter().zip(&self.b).all(|(row, &bi)| {
                row.iter()
                    .zip(x)
                    .map(|(&a, &v)| i128::from(a) * i128::from(v))
                    .sum::<i128>()
                    == i128::from(bi)
            })
    }

    /// LP relaxation over the box `lo ≤ x ≤ hi`, shifted so that `y = x − lo ≥ 0`.
    fn relax(&self, lo: &[i64], hi: &[Option<i64>]) -> Result<Option<(f64, Vec<f64>)>> {
        let n = self.n();
        let m = self.a.len();
        let bounded: Vec<usize> = (0..n).filter(|&j| hi[j].is_some()).collect();
        if bounded.iter().any(|&j| hi[j].unwrap() < lo[j]) {
            return Ok(None);
        }
        let width = n + bounded.len();
        let rows = m + bounded.len();
        let mut a = Matrix::zeros(rows, width);
        let mut b = vec![0.0; rows];
        for i in 0..m {
            let shift: i64 = (0..n).map(|j| self.a[i][j] * lo[j]).sum();
            for j in 0..n {
                a[(i, j)] = self.a[i][j] as f64;
            }
            b[i] = (self.b[i] - shift) as f64;
        }
        for (k, &j) in bounded.iter().enumerate() {
            a[(m + k, j)] = 1.0;
            a[(m + k, n + k)] = 1.0;
            b[m + k] = (hi[j].unwrap() - lo[j]) as f64;
        }
        let mut c = self.c.clone();
        c.resize(width, 0.0);
        let sol = simplex_solve(&LpProblem { a, b, c })?;
        match sol.status {
            LpStatus::Optimal => {
                let x: Vec<f64> = (0..n).map(|j| sol.x[j] + lo[j] as f64).collect();
                let obj = x.iter().zip(&self.c).map(|(v, c)| v * c).sum();
                Ok(Some((obj, x)))
            }
            _ => Ok(None),
        }
    }

    /// Best-first branch and bound on the most fractional variable.
    pub fn solve(&self, node_limit: usize) -> Result<MilpSolution> {
        self.check()?;
        let n = self.n();
        let mut incumbent: Option<(f64, Vec<u64>)> = None;
        let mut nodes = 0usize;
        let mut seq = 0usize;
        let mut open = BinaryHeap::new();

        let lo = vec![0i64; n];
        let hi = vec![None; n];
        nodes += 1;
        if let Some((bound, x)) = self.relax(&lo, &hi)? {
            open.push(Node { bound, seq, lo, hi, x });
            seq += 1;
        }

        let mut hit_limit = false;
        while let Some(node) = open.pop() {
            if let Some((best, _)) = &incumbent {
                if node.bound >= best - PRUNE_TOL {
                    continue;
                }
            }
            let branch = most_fractional(&node.x);
            let Some(j) = branch else {
                let point: Vec<u64> = node.x.iter().map(|v| v.round().max(0.0) as u64).collect();
                if self.is_feasible_point(&point) {
                    let obj = point.iter().zip(&self.c).map(|(&v, c)| v as f64 * c).sum();
                    if incumbent.as_ref().map_or(true, |(best, _)| obj < *best) {
                        incumbent = Some((obj, point));
                    }
                }
                continue;
            };
            if nodes >= node_limit {
                hit_limit = true;
                break;
            }
            let v = node.x[j];
            let mut down_hi = node.hi.clone();
            down_hi[j] = Some(v.floor() as i64);
            let mut up_lo = node.lo.clone();
            up_lo[j] = v.ceil() as i64;
            for (lo, hi) in [(node.lo.clone(), down_hi), (up_lo, node.hi.clone())] {
                nodes += 1;
                if let Some((bound, x)) = self.relax(&lo, &hi)? {
                    let dominated = incumbent
                        .as_ref()
                        .is_some_and(|(best, _)| bound >= best - PRUNE_TOL);
                    if !dominated {
                        open.push(Node { bound, seq, lo, hi, x });
                        seq += 1;
                    }
                }
            }
        }

        let status = if hit_limit {
            MilpStatus::NodeLimit
        } else if incumbent.is_some() {
            MilpStatus::Optimal
        } else {
            MilpStatus::Infeasible
        };
        let has_incumbent = incumbent.is_some();
        let (objective, x) = incumbent.unwrap_or((0.0, vec![0; n]));
        Ok(MilpSolution {
            status,
            x,
            objective,
            nodes_explored: nodes,
            has_incumbent,
        })
    }
}

/// Index whose fractional part is closest to one half; lowest index on ties.
fn most_fractional(x: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &v) in x.iter().enumerate() {
        let frac = v - v.floor();
        let dist = frac.min(1.0 - frac);
        if dist <= INTEGRALITY_TOL {
            continue;
        }
        if best.map_or(true, |(_, d)| dist > d) {
            best = Some((j, dist));
        }
    }
    best.map(|(j, _)| j)
}

/// Minimum-cost nonnegative integer counts with `M·x = d`.
pub fn milp_branch_bound(ts: &TransformSystem, d: &GoalDelta, node_limit: usize) -> Result<MilpSolution> {
    IntegerProgram {
        a: ts.m_rows().to_vec(),
        b: d.0.clone(),
        c: ts.costs_f64().to_vec(),
    }
    .solve(node_limit)
}

/// Every `x ∈ {0..=bound}ⁿ` with `A·x = b`, in lexicographic order.
pub fn enumerate_integer_solutions(a: &[Vec<i64>], b: &[i64], bound: u64) -> Result<Vec<Vec<u64>>> {
    const BUDGET: f64 = 5e7;
    let n = a.first().map_or(0, Vec::len);
    if a.len() != b.len() || a.iter().any(|r| r.len() != n) {
        return Err(Error::input("system shapes disagree"));
    }
    if ((bound + 1) as f64).powi(n as i32) > BUDGET {
        return Err(Error::input(format!(
            "enumerating {}^{n} points exceeds the budget",
            bound + 1
        )));
    }
    let mut out = Vec::new();
    let mut x = vec![0u64; n];
    loop {
        let ok = a.iter().zip(b).all(|(row, &bi)| {
            row.iter().zip(&x).map(|(&c, &v)| c * v as i64).sum::<i64>() == bi
        });
        if ok {
            out.push(x.clone());
        }
        // odometer increment, last coordinate fastest
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            if x[k] < bound {
                x[k] += 1;
                break;
            }
            x[k] = 0;
        }
    }
}
