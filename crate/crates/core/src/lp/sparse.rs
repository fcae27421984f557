use crate::error::Result;
use crate::opcount::{GoalDelta, TransformSystem};

use super::simplex::{simplex_solve, LpProblem, LpSolution, LpStatus};

/// `min Σ C_j x_j  s.t.  M·x = d, x ≥ 0`.
pub fn l1_lp(ts: &TransformSystem, d: &GoalDelta) -> Result<LpSolution<f64>> {
    weighted_lp(ts, d, ts.costs_f64().to_vec())
}

fn weighted_lp(ts: &TransformSystem, d: &GoalDelta, weights: Vec<f64>) -> Result<LpSolution<f64>> {
    simplex_solve(&LpProblem {
        a: ts.m_f64(),
        b: d.as_f64(),
        c: weights,
    })
}

/// New weight for a column from its cost, last count and `eps`.
pub type WeightUpdate = fn(cost: f64, x: f64, eps: f64) -> f64;

/// `w = C / (x + eps)`.
pub fn standard_weight(cost: f64, x: f64, eps: f64) -> f64 {
    cost / (x.max(0.0) + eps)
}

#[derive(Clone, Copy, Debug)]
pub struct ReweightConfig {
    pub eps: f64,
    pub max_iters: usize,
    pub update: WeightUpdate,
    /// Stop once successive iterates differ by less than this in max norm.
    pub tol: f64,
}

impl Default for ReweightConfig {
    fn default() -> Self {
        ReweightConfig {
            eps: 0.1,
            max_iters: 10,
            update: standard_weight,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReweightStep {
    pub x: Vec<f64>,
    /// `Σ C_j · ln(x_j + eps)`, the concave surrogate the reweighting descends.
    pub surrogate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reweighted {
    pub solution: LpSolution<f64>,
    pub trace: Vec<ReweightStep>,
}

/// Iteratively reweighted l1: start from the costs, re-solve with weights
/// derived from the previous counts until the counts stop moving.
pub fn reweighted_l1(ts: &TransformSystem, d: &GoalDelta, cfg: &ReweightConfig) -> Result<Reweighted> {
    assert!(cfg.eps > 0.0, "eps must be positive");
    assert!(cfg.max_iters >= 1, "need at least one iteration");
    let costs = ts.costs_f64();
    let surrogate = |x: &[f64]| -> f64 {
        costs
            .iter()
            .zip(x)
            .map(|(c, v)| c * (v.max(0.0) + cfg.eps).ln())
            .sum()
    };

    let mut weights = costs.to_vec();
    let mut trace: Vec<ReweightStep> = Vec::new();
    let mut last: Option<LpSolution<f64>> = None;
    for _ in 0..cfg.max_iters {
        let sol = weighted_lp(ts, d, weights.clone())?;
        if sol.status != LpStatus::Optimal {
            return Ok(Reweighted {
                solution: sol,
                trace,
            });
        }
        let converged = trace.last().is_some_and(|prev| {
            prev.x
                .iter()
                .zip(&sol.x)
                .all(|(a, b)| (a - b).abs() < cfg.tol)
        });
        trace.push(ReweightStep {
            x: sol.x.clone(),
            surrogate: surrogate(&sol.x),
        });
        weights = costs
            .iter()
            .zip(&sol.x)
            .map(|(&c, &x)| (cfg.update)(c, x, cfg.eps))
            .collect();
        last = Some(sol);
        if converged {
            break;
        }
    }
    let mut solution = last.expect("at least one iteration ran");
    // report the true cost of the final counts, not the weighted objective
    solution.objective = costs.iter().zip(&solution.x).map(|(c, x)| c * x).sum();
    Ok(Reweighted { solution, trace })
}
