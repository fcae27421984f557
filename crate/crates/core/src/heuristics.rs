//! Uniform state evaluation for the closed-form, l1, reweighted-l1 and
//! integer operator-count heuristics.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lp::{l1_lp, milp_branch_bound, reweighted_l1, LpStatus, MilpStatus, ReweightConfig};
use crate::opcount::{GoalDelta, Landmark, TransformSystem};
use crate::planning::{Goal, State};
use crate::scalar::{ceil_nonneg, ceil_rational};
use crate::Rational;

/// Values within this much above an integer round down to it.
pub const ROUNDING_SLACK: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HeuristicKind {
    Cc,
    L1Lp,
    Wl1Lp,
    L1Milp,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 4] = [
        HeuristicKind::Cc,
        HeuristicKind::L1Lp,
        HeuristicKind::Wl1Lp,
        HeuristicKind::L1Milp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HeuristicKind::Cc => "cc",
            HeuristicKind::L1Lp => "l1",
            HeuristicKind::Wl1Lp => "wl1",
            HeuristicKind::L1Milp => "milp",
        }
    }

    /// Whether the value never exceeds the optimal remaining cost.
    pub fn is_admissible(self) -> bool {
        matches!(self, HeuristicKind::L1Lp | HeuristicKind::L1Milp)
    }
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HeuristicKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        HeuristicKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::input(format!("unknown heuristic `{s}` (cc|l1|wl1|milp)")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HeuristicValue {
    Value(u64),
    DeadEnd,
}

impl HeuristicValue {
    pub fn value(self) -> Option<u64> {
        match self {
            HeuristicValue::Value(v) => Some(v),
            HeuristicValue::DeadEnd => None,
        }
    }

    pub fn is_dead_end(self) -> bool {
        self == HeuristicValue::DeadEnd
    }
}

impl serde::Serialize for HeuristicValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            HeuristicValue::Value(v) => s.serialize_u64(*v),
            HeuristicValue::DeadEnd => s.serialize_str("dead-end"),
        }
    }
}

impl fmt::Display for HeuristicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeuristicValue::Value(v) => write!(f, "{v}"),
            HeuristicValue::DeadEnd => f.write_str("dead-end"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct HeuristicConfig {
    pub reweight: ReweightConfig,
    pub milp_node_limit: usize,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            reweight: ReweightConfig::default(),
            milp_node_limit: 100_000,
        }
    }
}

/// A heuristic value with the unrounded quantity behind it.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub value: HeuristicValue,
    /// Cost-weighted count before the final ceiling, when one exists.
    pub raw: Option<f64>,
    /// The integer solver hit its node limit and the LP value was used.
    pub fell_back: bool,
}

impl Evaluation {
    fn dead() -> Self {
        Evaluation {
            value: HeuristicValue::DeadEnd,
            raw: None,
            fell_back: false,
        }
    }

    fn zero() -> Self {
        Evaluation {
            value: HeuristicValue::Value(0),
            raw: Some(0.0),
            fell_back: false,
        }
    }
}

/// Evaluates one heuristic at `s`. `ts = None` stands for a problem without
/// goal compliant variables, where every heuristic is zero.
pub fn evaluate(
    kind: HeuristicKind,
    ts: Option<&TransformSystem>,
    s: &State,
    goal: &Goal,
    landmarks: &[Landmark],
    cfg: &HeuristicConfig,
) -> Result<HeuristicValue> {
    evaluate_detailed(kind, ts, s, goal, landmarks, cfg).map(|e| e.value)
}

pub fn evaluate_detailed(
    kind: HeuristicKind,
    ts: Option<&TransformSystem>,
    s: &State,
    goal: &Goal,
    landmarks: &[Landmark],
    cfg: &HeuristicConfig,
) -> Result<Evaluation> {
    let Some(ts) = ts else {
        return Ok(Evaluation::zero());
    };
    let d = ts.build_delta(s, goal)?;
    let d = ts.apply_landmarks(&d, landmarks)?;
    evaluate_delta(kind, ts, &d, cfg)
}

/// Evaluates a heuristic on an already-built goal delta.
pub fn evaluate_delta(
    kind: HeuristicKind,
    ts: &TransformSystem,
    d: &GoalDelta,
    cfg: &HeuristicConfig,
) -> Result<Evaluation> {
    if d.is_zero() {
        return Ok(Evaluation::zero());
    }
    let Some(tau) = ts.tau(d) else {
        return Ok(Evaluation::dead());
    };
    match kind {
        HeuristicKind::Cc => {
            let x = ts.z().matvec(&tau)?;
            let raw: f64 = ts.costs_f64().iter().zip(&x).map(|(c, v)| c * v.abs()).sum();
            Ok(Evaluation {
                value: HeuristicValue::Value(ceil_nonneg(raw, ROUNDING_SLACK)),
                raw: Some(raw),
                fell_back: false,
            })
        }
        HeuristicKind::L1Lp => l1_value(ts, d),
        HeuristicKind::Wl1Lp => {
            let r = reweighted_l1(ts, d, &cfg.reweight)?;
            if r.solution.status != LpStatus::Optimal {
                return Ok(Evaluation::dead());
            }
            let total = ts
                .costs()
                .iter()
                .zip(&r.solution.x)
                .fold(Rational::zero(), |acc, (c, &x)| {
                    let k = ceil_nonneg(x, ROUNDING_SLACK);
                    acc + c * Rational::from_integer(BigInt::from(k))
                });
            Ok(Evaluation {
                value: HeuristicValue::Value(ceil_rational(&total)),
                raw: Some(r.solution.objective),
                fell_back: false,
            })
        }
        HeuristicKind::L1Milp => {
            let sol = milp_branch_bound(ts, d, cfg.milp_node_limit)?;
            match sol.status {
                MilpStatus::Optimal => {
                    let cost = ts
                        .costs()
                        .iter()
                        .zip(&sol.x)
                        .fold(Rational::zero(), |acc, (c, &x)| {
                            acc + c * Rational::from_integer(BigInt::from(x))
                        });
                    Ok(Evaluation {
                        value: HeuristicValue::Value(ceil_rational(&cost)),
                        raw: Some(sol.objective),
                        fell_back: false,
                    })
                }
                MilpStatus::Infeasible => Ok(Evaluation::dead()),
                MilpStatus::NodeLimit => {
                    let mut e = l1_value(ts, d)?;
                    e.fell_back = true;
                    Ok(e)
                }
            }
        }
    }
}

fn l1_value(ts: &TransformSystem, d: &GoalDelta) -> Result<Evaluation> {
    let sol = l1_lp(ts, d)?;
    match sol.status {
        LpStatus::Optimal => Ok(Evaluation {
            value: HeuristicValue::Value(ceil_nonneg(sol.objective, ROUNDING_SLACK)),
            raw: Some(sol.objective),
            fell_back: false,
        }),
        // positive costs cannot be unbounded; infeasible means no count vector
        _ => Ok(Evaluation::dead()),
    }
}

/// `d` lies outside the row space of `M`: no plan exists from `s`.
pub fn is_dead_end(ts: Option<&TransformSystem>, s: &State, goal: &Goal) -> bool {
    match ts {
        None => false,
        Some(ts) => ts
            .build_delta(s, goal)
            .map(|d| ts.is_infeasible(&d))
            .unwrap_or(false),
    }
}
