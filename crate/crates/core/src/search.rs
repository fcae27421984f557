//! Forward state-space search with operator-count heuristics and
//! dead-end pruning, plus the uniform-cost optimal oracle.

use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::heuristics::{evaluate, is_dead_end, HeuristicConfig, HeuristicKind, HeuristicValue};
use crate::opcount::{Landmark, TransformSystem};
use crate::planning::{apply_action, entails_goal, Plan, PlanningProblem, State};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    AStar,
    Gbfs,
    Ucs,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "astar" => Ok(Algorithm::AStar),
            "gbfs" => Ok(Algorithm::Gbfs),
            "ucs" => Ok(Algorithm::Ucs),
            _ => Err(Error::input(format!("unknown search `{s}` (astar|gbfs|ucs)"))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::AStar => "astar",
            Algorithm::Gbfs => "gbfs",
            Algorithm::Ucs => "ucs",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub algorithm: Algorithm,
    pub heuristic: Option<HeuristicKind>,
    pub node_budget: usize,
    pub landmarks: Vec<Landmark>,
    pub prune_dead_ends: bool,
    pub heuristic_config: HeuristicConfig,
}

impl SearchConfig {
    pub const DEFAULT_BUDGET: usize = 1_000_000;

    pub fn new(algorithm: Algorithm, heuristic: Option<HeuristicKind>) -> Result<Self> {
        if algorithm == Algorithm::Ucs && heuristic.is_some() {
            return Err(Error::input("uniform-cost search takes no heuristic"));
        }
        if algorithm != Algorithm::Ucs && heuristic.is_none() {
            return Err(Error::input(format!("{algorithm} needs a heuristic")));
        }
        Ok(SearchConfig {
            algorithm,
            heuristic,
            node_budget: Self::DEFAULT_BUDGET,
            landmarks: Vec::new(),
            prune_dead_ends: true,
            heuristic_config: HeuristicConfig::default(),
        })
    }

    pub fn ucs() -> Self {
        Self::new(Algorithm::Ucs, None).expect("valid")
    }

    pub fn with_budget(mut self, budget: usize) -> Result<Self> {
        if budget == 0 {
            return Err(Error::input("node budget must be at least 1"));
        }
        self.node_budget = budget;
        Ok(self)
    }

    /// A* with an inadmissible heuristic, or any greedy search.
    pub fn is_satisficing(&self) -> bool {
        match self.algorithm {
            Algorithm::Ucs => false,
            Algorithm::Gbfs => true,
            Algorithm::AStar => !self.heuristic.is_some_and(HeuristicKind::is_admissible),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchStatus {
    Solved,
    ProvenUnsolvable,
    BudgetExhausted,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub status: SearchStatus,
    pub plan: Option<Plan>,
    pub cost: Option<Rational>,
    pub nodes_expanded: usize,
    pub nodes_generated: usize,
    pub initial_h: HeuristicValue,
    pub satisficing: bool,
}

/// Min-ordered open-list key: primary, then h, then insertion order.
struct OpenEntry {
    primary: Rational,
    h: u64,
    seq: u64,
    node: usize,
    g: Rational,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .primary
            .cmp(&self.primary)
            .then_with(|| other.h.cmp(&self.h))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Builds the transform system (if applicable) and searches.
pub fn search(problem: &PlanningProblem, cfg: &SearchConfig) -> Result<SearchResult> {
    let ts = match TransformSystem::build(problem) {
        Ok(ts) => Some(ts),
        Err(Error::NotApplicable) => None,
        Err(e) => return Err(e),
    };
    search_with_system(problem, ts.as_ref(), cfg)
}

pub fn search_with_system(
    problem: &PlanningProblem,
    ts: Option<&TransformSystem>,
    cfg: &SearchConfig,
) -> Result<SearchResult> {
    if cfg.node_budget == 0 {
        return Err(Error::input("node budget must be at least 1"));
    }
    let goal = problem.goal();
    let satisficing = cfg.is_satisficing();
    let h_of = |s: &State| -> Result<HeuristicValue> {
        if cfg.prune_dead_ends && is_dead_end(ts, s, goal) {
            return Ok(HeuristicValue::DeadEnd);
        }
        let v = match cfg.heuristic {
            None => HeuristicValue::Value(0),
            Some(kind) => evaluate(kind, ts, s, goal, &cfg.landmarks, &cfg.heuristic_config)?,
        };
        Ok(match v {
            HeuristicValue::DeadEnd if !cfg.prune_dead_ends => HeuristicValue::Value(0),
            v => v,
        })
    };

    let init = problem.init().clone();
    let initial_h = h_of(&init)?;
    let mut result = SearchResult {
        status: SearchStatus::ProvenUnsolvable,
        plan: None,
        cost: None,
        nodes_expanded: 0,
        nodes_generated: 1,
        initial_h,
        satisficing,
    };
    let Some(h0) = initial_h.value() else {
        return Ok(result);
    };

    let mut states: Vec<State> = vec![init.clone()];
    let mut index: HashMap<State, usize> = HashMap::from([(init, 0)]);
    let mut best_g: Vec<Rational> = vec![Rational::zero()];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None];
    let mut h_cache: Vec<u64> = vec![h0];
    let mut seq = 0u64;
    let key = |g: &Rational, h: u64| -> Rational {
        match cfg.algorithm {
            Algorithm::AStar => g + Rational::from_integer(h.into()),
            Algorithm::Gbfs => Rational::from_integer(h.into()),
            Algorithm::Ucs => g.clone(),
        }
    };
    let mut open = BinaryHeap::new();
    open.push(OpenEntry {
        primary: key(&Rational::zero(), h0),
        h: h0,
        seq,
        node: 0,
        g: Rational::zero(),
    });

    while let Some(entry) = open.pop() {
        let id = entry.node;
        if entry.g > best_g[id] {
            continue;
        }
        if entries_goal(&states[id], problem) {
            let plan = extract_plan(&parent, id);
            let cost = problem.plan_cost(&plan)?;
            if !problem.validate_plan(&plan) || cost != best_g[id] {
                return Err(Error::Internal("search produced an invalid plan".into()));
            }
            log::debug!(
                "solved: cost {cost}, {} expanded, {} generated",
                result.nodes_expanded,
                result.nodes_generated
            );
            result.status = SearchStatus::Solved;
            result.plan = Some(plan);
            result.cost = Some(cost);
            return Ok(result);
        }
        if result.nodes_expanded >= cfg.node_budget {
            log::info!("node budget of {} exhausted", cfg.node_budget);
            result.status = SearchStatus::BudgetExhausted;
            return Ok(result);
        }
        result.nodes_expanded += 1;

        let state = states[id].clone();
        for (a_idx, action) in problem.actions().iter().enumerate() {
            let Some(child) = apply_action(action, &state) else {
                continue;
            };
            let g = &entry.g + &action.cost;
            let cid = match index.entry(child) {
                Entry::Occupied(o) => {
                    let cid = *o.get();
                    if g >= best_g[cid] {
                        continue;
                    }
                    best_g[cid] = g.clone();
                    parent[cid] = Some((id, a_idx));
                    cid
                }
                Entry::Vacant(v) => {
                    let h = h_of(v.key())?;
                    result.nodes_generated += 1;
                    let Some(h) = h.value() else {
                        continue;
                    };
                    let cid = states.len();
                    states.push(v.key().clone());
                    v.insert(cid);
                    best_g.push(g.clone());
                    parent.push(Some((id, a_idx)));
                    h_cache.push(h);
                    cid
                }
            };
            seq += 1;
            let h = h_cache[cid];
            open.push(OpenEntry {
                primary: key(&g, h),
                h,
                seq,
                node: cid,
                g,
            });
        }
    }
    log::debug!("open list empty after {} expansions", result.nodes_expanded);
    Ok(result)
}

fn entries_goal(s: &State, problem: &PlanningProblem) -> bool {
    entails_goal(s, problem.goal())
}

fn extract_plan(parent: &[Option<(usize, usize)>], mut id: usize) -> Plan {
    let mut steps = Vec::new();
    while let Some((p, a)) = parent[id] {
        steps.push(a);
        id = p;
    }
    steps.reverse();
    Plan::new(steps)
}

#[derive(Clone, Debug, PartialEq)]
pub enum OracleOutcome {
    Optimal { cost: Rational, plan: Plan },
    Unsolvable,
    BudgetExhausted,
}

impl OracleOutcome {
    pub fn cost(&self) -> Option<&Rational> {
        match self {
            OracleOutcome::Optimal { cost, .. } => Some(cost),
            _ => None,
        }
    }
}

/// Exact optimal cost by uniform-cost search without any pruning.
pub fn optimal_cost_oracle(problem: &PlanningProblem, budget: usize) -> Result<OracleOutcome> {
    let mut cfg = SearchConfig::ucs().with_budget(budget)?;
    cfg.prune_dead_ends = false;
    let r = search_with_system(problem, None, &cfg)?;
    Ok(match r.status {
        SearchStatus::Solved => OracleOutcome::Optimal {
            cost: r.cost.expect("solved"),
            plan: r.plan.expect("solved"),
        },
        SearchStatus::ProvenUnsolvable => OracleOutcome::Unsolvable,
        SearchStatus::BudgetExhausted => OracleOutcome::BudgetExhausted,
    })
}
