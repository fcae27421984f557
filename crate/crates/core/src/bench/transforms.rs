//! The two compliance-raising problem transformations.

use crate::error::{Error, Result};
use crate::planning::{Goal, PlanningProblem, UNSPECIFIED};
use crate::search::{optimal_cost_oracle, OracleOutcome};

use super::domains::{RaiseRules, ORACLE_BUDGET};

/// Replaces don't-care slots with the values named by `rules`.
pub fn raise_compliance(p: &PlanningProblem, rules: &RaiseRules) -> Result<PlanningProblem> {
    let mut actions = p.actions().to_vec();
    for ((action, var), &(from, to)) in rules {
        let a = p
            .action_index(action)
            .ok_or_else(|| Error::input(format!("raise rule names unknown action `{action}`")))?;
        let v = p
            .var_index(var)
            .ok_or_else(|| Error::input(format!("raise rule names unknown variable `{var}`")))?;
        let spec = &p.variables()[v];
        if !spec.contains(from) || !spec.contains(to) {
            return Err(Error::input(format!(
                "raise rule ({action}, {var}) -> ({from}, {to}) leaves the domain [{}, {}]",
                spec.lo, spec.hi
            )));
        }
        let triple = actions[a]
            .effects
            .iter_mut()
            .find(|e| e.var == v)
            .ok_or_else(|| Error::input(format!("action `{action}` has no triple on `{var}`")))?;
        if triple.from != UNSPECIFIED && triple.to != UNSPECIFIED {
            return Err(Error::input(format!(
                "raise rule ({action}, {var}) targets a triple without a -1 slot"
            )));
        }
        for (slot, new) in [(&mut triple.from, from), (&mut triple.to, to)] {
            if *slot == UNSPECIFIED {
                *slot = new;
            } else if *slot != new {
                return Err(Error::input(format!(
                    "raise rule ({action}, {var}) rewrites a specified value {} to {new}",
                    *slot
                )));
            }
        }
    }
    p.with_actions(actions)
}

/// Extends the goal to the final state of one optimal plan.
pub fn complete_goal(p: &PlanningProblem) -> Result<PlanningProblem> {
    let plan = match optimal_cost_oracle(p, ORACLE_BUDGET)? {
        OracleOutcome::Optimal { plan, .. } => plan,
        OracleOutcome::Unsolvable => return Err(Error::input("cannot complete the goal of an unsolvable problem")),
        OracleOutcome::BudgetExhausted => {
            return Err(Error::input("oracle budget exhausted while completing the goal"))
        }
    };
    let end = p
        .apply_plan(&plan, p.init())?
        .ok_or_else(|| Error::Internal("oracle plan is not applicable".into()))?;
    let goal: Goal = end.values().iter().copied().enumerate().collect();
    p.with_init_and_goal(p.init().clone(), goal)
}
