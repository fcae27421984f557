//! States, effect-triple actions, plan semantics and compliant variables.

use std::collections::{BTreeMap, HashMap};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::Rational;

/// Sentinel for "any value" in a precondition and "unchanged" in an effect.
pub const UNSPECIFIED: i64 = -1;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VariableSpec {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
}

impl VariableSpec {
    pub fn new(name: impl Into<String>, lo: i64, hi: i64) -> Self {
        VariableSpec {
            name: name.into(),
            lo,
            hi,
        }
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// `⟨var, from, to⟩`; either side may be [`UNSPECIFIED`], not both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EffectTriple {
    pub var: usize,
    pub from: i64,
    pub to: i64,
}

impl EffectTriple {
    pub fn new(var: usize, from: i64, to: i64) -> Self {
        EffectTriple { var, from, to }
    }

    pub fn is_concrete(&self) -> bool {
        self.from != UNSPECIFIED && self.to != UNSPECIFIED
    }

    /// Net change of the variable; only meaningful when concrete.
    pub fn delta(&self) -> i64 {
        self.to - self.from
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Action {
    pub name: String,
    pub cost: Rational,
    pub effects: Vec<EffectTriple>,
}

impl Action {
    pub fn new(name: impl Into<String>, cost: Rational, effects: Vec<EffectTriple>) -> Self {
        Action {
            name: name.into(),
            cost,
            effects,
        }
    }

    pub fn effect_on(&self, var: usize) -> Option<&EffectTriple> {
        self.effects.iter().find(|e| e.var == var)
    }
}

/// Total assignment, indexed by variable position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(Vec<i64>);

impl State {
    pub fn new(values: Vec<i64>) -> Self {
        State(values)
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn get(&self, var: usize) -> i64 {
        self.0[var]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Partial assignment; the goal of a problem.
pub type Goal = BTreeMap<usize, i64>;

/// Ordered action indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Plan {
    pub steps: Vec<usize>,
}

impl Plan {
    pub fn new(steps: Vec<usize>) -> Self {
        Plan { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn from_names<S: AsRef<str>>(problem: &PlanningProblem, names: &[S]) -> Result<Self> {
        names
            .iter()
            .map(|n| {
                problem
                    .action_index(n.as_ref())
                    .ok_or_else(|| Error::input(format!("unknown action `{}`", n.as_ref())))
            })
            .collect::<Result<Vec<_>>>()
            .map(Plan::new)
    }

    pub fn names<'a>(&self, problem: &'a PlanningProblem) -> Vec<&'a str> {
        self.steps
            .iter()
            .map(|&a| problem.actions()[a].name.as_str())
            .collect()
    }
}

/// Successor of `s` under `a`, or `None` when a precondition fails.
pub fn apply_action(a: &Action, s: &State) -> Option<State> {
    for e in &a.effects {
        if e.from != UNSPECIFIED && e.from != s.0[e.var] {
            return None;
        }
    }
    let mut next = s.0.clone();
    for e in &a.effects {
        if e.to != UNSPECIFIED {
            next[e.var] = e.to;
        }
    }
    Some(State(next))
}

/// True iff `s` agrees with `goal` on every variable the goal mentions.
pub fn entails_goal(s: &State, goal: &Goal) -> bool {
    goal.iter().all(|(&v, &val)| s.0[v] == val)
}

/// `λ(a, π)` for every action, in action order.
pub fn operator_counts(plan: &Plan, n_actions: usize) -> Vec<u64> {
    let mut counts = vec![0u64; n_actions];
    for &a in &plan.steps {
        counts[a] += 1;
    }
    counts
}

/// Compliant/rogue split of the variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compliance {
    compliant: Vec<bool>,
}

impl Compliance {
    pub fn is_compliant(&self, var: usize) -> bool {
        self.compliant[var]
    }

    pub fn compliant(&self) -> Vec<usize> {
        (0..self.compliant.len()).filter(|&v| self.compliant[v]).collect()
    }

    pub fn rogue(&self) -> Vec<usize> {
        (0..self.compliant.len()).filter(|&v| !self.compliant[v]).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanningProblem {
    variables: Vec<VariableSpec>,
    actions: Vec<Action>,
    init: State,
    goal: Goal,
    var_lookup: HashMap<String, usize>,
    action_lookup: HashMap<String, usize>,
}

impl PlanningProblem {
    pub fn new(
        variables: Vec<VariableSpec>,
        actions: Vec<Action>,
        init: State,
        goal: Goal,
    ) -> Result<Self> {
        let mut var_lookup = HashMap::new();
        for (i, v) in variables.iter().enumerate() {
            if v.lo > v.hi {
                return Err(Error::input(format!(
                    "variable `{}`: empty domain [{}, {}]",
                    v.name, v.lo, v.hi
                )));
            }
            if v.contains(UNSPECIFIED) {
                return Err(Error::input(format!(
                    "variable `{}`: domain [{}, {}] contains the reserved value -1",
                    v.name, v.lo, v.hi
                )));
            }
            if var_lookup.insert(v.name.clone(), i).is_some() {
                return Err(Error::input(format!("duplicate variable `{}`", v.name)));
            }
        }

        let mut action_lookup = HashMap::new();
        for (i, a) in actions.iter().enumerate() {
            if a.cost.is_negative() {
                return Err(Error::input(format!("action `{}`: negative cost", a.name)));
            }
            let mut seen = vec![false; variables.len()];
            for e in &a.effects {
                let Some(spec) = variables.get(e.var) else {
                    return Err(Error::input(format!(
                        "action `{}`: effect on undeclared variable #{}",
                        a.name, e.var
                    )));
                };
                if std::mem::replace(&mut seen[e.var], true) {
                    return Err(Error::input(format!(
                        "action `{}`: two effects on `{}`",
                        a.name, spec.name
                    )));
                }
                if e.from == UNSPECIFIED && e.to == UNSPECIFIED {
                    return Err(Error::input(format!(
                        "action `{}`: effect on `{}` has neither precondition nor new value",
                        a.name, spec.name
                    )));
                }
                for (what, v) in [("from", e.from), ("to", e.to)] {
                    if v != UNSPECIFIED && !spec.contains(v) {
                        return Err(Error::input(format!(
                            "action `{}`: {what} value {v} outside domain of `{}`",
                            a.name, spec.name
                        )));
                    }
                }
            }
            if action_lookup.insert(a.name.clone(), i).is_some() {
                return Err(Error::input(format!("duplicate action `{}`", a.name)));
            }
        }

        if init.len() != variables.len() {
            return Err(Error::input(format!(
                "initial state assigns {} of {} variables",
                init.len(),
                variables.len()
            )));
        }
        for (spec, &v) in variables.iter().zip(init.values()) {
            if !spec.contains(v) {
                return Err(Error::input(format!(
                    "initial value {v} outside domain of `{}`",
                    spec.name
                )));
            }
        }
        for (&var, &v) in &goal {
            let Some(spec) = variables.get(var) else {
                return Err(Error::input(format!("goal names undeclared variable #{var}")));
            };
            if !spec.contains(v) {
                return Err(Error::input(format!(
                    "goal value {v} outside domain of `{}`",
                    spec.name
                )));
            }
        }

        Ok(PlanningProblem {
            variables,
            actions,
            init,
            goal,
            var_lookup,
            action_lookup,
        })
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn init(&self) -> &State {
        &self.init
    }

    pub fn goal(&self) -> &Goal {
        &self.goal
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_lookup.get(name).copied()
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.action_lookup.get(name).copied()
    }

    /// Same variables and actions, different initial state and goal.
    pub fn with_init_and_goal(&self, init: State, goal: Goal) -> Result<Self> {
        PlanningProblem::new(self.variables.clone(), self.actions.clone(), init, goal)
    }

    pub fn with_actions(&self, actions: Vec<Action>) -> Result<Self> {
        PlanningProblem::new(
            self.variables.clone(),
            actions,
            self.init.clone(),
            self.goal.clone(),
        )
    }

    /// Checks that a state is total and within every domain.
    pub fn check_state(&self, s: &State) -> Result<()> {
        if s.len() != self.variables.len() {
            return Err(Error::input(format!(
                "state assigns {} of {} variables",
                s.len(),
                self.variables.len()
            )));
        }
        for (spec, &v) in self.variables.iter().zip(s.values()) {
            if !spec.contains(v) {
                return Err(Error::input(format!("value {v} outside domain of `{}`", spec.name)));
            }
        }
        Ok(())
    }

    pub fn apply_plan(&self, plan: &Plan, s: &State) -> Result<Option<State>> {
        let mut cur = s.clone();
        for &a in &plan.steps {
            let action = self
                .actions
                .get(a)
                .ok_or_else(|| Error::input(format!("unknown action #{a}")))?;
            match apply_action(action, &cur) {
                Some(next) => cur = next,
                None => {
                    // absorbing, but remaining steps must still resolve
                    if let Some(&bad) = plan.steps.iter().find(|&&x| x >= self.actions.len()) {
                        return Err(Error::input(format!("unknown action #{bad}")));
                    }
                    return Ok(None);
                }
            }
        }
        Ok(Some(cur))
    }

    pub fn plan_cost(&self, plan: &Plan) -> Result<Rational> {
        plan.steps.iter().try_fold(Rational::zero(), |acc, &a| {
            self.actions
                .get(a)
                .map(|act| acc + &act.cost)
                .ok_or_else(|| Error::input(format!("unknown action #{a}")))
        })
    }

    /// The plan executes from the initial state and reaches the goal.
    pub fn validate_plan(&self, plan: &Plan) -> bool {
        matches!(self.apply_plan(plan, &self.init), Ok(Some(end)) if entails_goal(&end, &self.goal))
    }

    /// A variable is compliant when every effect mentioning it is concrete.
    pub fn classify_variables(&self) -> Compliance {
        let mut compliant = vec![true; self.variables.len()];
        for a in &self.actions {
            for e in &a.effects {
                if !e.is_concrete() {
                    compliant[e.var] = false;
                }
            }
        }
        Compliance { compliant }
    }

    /// Compliant variables mentioned by the goal, in declaration order.
    pub fn goal_compliant_set(&self) -> Vec<usize> {
        let c = self.classify_variables();
        self.goal
            .keys()
            .copied()
            .filter(|&v| c.is_compliant(v))
            .collect()
    }

    /// Percentage of goal-specified variables that are compliant.
    pub fn compliance_pct(&self) -> Result<f64> {
        if self.goal.is_empty() {
            return Err(Error::input("compliance is undefined for an empty goal"));
        }
        Ok(100.0 * self.goal_compliant_set().len() as f64 / self.goal.len() as f64)
    }
}

/// Incremental, name-based construction of a [`PlanningProblem`].
#[derive(Clone, Debug, Default)]
pub struct ProblemBuilder {
    variables: Vec<VariableSpec>,
    lookup: HashMap<String, usize>,
    actions: Vec<Action>,
    init: HashMap<usize, i64>,
    goal: Goal,
}

impl ProblemBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn variable(&mut self, name: impl Into<String>, lo: i64, hi: i64) -> usize {
        let name = name.into();
        let idx = self.variables.len();
        self.lookup.insert(name.clone(), idx);
        self.variables.push(VariableSpec::new(name, lo, hi));
        idx
    }

    /// Index of a declared variable; panics on unknown names.
    pub fn var(&self, name: &str) -> usize {
        match self.lookup.get(name) {
            Some(&i) => i,
            None => panic!("undeclared variable `{name}`"),
        }
    }

    pub fn action(
        &mut self,
        name: impl Into<String>,
        cost: Rational,
        effects: &[(usize, i64, i64)],
    ) -> &mut Self {
        let effects = effects
            .iter()
            .map(|&(var, from, to)| EffectTriple::new(var, from, to))
            .collect();
        self.actions.push(Action::new(name, cost, effects));
        self
    }

    pub fn init(&mut self, var: usize, value: i64) -> &mut Self {
        self.init.insert(var, value);
        self
    }

    pub fn goal(&mut self, var: usize, value: i64) -> &mut Self {
        self.goal.insert(var, value);
        self
    }

    /// Unassigned initial values default to the domain's lower bound.
    pub fn build(&self) -> Result<PlanningProblem> {
        let init = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, spec)| self.init.get(&i).copied().unwrap_or(spec.lo))
            .collect();
        PlanningProblem::new(
            self.variables.clone(),
            self.actions.clone(),
            State::new(init),
            self.goal.clone(),
        )
    }
}
