//! JSON files: domains, problems and precomputed transform systems.
//!
//! Domain:
//! `{"variables":[{"name","lo","hi"}],"actions":[{"name","cost","effects":[{"var","from","to"}]}]}`
//! where `cost` is an integer or a `"p/q"` string and `-1` marks an
//! unspecified effect slot.
//!
//! Problem: `{"init":{var:value},"goal":{var:value},"landmarks":[{"action","cardinality"}]}`.
//! Variables missing from `init` start at their lower bound.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{EchelonResult, Matrix};
use crate::opcount::{Landmark, TransformSystem};
use crate::planning::{Action, EffectTriple, Goal, PlanningProblem, State, VariableSpec};
use crate::scalar::{parse_rational, Scalar};
use crate::{FloatMatrix, Rational};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Text(String),
}

impl Number {
    fn from_rational(r: &Rational) -> Self {
        if r.is_integer() {
            if let Some(v) = num_traits::ToPrimitive::to_i64(r.numer()) {
                return Number::Int(v);
            }
        }
        Number::Text(r.to_string())
    }

    fn to_rational(&self) -> Option<Rational> {
        match self {
            Number::Int(v) => Some(Rational::from_int(*v)),
            Number::Text(t) => parse_rational(t),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableEntry {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectEntry {
    pub var: String,
    pub from: i64,
    pub to: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionEntry {
    pub name: String,
    pub cost: Number,
    pub effects: Vec<EffectEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub variables: Vec<VariableEntry>,
    pub actions: Vec<ActionEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandmarkEntry {
    pub action: String,
    pub cardinality: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub init: BTreeMap<String, i64>,
    pub goal: BTreeMap<String, i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub landmarks: Vec<LandmarkEntry>,
}

/// The action model of a domain file, validated.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub variables: Vec<VariableSpec>,
    pub actions: Vec<Action>,
}

impl Domain {
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name)
    }

    pub fn of_problem(p: &PlanningProblem) -> Self {
        Domain {
            variables: p.variables().to_vec(),
            actions: p.actions().to_vec(),
        }
    }

    /// A problem with every variable at its lower bound and no goal.
    pub fn bare_problem(&self) -> Result<PlanningProblem> {
        let init = State::new(self.variables.iter().map(|v| v.lo).collect());
        PlanningProblem::new(self.variables.clone(), self.actions.clone(), init, Goal::new())
    }

    /// SHA-256 over a canonical text form of variables and actions.
    pub fn model_hash(&self) -> String {
        let mut h = Sha256::new();
        for v in &self.variables {
            h.update(format!("var {} {} {}\n", v.name, v.lo, v.hi));
        }
        for a in &self.actions {
            h.update(format!("action {} {}\n", a.name, a.cost));
            for e in &a.effects {
                h.update(format!("  {} {} {}\n", self.variables[e.var].name, e.from, e.to));
            }
        }
        hex::encode(h.finalize())
    }
}

/// 1-based line of the first occurrence of `"needle"` in `text`.
fn line_of(text: &str, needle: &str) -> Option<usize> {
    let quoted = format!("\"{needle}\"");
    text.find(&quoted).map(|at| text[..at].lines().count().max(1))
}

fn located(text: &str, needle: &str, msg: String) -> Error {
    match line_of(text, needle) {
        Some(l) => Error::input(format!("line {l}: {msg}")),
        None => Error::input(msg),
    }
}

fn json_error(what: &str, e: serde_json::Error) -> Error {
    let text = e.to_string();
    let suffix = format!(" at line {} column {}", e.line(), e.column());
    let msg = text.strip_suffix(&suffix).unwrap_or(&text);
    Error::input(format!("{what}: line {} column {}: {msg}", e.line(), e.column()))
}

fn with_context(what: &str, e: Error) -> Error {
    match e {
        Error::Input(m) => Error::input(format!("{what}: {m}")),
        other => other,
    }
}

pub fn parse_domain(text: &str) -> Result<Domain> {
    let file: DomainFile = serde_json::from_str(text).map_err(|e| json_error("domain", e))?;
    domain_from_file(&file, text).map_err(|e| with_context("domain", e))
}

fn domain_from_file(file: &DomainFile, text: &str) -> Result<Domain> {
    let variables: Vec<VariableSpec> = file
        .variables
        .iter()
        .map(|v| VariableSpec::new(v.name.clone(), v.lo, v.hi))
        .collect();
    let index: BTreeMap<&str, usize> = variables.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();
    let mut actions = Vec::with_capacity(file.actions.len());
    for a in &file.actions {
        let cost = a.cost.to_rational().ok_or_else(|| {
            located(text, &a.name, format!("action `{}` has malformed cost {:?}", a.name, a.cost))
        })?;
        let mut effects = Vec::with_capacity(a.effects.len());
        for e in &a.effects {
            let &var = index.get(e.var.as_str()).ok_or_else(|| {
                located(text, &a.name, format!("action `{}` names unknown variable `{}`", a.name, e.var))
            })?;
            effects.push(EffectTriple::new(var, e.from, e.to));
        }
        actions.push(Action::new(a.name.clone(), cost, effects));
    }
    let domain = Domain { variables, actions };
    // full validation happens on a goal-free problem over the model
    domain.bare_problem().map_err(|e| relocate(e, text, &domain))?;
    Ok(domain)
}

/// Adds a line number to a validation error that names an action or variable.
fn relocate(e: Error, text: &str, domain: &Domain) -> Error {
    let Error::Input(msg) = e else { return e };
    let names = domain
        .actions
        .iter()
        .map(|a| a.name.as_str())
        .chain(domain.variables.iter().map(|v| v.name.as_str()));
    for name in names {
        if msg.contains(&format!("`{name}`")) {
            return located(text, name, msg);
        }
    }
    Error::Input(msg)
}

pub fn parse_problem(domain: &Domain, text: &str) -> Result<(PlanningProblem, Vec<Landmark>)> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| json_error("problem", e))?;
    problem_from_file(domain, &file, text).map_err(|e| with_context("problem", e))
}

fn problem_from_file(domain: &Domain, file: &ProblemFile, text: &str) -> Result<(PlanningProblem, Vec<Landmark>)> {
    let var = |name: &str| {
        domain
            .var_index(name)
            .ok_or_else(|| located(text, name, format!("unknown variable `{name}`")))
    };
    let mut init: Vec<i64> = domain.variables.iter().map(|v| v.lo).collect();
    for (name, &v) in &file.init {
        init[var(name)?] = v;
    }
    let mut goal = Goal::new();
    for (name, &v) in &file.goal {
        goal.insert(var(name)?, v);
    }
    let mut landmarks = Vec::with_capacity(file.landmarks.len());
    for lm in &file.landmarks {
        let action = domain
            .action_index(&lm.action)
            .ok_or_else(|| located(text, &lm.action, format!("unknown landmark action `{}`", lm.action)))?;
        landmarks.push(Landmark {
            action,
            cardinality: lm.cardinality,
        });
    }
    let p = PlanningProblem::new(
        domain.variables.clone(),
        domain.actions.clone(),
        State::new(init),
        goal,
    )
    .map_err(|e| relocate(e, text, domain))?;
    Ok((p, landmarks))
}

pub fn domain_file(domain: &Domain) -> DomainFile {
    DomainFile {
        variables: domain
            .variables
            .iter()
            .map(|v| VariableEntry {
                name: v.name.clone(),
                lo: v.lo,
                hi: v.hi,
            })
            .collect(),
        actions: domain
            .actions
            .iter()
            .map(|a| ActionEntry {
                name: a.name.clone(),
                cost: Number::from_rational(&a.cost),
                effects: a
                    .effects
                    .iter()
                    .map(|e| EffectEntry {
                        var: domain.variables[e.var].name.clone(),
                        from: e.from,
                        to: e.to,
                    })
                    .collect(),
            })
            .collect(),
    }
}

pub fn problem_file(p: &PlanningProblem, landmarks: &[Landmark]) -> ProblemFile {
    let name = |i: usize| p.variables()[i].name.clone();
    ProblemFile {
        init: p.init().values().iter().enumerate().map(|(i, &v)| (name(i), v)).collect(),
        goal: p.goal().iter().map(|(&i, &v)| (name(i), v)).collect(),
        landmarks: landmarks
            .iter()
            .map(|l| LandmarkEntry {
                action: p.actions()[l.action].name.clone(),
                cardinality: l.cardinality,
            })
            .collect(),
    }
}

pub fn domain_to_json(domain: &Domain) -> String {
    serde_json::to_string_pretty(&domain_file(domain)).expect("domain serializes")
}

pub fn problem_to_json(p: &PlanningProblem, landmarks: &[Landmark]) -> String {
    serde_json::to_string_pretty(&problem_file(p, landmarks)).expect("problem serializes")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PrecomputeFile {
    model_hash: String,
    phi: Vec<String>,
    m: Vec<Vec<i64>>,
    rank: usize,
    pivot_cols: Vec<usize>,
    t: Vec<Vec<Number>>,
    z: Vec<Vec<Box<RawValue>>>,
}

/// The reusable part of a transform system: everything but goal values.
#[derive(Clone, Debug, PartialEq)]
pub struct Precomputed {
    pub model_hash: String,
    pub phi: Vec<String>,
    pub m: Vec<Vec<i64>>,
    pub echelon: EchelonResult<Rational>,
    pub z: FloatMatrix,
}

impl Precomputed {
    pub fn of(domain: &Domain, ts: &TransformSystem) -> Self {
        Precomputed {
            model_hash: domain.model_hash(),
            phi: ts.phi().iter().map(|&i| domain.variables[i].name.clone()).collect(),
            m: ts.m_rows().to_vec(),
            echelon: ts.echelon().clone(),
            z: ts.z().clone(),
        }
    }

    /// Builds the system for the goal compliant variables named by `goal_vars`.
    pub fn build(domain: &Domain, goal_vars: &[String]) -> Result<(Self, TransformSystem)> {
        let mut goal = Goal::new();
        for name in goal_vars {
            let i = domain
                .var_index(name)
                .ok_or_else(|| Error::input(format!("unknown goal variable `{name}`")))?;
            goal.insert(i, domain.variables[i].lo);
        }
        let init = State::new(domain.variables.iter().map(|v| v.lo).collect());
        let p = PlanningProblem::new(domain.variables.clone(), domain.actions.clone(), init, goal)?;
        let ts = TransformSystem::build(&p)?;
        Ok((Precomputed::of(domain, &ts), ts))
    }

    /// Instantiates the stored system for `p`, which must share the action
    /// model and goal compliant variables it was computed for.
    pub fn instantiate(&self, p: &PlanningProblem) -> Result<TransformSystem> {
        let domain = Domain::of_problem(p);
        if domain.model_hash() != self.model_hash {
            return Err(Error::input("precomputed file belongs to a different action model"));
        }
        let phi: Vec<String> = p
            .goal_compliant_set()
            .iter()
            .map(|&i| p.variables()[i].name.clone())
            .collect();
        if phi != self.phi {
            return Err(Error::input(format!(
                "problem's goal compliant variables {phi:?} differ from the precomputed {:?}",
                self.phi
            )));
        }
        let phi_idx: Vec<usize> = p.goal_compliant_set();
        let goal_values = phi_idx.iter().map(|i| p.goal()[i]).collect();
        let m = Matrix::from_fn(self.m.len(), p.actions().len(), |i, j| Rational::from_int(self.m[i][j]));
        let costs = p.actions().iter().map(|a| a.cost.clone()).collect();
        TransformSystem::from_stored(phi_idx, goal_values, m, costs, self.echelon.clone(), self.z.clone())
    }

    pub fn to_json(&self) -> String {
        let t = self.echelon.transform.to_rows();
        let file = PrecomputeFile {
            model_hash: self.model_hash.clone(),
            phi: self.phi.clone(),
            m: self.m.clone(),
            rank: self.echelon.rank,
            pivot_cols: self.echelon.pivot_cols.clone(),
            t: t.iter().map(|r| r.iter().map(Number::from_rational).collect()).collect(),
            z: self
                .z
                .to_rows()
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|v| RawValue::from_string(format!("{v:.16e}")).expect("float literal"))
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("precompute serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PrecomputeFile = serde_json::from_str(text).map_err(|e| json_error("precompute", e))?;
        let rows = file.m.len();
        let cols = file.m.first().map_or(0, Vec::len);
        if file.m.iter().any(|r| r.len() != cols) || file.phi.len() != rows {
            return Err(Error::input("precompute: M is ragged or disagrees with phi"));
        }
        let t_rows = file
            .t
            .iter()
            .map(|r| r.iter().map(Number::to_rational).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::input("precompute: malformed entry in T"))?;
        let transform = Matrix::from_rows(t_rows).map_err(Error::from)?;
        if transform.shape() != (rows, rows) {
            return Err(Error::input("precompute: T must be square with one row per phi entry"));
        }
        let z_rows = file
            .z
            .iter()
            .map(|r| r.iter().map(|v| v.get().parse::<f64>().ok()).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::input("precompute: malformed entry in Z"))?;
        let z = if z_rows.is_empty() || file.rank == 0 {
            Matrix::zeros(cols, 0)
        } else {
            Matrix::from_rows(z_rows).map_err(Error::from)?
        };
        let m = Matrix::from_fn(rows, cols, |i, j| Rational::from_int(file.m[i][j]));
        let reduced = transform.matmul(&m)?;
        Ok(Precomputed {
            model_hash: file.model_hash,
            phi: file.phi,
            m: file.m,
            echelon: EchelonResult {
                transform,
                reduced,
                rank: file.rank,
                pivot_cols: file.pivot_cols,
            },
            z,
        })
    }
}
