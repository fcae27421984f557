//! Runs heuristics against oracle optima and aggregates %-differences.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::heuristics::{evaluate_detailed, HeuristicConfig, HeuristicKind, HeuristicValue};
use crate::opcount::TransformSystem;
use crate::planning::PlanningProblem;
use crate::scalar::Scalar;
use crate::search::{optimal_cost_oracle, OracleOutcome};
use crate::Rational;

use super::domains::{generate, BenchSuite, GeneratedInstance, ORACLE_BUDGET};
use super::transforms::{complete_goal, raise_compliance};

pub const CSV_HEADER: [&str; 13] = [
    "domain",
    "problem",
    "compliance_pct",
    "h_cc",
    "h_l1",
    "h_wl1",
    "h_milp",
    "opt",
    "diff_cc",
    "diff_l1",
    "diff_wl1",
    "diff_milp",
    "flags",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    RaiseCompliance,
    CompleteGoal,
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raise-compliance" => Ok(Transform::RaiseCompliance),
            "complete-goal" => Ok(Transform::CompleteGoal),
            _ => Err(Error::input(format!(
                "unknown transform `{s}` (raise-compliance|complete-goal)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Section {
    Original,
    Raised,
    Completed,
}

impl Section {
    fn suffix(self) -> &'static str {
        match self {
            Section::Original => "",
            Section::Raised => "+raised",
            Section::Completed => "+completed",
        }
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Section::Original => "original",
            Section::Raised => "raised",
            Section::Completed => "completed",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Flag {
    NotApplicable,
    DeadEnd,
    ZeroOptimal,
    MilpFallback,
    Unsolvable,
    OracleBudget,
    TransformFailed,
}

/// One problem of one section.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRecord {
    pub section: Section,
    pub domain: String,
    pub problem: String,
    pub compliance_pct: f64,
    /// Indexed like `HeuristicKind::ALL`; `None` when not applicable.
    pub h: [Option<HeuristicValue>; 4],
    /// Unrounded LP objective, used to compare bounds across sections.
    pub l1_objective: Option<f64>,
    #[serde(serialize_with = "ser_rational")]
    pub optimal: Option<Rational>,
    pub pct_diff: [Option<f64>; 4],
    pub flags: Vec<Flag>,
}

fn ser_rational<S: serde::Serializer>(v: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

impl BenchRecord {
    pub fn is_applicable(&self) -> bool {
        !self.flags.contains(&Flag::NotApplicable)
    }

    fn csv_row(&self) -> Vec<String> {
        let h = |v: &Option<HeuristicValue>| match v {
            None => "n/a".to_string(),
            Some(HeuristicValue::DeadEnd) => "dead".to_string(),
            Some(HeuristicValue::Value(n)) => n.to_string(),
        };
        let diff = |d: &Option<f64>| d.map_or_else(|| "n/a".to_string(), |d| format!("{d:.2}"));
        let mut row = vec![
            format!("{}{}", self.domain, self.section.suffix()),
            self.problem.clone(),
            format!("{:.2}", self.compliance_pct),
        ];
        row.extend(self.h.iter().map(h));
        row.push(self.optimal.as_ref().map_or_else(|| "n/a".into(), |o| o.to_string()));
        row.extend(self.pct_diff.iter().map(diff));
        row.push(
            self.flags
                .iter()
                .map(|f| format!("{f:?}"))
                .collect::<Vec<_>>()
                .join("|"),
        );
        row
    }
}

/// Per-section, per-domain means over applicable records.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub section: Section,
    pub domain: String,
    pub problems: usize,
    pub not_applicable: usize,
    pub compliance_pct: Option<f64>,
    pub mean_diff: [Option<f64>; 4],
}

#[derive(Clone, Debug, Serialize)]
pub struct Conventions {
    pub pct_diff: &'static str,
    pub compliance_denominator: &'static str,
    pub heuristics: [&'static str; 4],
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub conventions: Conventions,
    pub aggregates: Vec<Aggregate>,
    pub records: Vec<BenchRecord>,
}

/// Sections produced by a transform list: raising alone gives two, goal
/// completion is applied on top of the raised problems and gives three.
pub fn sections_for(transforms: &[Transform]) -> Vec<Section> {
    let mut s = vec![Section::Original];
    if !transforms.is_empty() {
        s.push(Section::Raised);
    }
    if transforms.contains(&Transform::CompleteGoal) {
        s.push(Section::Completed);
    }
    s
}

pub fn run_suite(suite: &BenchSuite, transforms: &[Transform]) -> Result<BenchReport> {
    let instances = generate(suite)?;
    let sections = sections_for(transforms);
    let cfg = HeuristicConfig::default();
    let mut records: Vec<BenchRecord> = instances
        .par_iter()
        .flat_map_iter(|inst| run_instance(inst, &sections, &cfg))
        .collect();
    records.sort_by(|a, b| (a.section, &a.problem).cmp(&(b.section, &b.problem)));
    let aggregates = aggregate(&records);
    Ok(BenchReport {
        conventions: Conventions {
            pct_diff: "100 * |optimal - h| / optimal, optimal > 0",
            compliance_denominator: "goal-specified variables",
            heuristics: HeuristicKind::ALL.map(HeuristicKind::name),
            seed: suite.seed,
        },
        aggregates,
        records,
    })
}

fn run_instance(inst: &GeneratedInstance, sections: &[Section], cfg: &HeuristicConfig) -> Vec<BenchRecord> {
    log::info!("{}: optimal cost {}", inst.id, inst.optimal);
    let mut out = Vec::new();
    let mut current = Some(inst.problem.clone());
    for &section in sections {
        let problem = match (section, current.take()) {
            (_, None) => None,
            (Section::Original, p) => p,
            (Section::Raised, Some(p)) => raise_compliance(&p, &inst.raise_rules).ok(),
            (Section::Completed, Some(p)) => complete_goal(&p).ok(),
        };
        match &problem {
            Some(p) => out.push(evaluate_problem(section, inst, p, cfg)),
            None => out.push(BenchRecord {
                section,
                domain: inst.domain.to_string(),
                problem: inst.id.clone(),
                compliance_pct: 0.0,
                h: [None; 4],
                l1_objective: None,
                optimal: None,
                pct_diff: [None; 4],
                flags: vec![Flag::TransformFailed],
            }),
        }
        current = problem;
    }
    out
}

/// Heuristics at the initial state against the oracle optimum.
pub fn evaluate_problem(
    section: Section,
    inst: &GeneratedInstance,
    p: &PlanningProblem,
    cfg: &HeuristicConfig,
) -> BenchRecord {
    let mut flags = Vec::new();
    let compliance_pct = p.compliance_pct().unwrap_or(0.0);
    let optimal = if section == Section::Original {
        Some(inst.optimal.clone())
    } else {
        match optimal_cost_oracle(p, ORACLE_BUDGET) {
            Ok(OracleOutcome::Optimal { cost, .. }) => Some(cost),
            Ok(OracleOutcome::Unsolvable) => {
                flags.push(Flag::Unsolvable);
                None
            }
            _ => {
                flags.push(Flag::OracleBudget);
                None
            }
        }
    };
    let mut h = [None; 4];
    let mut l1_objective = None;
    match TransformSystem::build(p) {
        Err(Error::NotApplicable) => flags.push(Flag::NotApplicable),
        Err(_) => flags.push(Flag::TransformFailed),
        Ok(ts) => {
            for (i, kind) in HeuristicKind::ALL.into_iter().enumerate() {
                match evaluate_detailed(kind, Some(&ts), p.init(), p.goal(), &[], cfg) {
                    Ok(e) => {
                        if e.value.is_dead_end() && !flags.contains(&Flag::DeadEnd) {
                            flags.push(Flag::DeadEnd);
                        }
                        if e.fell_back {
                            flags.push(Flag::MilpFallback);
                        }
                        if kind == HeuristicKind::L1Lp {
                            l1_objective = e.raw;
                        }
                        h[i] = Some(e.value);
                    }
                    Err(_) => flags.push(Flag::TransformFailed),
                }
            }
        }
    }
    let opt_f = optimal.as_ref().map(|o| o.to_f64_lossy());
    if opt_f == Some(0.0) {
        flags.push(Flag::ZeroOptimal);
    }
    let pct_diff = h.map(|v| match (v.and_then(HeuristicValue::value), opt_f) {
        (Some(v), Some(o)) if o > 0.0 => Some(pct_diff(v as f64, o)),
        _ => None,
    });
    BenchRecord {
        section,
        domain: inst.domain.to_string(),
        problem: inst.id.clone(),
        compliance_pct,
        h,
        l1_objective,
        optimal,
        pct_diff,
        flags,
    }
}

pub fn pct_diff(h: f64, optimal: f64) -> f64 {
    100.0 * (optimal - h).abs() / optimal
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn aggregate(records: &[BenchRecord]) -> Vec<Aggregate> {
    let mut keys: Vec<(Section, String)> = records.iter().map(|r| (r.section, r.domain.clone())).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(section, domain)| {
            let group: Vec<&BenchRecord> = records
                .iter()
                .filter(|r| r.section == section && r.domain == domain)
                .collect();
            let ok: Vec<&&BenchRecord> = group.iter().filter(|r| r.is_applicable()).collect();
            let mut mean_diff = [None; 4];
            for (i, m) in mean_diff.iter_mut().enumerate() {
                *m = mean(ok.iter().filter_map(|r| r.pct_diff[i]));
            }
            Aggregate {
                section,
                domain,
                problems: group.len(),
                not_applicable: group.len() - ok.len(),
                compliance_pct: mean(ok.iter().map(|r| r.compliance_pct)),
                mean_diff,
            }
        })
        .collect()
}

pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Internal(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.write_record(r.csv_row()).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Internal(format!("csv: {e}")))?;
    Ok(())
}

/// Plain-text table with one block per section.
pub fn render_table(aggs: &[Aggregate]) -> String {
    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.1}"));
    let mut s = String::new();
    let mut last = None;
    for a in aggs {
        if last != Some(a.section) {
            s.push_str(&format!(
                "[{}]\n{:<12} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
                a.section, "domain", "n", "compl%", "cc", "l1", "wl1", "milp"
            ));
            last = Some(a.section);
        }
        s.push_str(&format!(
            "{:<12} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
            a.domain,
            a.problems,
            cell(a.compliance_pct),
            cell(a.mean_diff[0]),
            cell(a.mean_diff[1]),
            cell(a.mean_diff[2]),
            cell(a.mean_diff[3]),
        ));
    }
    s
}
