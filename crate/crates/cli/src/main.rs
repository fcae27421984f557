use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde_json::json;

use opcount::bench::{self, BenchSuite, Domain as Suite, Transform};
use opcount::format::{parse_domain, parse_problem, Domain, Precomputed};
use opcount::heuristics::{evaluate_detailed, HeuristicConfig, HeuristicKind};
use opcount::opcount::{Landmark, TransformSystem};
use opcount::planning::PlanningProblem;
use opcount::search::{search_with_system, Algorithm, SearchConfig, SearchStatus};
use opcount::Error;

const EXIT_UNSOLVABLE: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "opcount", version, about = "Operator-count heuristics and search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a plan.
    Solve(SolveArgs),
    /// Print every heuristic at the initial state.
    Eval(EvalArgs),
    /// Run a generated benchmark suite.
    Bench(BenchArgs),
    /// Store the transform system of an action model for reuse.
    Precompute(PrecomputeArgs),
}

#[derive(Args)]
struct Inputs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    /// Transform system written by `precompute`.
    #[arg(long)]
    precomputed: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// cc | l1 | wl1 | milp (ignored by ucs).
    #[arg(long, default_value = "l1")]
    heuristic: HeuristicKind,
    /// astar | gbfs | ucs
    #[arg(long = "search", default_value = "astar")]
    algorithm: Algorithm,
    #[arg(long, default_value_t = SearchConfig::DEFAULT_BUDGET)]
    budget: usize,
    /// Keep dead ends on the open list.
    #[arg(long)]
    no_prune: bool,
    /// Write the result as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// blocks3 | blocks4 | 8puzzle | visitall | counter
    #[arg(long)]
    suite: Suite,
    /// raise-compliance | complete-goal; complete-goal applies on top of raising.
    #[arg(long)]
    transform: Vec<Transform>,
    /// Comma-separated sizes (blocks, scramble length or grid side).
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Instances per size.
    #[arg(long, default_value_t = 5)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV of per-problem records; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON document with aggregates and records.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct PrecomputeArgs {
    #[arg(long)]
    domain: PathBuf,
    /// Comma-separated goal variables.
    #[arg(long, value_delimiter = ',', required_unless_present = "problem")]
    goal_vars: Vec<String>,
    /// Take the goal variables from a problem file instead.
    #[arg(long, conflicts_with = "goal_vars")]
    problem: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure with its exit code.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotApplicable => Failure(EXIT_UNSOLVABLE, e.to_string()),
            other => Failure(EXIT_INPUT, other.to_string()),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("OPCOUNT_LOG", "error"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Precompute(a) => cmd_precompute(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn located(path: &Path, e: Error) -> Failure {
    match e {
        Error::Input(m) => Failure(EXIT_INPUT, format!("{}: {m}", path.display())),
        other => other.into(),
    }
}

struct Loaded {
    problem: PlanningProblem,
    landmarks: Vec<Landmark>,
    ts: Option<TransformSystem>,
}

fn load(inputs: &Inputs) -> Result<Loaded, Failure> {
    let domain = parse_domain(&read(&inputs.domain)?).map_err(|e| located(&inputs.domain, e))?;
    let (problem, landmarks) =
        parse_problem(&domain, &read(&inputs.problem)?).map_err(|e| located(&inputs.problem, e))?;
    let ts = match &inputs.precomputed {
        Some(path) => {
            let pre = Precomputed::from_json(&read(path)?).map_err(|e| located(path, e))?;
            info!("reusing transform system from {}", path.display());
            Some(pre.instantiate(&problem).map_err(|e| located(path, e))?)
        }
        None => match TransformSystem::build(&problem) {
            Ok(ts) => Some(ts),
            Err(Error::NotApplicable) => None,
            Err(e) => return Err(e.into()),
        },
    };
    if ts.is_none() {
        info!("no goal compliant variables; heuristics are zero");
    }
    Ok(Loaded {
        problem,
        landmarks,
        ts,
    })
}

fn cmd_solve(a: SolveArgs) -> CmdResult {
    let l = load(&a.inputs)?;
    let heuristic = (a.algorithm != Algorithm::Ucs).then_some(a.heuristic);
    let mut cfg = SearchConfig::new(a.algorithm, heuristic)?.with_budget(a.budget)?;
    cfg.landmarks = l.landmarks.clone();
    cfg.prune_dead_ends = !a.no_prune;
    let r = search_with_system(&l.problem, l.ts.as_ref(), &cfg)?;
    let status = match r.status {
        SearchStatus::Solved => "solved",
        SearchStatus::ProvenUnsolvable => "unsolvable",
        SearchStatus::BudgetExhausted => "budget-exhausted",
    };
    let names: Vec<&str> = r.plan.as_ref().map(|p| p.names(&l.problem)).unwrap_or_default();
    println!("status: {status}");
    if let Some(cost) = &r.cost {
        println!("cost: {cost}");
        println!("plan ({} steps):", names.len());
        for n in &names {
            println!("  {n}");
        }
    }
    println!("nodes expanded: {}", r.nodes_expanded);
    println!("nodes generated: {}", r.nodes_generated);
    println!("initial h: {}", r.initial_h);
    if r.satisficing {
        println!("note: satisficing configuration, cost is not certified optimal");
    }
    if let Some(out) = &a.out {
        let doc = json!({
            "status": status,
            "cost": r.cost.as_ref().map(|c| c.to_string()),
            "plan": names,
            "nodes_expanded": r.nodes_expanded,
            "nodes_generated": r.nodes_generated,
            "initial_h": r.initial_h,
            "algorithm": a.algorithm.to_string(),
            "heuristic": heuristic.map(|h| h.name()),
            "satisficing": r.satisficing,
        });
        write(out, &serde_json::to_string_pretty(&doc).expect("json"))?;
    }
    Ok(match r.status {
        SearchStatus::Solved => 0,
        SearchStatus::ProvenUnsolvable => EXIT_UNSOLVABLE,
        SearchStatus::BudgetExhausted => EXIT_BUDGET,
    })
}

fn cmd_eval(a: EvalArgs) -> CmdResult {
    let l = load(&a.inputs)?;
    let p = &l.problem;
    let compliance = p.compliance_pct()?;
    println!("compliance_pct: {compliance:.2}");
    let cfg = HeuristicConfig::default();
    let mut values = serde_json::Map::new();
    let feasible = match &l.ts {
        None => {
            for kind in HeuristicKind::ALL {
                println!("{}: n/a", kind.name());
                values.insert(kind.name().into(), json!("n/a"));
            }
            "n/a"
        }
        Some(ts) => {
            let mut dead = false;
            for kind in HeuristicKind::ALL {
                let e = evaluate_detailed(kind, Some(ts), p.init(), p.goal(), &l.landmarks, &cfg)?;
                dead |= e.value.is_dead_end();
                let note = if e.fell_back { " (node limit, l1 value)" } else { "" };
                println!("{}: {}{note}", kind.name(), e.value);
                values.insert(kind.name().into(), json!(e.value));
            }
            if dead {
                "dead-end"
            } else {
                "feasible"
            }
        }
    };
    println!("verdict: {feasible}");
    if let Some(out) = &a.out {
        let doc = json!({"compliance_pct": compliance, "heuristics": values, "verdict": feasible});
        write(out, &serde_json::to_string_pretty(&doc).expect("json"))?;
    }
    Ok(0)
}

fn cmd_bench(a: BenchArgs) -> CmdResult {
    let sizes = if a.sizes.is_empty() {
        a.suite.default_sizes()
    } else {
        a.sizes.clone()
    };
    let suite = BenchSuite::new(a.suite, sizes, a.count, a.seed);
    let report = bench::run_suite(&suite, &a.transform)?;
    let mut csv = Vec::new();
    bench::write_csv(&report.records, &mut csv)?;
    let csv = String::from_utf8(csv).expect("csv is utf-8");
    match &a.out {
        Some(path) => {
            write(path, &csv)?;
            print!("{}", bench::render_table(&report.aggregates));
        }
        None => print!("{csv}"),
    }
    if let Some(path) = &a.json {
        write(path, &serde_json::to_string_pretty(&report).expect("json"))?;
    }
    Ok(0)
}

fn cmd_precompute(a: PrecomputeArgs) -> CmdResult {
    let domain: Domain = parse_domain(&read(&a.domain)?).map_err(|e| located(&a.domain, e))?;
    let goal_vars = match &a.problem {
        Some(path) => {
            let (p, _) = parse_problem(&domain, &read(path)?).map_err(|e| located(path, e))?;
            p.goal().keys().map(|&i| p.variables()[i].name.clone()).collect()
        }
        None => a.goal_vars.clone(),
    };
    let (pre, ts) = Precomputed::build(&domain, &goal_vars).map_err(|e| match e {
        Error::NotApplicable => Failure(
            EXIT_UNSOLVABLE,
            "not applicable: none of the goal variables is compliant".into(),
        ),
        other => other.into(),
    })?;
    let text = pre.to_json();
    match &a.out {
        Some(path) => {
            write(path, &text)?;
            println!(
                "wrote {}: {}x{} M, rank {}, phi {:?}",
                path.display(),
                ts.n_rows(),
                ts.n_actions(),
                ts.rank(),
                pre.phi
            );
        }
        None => println!("{text}"),
    }
    Ok(0)
}
