//! Benchmark instances, compliance transforms and the %-difference table.

mod domains;
mod suite;
mod transforms;

pub use domains::{
    blocks3, blocks4, counter, eight_puzzle, fig1_system, generate, visitall, BenchSuite, Domain,
    GeneratedInstance, RaiseRules, MAX_BLOCKS, MAX_PUZZLE_WALK, MAX_VISITALL_SIDE, ORACLE_BUDGET,
};
pub use suite::{
    aggregate, evaluate_problem, pct_diff, render_table, run_suite, sections_for, write_csv,
    Aggregate, BenchRecord, BenchReport, Conventions, Flag, Section, Transform, CSV_HEADER,
};
pub use transforms::{complete_goal, raise_compliance};
