//! Writes a generated benchmark instance as domain and problem JSON.
//!
//! `cargo run --example export_instance -- blocks3 3 7 out/blocks3`
//! writes `out/blocks3.domain.json` and `out/blocks3.problem.json`.
//! Add `raised` as a fifth argument to apply the shipped raise rules.

use std::env;
use std::fs;
use std::process::exit;

use opcount::bench::{generate, raise_compliance, BenchSuite, Domain as Suite};
use opcount::format::{domain_to_json, problem_to_json, Domain};

fn main() {
    let args: Vec<String> = env::args().skip(1).collect();
    if args.len() < 4 {
        eprintln!("usage: export_instance SUITE SIZE SEED PREFIX [raised]");
        exit(2);
    }
    let suite: Suite = args[0].parse().unwrap_or_else(|e| {
        eprintln!("{e}");
        exit(2)
    });
    let size: usize = args[1].parse().expect("size");
    let seed: u64 = args[2].parse().expect("seed");
    let inst = generate(&BenchSuite::new(suite, vec![size], 1, seed))
        .expect("generation")
        .remove(0);
    let mut p = inst.problem;
    if args.get(4).map(String::as_str) == Some("raised") {
        p = raise_compliance(&p, &inst.raise_rules).expect("raise");
    }
    let prefix = &args[3];
    fs::write(format!("{prefix}.domain.json"), domain_to_json(&Domain::of_problem(&p))).expect("write");
    fs::write(format!("{prefix}.problem.json"), problem_to_json(&p, &[])).expect("write");
    println!("{} optimal cost {}", inst.id, inst.optimal);
}
