use opcount::bench::{
    complete_goal, generate, raise_compliance, run_suite, write_csv, BenchSuite, Domain, Section,
};
use opcount::search::{optimal_cost_oracle, OracleOutcome};

#[test]
fn suites_are_byte_identical_per_seed() {
    let suite = BenchSuite::new(Domain::EightPuzzle, vec![5], 3, 42);
    let csv = || {
        let r = run_suite(&suite, &[opcount::bench::Transform::CompleteGoal]).unwrap();
        let mut buf = Vec::new();
        write_csv(&r.records, &mut buf).unwrap();
        buf
    };
    assert_eq!(csv(), csv());
}

#[test]
fn raised_plans_solve_the_original() {
    for domain in [Domain::Blocks3, Domain::Blocks4, Domain::EightPuzzle, Domain::Visitall] {
        for inst in generate(&BenchSuite::new(domain, domain.default_sizes(), 2, 9)).unwrap() {
            let raised = raise_compliance(&inst.problem, &inst.raise_rules).unwrap();
            assert!(raised.compliance_pct().unwrap() >= inst.problem.compliance_pct().unwrap());
            let OracleOutcome::Optimal { plan, cost } = optimal_cost_oracle(&raised, 1_000_000).unwrap() else {
                panic!("{} raised is unsolvable", inst.id);
            };
            assert!(inst.problem.validate_plan(&plan), "{}", inst.id);
            assert_eq!(cost, inst.optimal, "{}", inst.id);
        }
    }
}

#[test]
fn completion_preserves_optimum_everywhere() {
    for domain in Domain::ALL {
        for inst in generate(&BenchSuite::new(domain, domain.default_sizes(), 2, 4)).unwrap() {
            let done = complete_goal(&inst.problem).unwrap();
            assert_eq!(done.goal().len(), done.variables().len());
            assert_eq!(optimal_cost_oracle(&done, 1_000_000).unwrap().cost(), Some(&inst.optimal), "{}", inst.id);
        }
    }
}

#[test]
fn puzzle_raising_reaches_full_compliance() {
    let r = run_suite(&BenchSuite::new(Domain::EightPuzzle, vec![6], 2, 1), &[opcount::bench::Transform::RaiseCompliance]).unwrap();
    for rec in &r.records {
        let expected = if rec.section == Section::Original { 0.0 } else { 100.0 };
        assert_eq!(rec.compliance_pct, expected, "{rec:?}");
    }
}
