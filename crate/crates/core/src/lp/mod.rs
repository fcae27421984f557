//! Two-phase simplex, l1 and reweighted-l1 operator-count LPs, and an exact
//! branch-and-bound integer solver.

mod milp;
mod simplex;
mod sparse;

pub use milp::{enumerate_integer_solutions, milp_branch_bound, IntegerProgram, MilpSolution, MilpStatus};
pub use simplex::{simplex_solve, LpProblem, LpSolution, LpStatus};
pub use sparse::{l1_lp, reweighted_l1, standard_weight, ReweightConfig, ReweightStep, Reweighted, WeightUpdate};
