//! Desk-scale generators for the evaluation domains, encoded with 0/1
//! variables and effect triples.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::planning::{PlanningProblem, ProblemBuilder, UNSPECIFIED};
use crate::scalar::Scalar;
use crate::search::{optimal_cost_oracle, OracleOutcome};
use crate::Rational;

pub const MAX_BLOCKS: usize = 6;
pub const MAX_VISITALL_SIDE: usize = 4;
pub const MAX_PUZZLE_WALK: usize = 30;
pub const ORACLE_BUDGET: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    Blocks3,
    Blocks4,
    EightPuzzle,
    Visitall,
    Counter,
}

impl Domain {
    pub const ALL: [Domain; 5] = [
        Domain::Blocks3,
        Domain::Blocks4,
        Domain::EightPuzzle,
        Domain::Visitall,
        Domain::Counter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Domain::Blocks3 => "blocks3",
            Domain::Blocks4 => "blocks4",
            Domain::EightPuzzle => "8puzzle",
            Domain::Visitall => "visitall",
            Domain::Counter => "counter",
        }
    }

    /// Sizes used when a suite does not name any.
    pub fn default_sizes(self) -> Vec<usize> {
        match self {
            Domain::Blocks3 | Domain::Blocks4 => vec![3, 4],
            Domain::EightPuzzle => vec![6, 10],
            Domain::Visitall => vec![2, 3],
            Domain::Counter => vec![1],
        }
    }

    fn check_size(self, size: usize) -> Result<()> {
        let ok = match self {
            Domain::Blocks3 | Domain::Blocks4 => (2..=MAX_BLOCKS).contains(&size),
            Domain::EightPuzzle => size <= MAX_PUZZLE_WALK,
            Domain::Visitall => (2..=MAX_VISITALL_SIDE).contains(&size),
            Domain::Counter => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::input(format!("size {size} outside the desk-scale cap for {self}")))
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "blocks3" | "blocks-3ops" => Ok(Domain::Blocks3),
            "blocks4" | "blocks-4ops" => Ok(Domain::Blocks4),
            "8puzzle" | "eightpuzzle" | "8-puzzle" => Ok(Domain::EightPuzzle),
            "visitall" => Ok(Domain::Visitall),
            "counter" => Ok(Domain::Counter),
            _ => Err(Error::input(format!(
                "unknown suite `{s}` (blocks3|blocks4|8puzzle|visitall|counter)"
            ))),
        }
    }
}

/// `(action, variable) → (from, to)` replacements for don't-care slots.
pub type RaiseRules = BTreeMap<(String, String), (i64, i64)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchSuite {
    pub domain: Domain,
    /// Blocks: block count. 8-puzzle: scramble walk length. Visitall: grid side.
    pub sizes: Vec<usize>,
    pub per_size: usize,
    pub seed: u64,
}

impl BenchSuite {
    pub fn new(domain: Domain, sizes: Vec<usize>, per_size: usize, seed: u64) -> Self {
        BenchSuite {
            domain,
            sizes,
            per_size,
            seed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub id: String,
    pub domain: Domain,
    pub problem: PlanningProblem,
    /// Don't-care replacements entailed by the domain's state invariants.
    pub raise_rules: RaiseRules,
    pub optimal: Rational,
}

/// Deterministic instances for a suite; each one is checked solvable.
pub fn generate(suite: &BenchSuite) -> Result<Vec<GeneratedInstance>> {
    let sizes = if suite.domain == Domain::Counter {
        vec![1]
    } else {
        suite.sizes.clone()
    };
    let per_size = if suite.domain == Domain::Counter { 1 } else { suite.per_size };
    let mut out = Vec::new();
    for &size in &sizes {
        suite.domain.check_size(size)?;
        for k in 0..per_size {
            let mut rng = ChaCha8Rng::seed_from_u64(
                suite.seed ^ ((size as u64) << 32) ^ (k as u64).wrapping_mul(0x9e37_79b9),
            );
            let (problem, raise_rules) = match suite.domain {
                Domain::Blocks3 => blocks3(size, &mut rng)?,
                Domain::Blocks4 => blocks4(size, &mut rng)?,
                Domain::EightPuzzle => eight_puzzle(size, &mut rng)?,
                Domain::Visitall => visitall(size, &mut rng)?,
                Domain::Counter => (counter()?, RaiseRules::new()),
            };
            let optimal = match optimal_cost_oracle(&problem, ORACLE_BUDGET)? {
                OracleOutcome::Optimal { cost, .. } => cost,
                other => {
                    return Err(Error::Internal(format!(
                        "generated {} instance is not solvable: {other:?}",
                        suite.domain
                    )))
                }
            };
            let id = match suite.domain {
                Domain::Counter => "counter".to_string(),
                d => format!("{d}-{size}-{k:02}"),
            };
            out.push(GeneratedInstance {
                id,
                domain: suite.domain,
                problem,
                raise_rules,
                optimal,
            });
        }
    }
    Ok(out)
}

/// Propositional operators turned into effect triples.
///
/// A precondition that is also deleted becomes `⟨1, 0⟩`; a precondition left
/// alone becomes `⟨1, −1⟩`; an add or delete of an atom not in the
/// precondition gets `−1` as its old value. Each `−1` whose value is implied
/// by the domain's invariants is recorded as a raise rule.
struct Strips {
    b: ProblemBuilder,
    rules: RaiseRules,
}

/// `(atom, value implied before the effect, if any)`.
type Eff<'a> = (&'a str, Option<i64>);

impl Strips {
    fn new() -> Self {
        Strips {
            b: ProblemBuilder::new(),
            rules: RaiseRules::new(),
        }
    }

    fn atom(&mut self, name: &str) -> usize {
        self.b.variable(name, 0, 1)
    }

    fn op(&mut self, name: &str, pre: &[&str], add: &[Eff<'_>], del: &[Eff<'_>]) {
        let mut effects = Vec::new();
        let mut rule = |atom: &str, from: i64, to: i64| {
            self.rules.insert((name.to_string(), atom.to_string()), (from, to));
        };
        for &p in pre {
            let triple = if del.iter().any(|(d, _)| *d == p) {
                (p, 1, 0)
            } else if add.iter().any(|(a, _)| *a == p) {
                (p, 1, 1)
            } else {
                rule(p, 1, 1);
                (p, 1, UNSPECIFIED)
            };
            effects.push(triple);
        }
        for (atoms, to) in [(add, 1), (del, 0)] {
            for &(atom, prior) in atoms {
                if pre.contains(&atom) {
                    continue;
                }
                if let Some(v) = prior {
                    rule(atom, v, to);
                }
                effects.push((atom, UNSPECIFIED, to));
            }
        }
        let effects: Vec<(usize, i64, i64)> = effects
            .into_iter()
            .map(|(a, f, t)| (self.b.var(a), f, t))
            .collect();
        self.b.action(name, Rational::from_int(1), &effects);
    }

    fn set(&mut self, atom: &str, v: i64) {
        let i = self.b.var(atom);
        self.b.init(i, v);
    }

    fn goal(&mut self, atom: &str, v: i64) {
        let i = self.b.var(atom);
        self.b.goal(i, v);
    }

    fn finish(self) -> Result<(PlanningProblem, RaiseRules)> {
        Ok((self.b.build()?, self.rules))
    }
}

fn block(i: usize) -> String {
    ((b'a' + i as u8) as char).to_string()
}

fn on(x: usize, y: usize) -> String {
    format!("on_{}_{}", block(x), block(y))
}

fn ontable(x: usize) -> String {
    format!("ontable_{}", block(x))
}

fn clear(x: usize) -> String {
    format!("clear_{}", block(x))
}

fn holding(x: usize) -> String {
    format!("holding_{}", block(x))
}

/// Random partition of the blocks into towers, bottom first.
fn random_towers(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut towers = vec![vec![order[0]]];
    for &b in &order[1..] {
        if rng.gen_bool(0.5) {
            towers.last_mut().unwrap().push(b);
        } else {
            towers.push(vec![b]);
        }
    }
    towers
}

/// Goal towers whose `on` facts are not all true at the start.
fn goal_towers(n: usize, init: &[Vec<usize>], rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let pairs = |t: &[Vec<usize>]| -> Vec<(usize, usize)> {
        t.iter().flat_map(|t| t.windows(2).map(|w| (w[1], w[0]))).collect()
    };
    let start = pairs(init);
    loop {
        let g = random_towers(n, rng);
        if pairs(&g).iter().any(|p| !start.contains(p)) {
            return g;
        }
    }
}

fn blocks_common(s: &mut Strips, n: usize, rng: &mut ChaCha8Rng) {
    let init = random_towers(n, rng);
    for t in &init {
        s.set(&ontable(t[0]), 1);
        s.set(&clear(*t.last().unwrap()), 1);
        for w in t.windows(2) {
            s.set(&on(w[1], w[0]), 1);
        }
    }
    for t in goal_towers(n, &init, rng) {
        for w in t.windows(2) {
            s.goal(&on(w[1], w[0]), 1);
        }
    }
}

fn blocks_vars(s: &mut Strips, n: usize) {
    for x in 0..n {
        for y in 0..n {
            if x != y {
                s.atom(&on(x, y));
            }
        }
    }
    for x in 0..n {
        s.atom(&ontable(x));
    }
    for x in 0..n {
        s.atom(&clear(x));
    }
}

/// Blocks world with move-b-to-b, move-b-to-t and move-t-to-b.
pub fn blocks3(n: usize, rng: &mut ChaCha8Rng) -> Result<(PlanningProblem, RaiseRules)> {
    let mut s = Strips::new();
    blocks_vars(&mut s, n);
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            for z in 0..n {
                if z == x || z == y {
                    continue;
                }
                // clear z rules out anything on z, on x rules out clear y
                s.op(
                    &format!("move-b-to-b_{}_{}_{}", block(x), block(y), block(z)),
                    &[&clear(x), &clear(z), &on(x, y)],
                    &[(&on(x, z), Some(0)), (&clear(y), Some(0))],
                    &[(&on(x, y), None), (&clear(z), None)],
                );
            }
            s.op(
                &format!("move-b-to-t_{}_{}", block(x), block(y)),
                &[&clear(x), &on(x, y)],
                &[(&ontable(x), Some(0)), (&clear(y), Some(0))],
                &[(&on(x, y), None)],
            );
            s.op(
                &format!("move-t-to-b_{}_{}", block(x), block(y)),
                &[&clear(x), &clear(y), &ontable(x)],
                &[(&on(x, y), Some(0))],
                &[(&clear(y), None), (&ontable(x), None)],
            );
        }
    }
    blocks_common(&mut s, n, rng);
    s.finish()
}

/// Blocks world with pick-up, put-down, stack and unstack.
pub fn blocks4(n: usize, rng: &mut ChaCha8Rng) -> Result<(PlanningProblem, RaiseRules)> {
    let mut s = Strips::new();
    blocks_vars(&mut s, n);
    for x in 0..n {
        s.atom(&holding(x));
    }
    s.atom("handempty");
    for x in 0..n {
        s.op(
            &format!("pick-up_{}", block(x)),
            &[&clear(x), &ontable(x), "handempty"],
            &[(&holding(x), Some(0))],
            &[(&clear(x), None), (&ontable(x), None), ("handempty", None)],
        );
        s.op(
            &format!("put-down_{}", block(x)),
            &[&holding(x)],
            &[(&clear(x), Some(0)), (&ontable(x), Some(0)), ("handempty", Some(0))],
            &[(&holding(x), None)],
        );
        for y in 0..n {
            if x == y {
                continue;
            }
            s.op(
                &format!("stack_{}_{}", block(x), block(y)),
                &[&holding(x), &clear(y)],
                &[(&on(x, y), Some(0)), (&clear(x), Some(0)), ("handempty", Some(0))],
                &[(&holding(x), None), (&clear(y), None)],
            );
            s.op(
                &format!("unstack_{}_{}", block(x), block(y)),
                &[&on(x, y), &clear(x), "handempty"],
                &[(&holding(x), Some(0)), (&clear(y), Some(0))],
                &[(&on(x, y), None), (&clear(x), None), ("handempty", None)],
            );
        }
    }
    s.set("handempty", 1);
    blocks_common(&mut s, n, rng);
    s.finish()
}

fn tile_at(t: usize, c: usize) -> String {
    format!("at_t{t}_c{c}")
}

fn blank(c: usize) -> String {
    format!("blank_c{c}")
}

fn grid_neighbours(side: usize, c: usize) -> Vec<usize> {
    let (r, k) = (c / side, c % side);
    let mut out = Vec::new();
    if r > 0 {
        out.push(c - side);
    }
    if r + 1 < side {
        out.push(c + side);
    }
    if k > 0 {
        out.push(c - 1);
    }
    if k + 1 < side {
        out.push(c + 1);
    }
    out
}

/// 3×3 sliding puzzle scrambled by a random walk of `walk` blank moves from
/// the solved board (tiles 1..8 on cells 0..7, blank on cell 8).
pub fn eight_puzzle(walk: usize, rng: &mut ChaCha8Rng) -> Result<(PlanningProblem, RaiseRules)> {
    let mut s = Strips::new();
    for t in 1..=8 {
        for c in 0..9 {
            s.atom(&tile_at(t, c));
        }
    }
    for c in 0..9 {
        s.atom(&blank(c));
    }
    for t in 1..=8 {
        for from in 0..9 {
            for to in grid_neighbours(3, from) {
                // blank on `to` rules out a tile there; the tile rules out blank on `from`
                s.op(
                    &format!("move_t{t}_c{from}_c{to}"),
                    &[&tile_at(t, from), &blank(to)],
                    &[(&tile_at(t, to), Some(0)), (&blank(from), Some(0))],
                    &[(&tile_at(t, from), None), (&blank(to), None)],
                );
            }
        }
    }
    let mut board: Vec<usize> = (1..=8).chain([0]).collect();
    let mut hole = 8;
    let mut prev = usize::MAX;
    for _ in 0..walk {
        let options: Vec<usize> = grid_neighbours(3, hole).into_iter().filter(|&c| c != prev).collect();
        let next = *options.choose(rng).expect("every cell has two neighbours");
        board.swap(hole, next);
        prev = hole;
        hole = next;
    }
    for (c, &t) in board.iter().enumerate() {
        if t == 0 {
            s.set(&blank(c), 1);
        } else {
            s.set(&tile_at(t, c), 1);
        }
    }
    for t in 1..=8 {
        s.goal(&tile_at(t, t - 1), 1);
    }
    s.finish()
}

fn robot_at(side: usize, c: usize) -> String {
    format!("at_{}_{}", c / side, c % side)
}

fn visited(side: usize, c: usize) -> String {
    format!("visited_{}_{}", c / side, c % side)
}

/// Grid tour: visit every cell of a `side × side` grid from a random start.
pub fn visitall(side: usize, rng: &mut ChaCha8Rng) -> Result<(PlanningProblem, RaiseRules)> {
    let mut s = Strips::new();
    let cells = side * side;
    for c in 0..cells {
        s.atom(&robot_at(side, c));
    }
    for c in 0..cells {
        s.atom(&visited(side, c));
    }
    for from in 0..cells {
        for to in grid_neighbours(side, from) {
            // whether `to` was visited before is not implied by anything
            s.op(
                &format!("move_{}_{}", robot_at(side, from), robot_at(side, to)),
                &[&robot_at(side, from)],
                &[(&robot_at(side, to), Some(0)), (&visited(side, to), None)],
                &[(&robot_at(side, from), None)],
            );
        }
    }
    let start = rng.gen_range(0..cells);
    s.set(&robot_at(side, start), 1);
    s.set(&visited(side, start), 1);
    for c in 0..cells {
        s.goal(&visited(side, c), 1);
    }
    s.finish()
}

/// A counter that must go from 0 to 12 using a +15 jump or +4 steps.
///
/// A compliant variable fixes each action's starting value, so the +4 step
/// is grounded once per level it can fire from.
pub fn counter() -> Result<PlanningProblem> {
    let mut b = ProblemBuilder::new();
    let f = b.variable("f", 0, 15);
    let one = Rational::from_int(1);
    b.action("jump15", one.clone(), &[(f, 0, 15)])
        .action("inc4_0", one.clone(), &[(f, 0, 4)])
        .action("inc4_4", one.clone(), &[(f, 4, 8)])
        .action("inc4_8", one, &[(f, 8, 12)])
        .init(f, 0)
        .goal(f, 12);
    b.build()
}

/// The bare two-action system `M = (15 4)`, `D = (12)`.
///
/// Its increment fires only from 0, so no plan exists, but every operator
/// count heuristic is well defined at the initial state.
pub fn fig1_system() -> Result<PlanningProblem> {
    let mut b = ProblemBuilder::new();
    let f = b.variable("f", 0, 15);
    let one = Rational::from_int(1);
    b.action("a1", one.clone(), &[(f, 0, 15)])
        .action("a2", one, &[(f, 0, 4)])
        .goal(f, 12);
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (p, rules) = blocks3(3, &mut rng).unwrap();
        let a = p.action_index("move-b-to-b_a_b_c").unwrap();
        let act = &p.actions()[a];
        let get = |name: &str| *act.effect_on(p.var_index(name).unwrap()).unwrap();
        assert_eq!((get("clear_a").from, get("clear_a").to), (1, UNSPECIFIED));
        assert_eq!((get("clear_c").from, get("clear_c").to), (1, 0));
        assert_eq!((get("on_a_b").from, get("on_a_b").to), (1, 0));
        assert_eq!((get("on_a_c").from, get("on_a_c").to), (UNSPECIFIED, 1));
        assert_eq!(
            rules.get(&("move-b-to-b_a_b_c".into(), "on_a_c".into())),
            Some(&(0, 1))
        );
        assert_eq!(
            rules.get(&("move-b-to-b_a_b_c".into(), "clear_a".into())),
            Some(&(1, 1))
        );
        assert_eq!(p.actions().len(), 3 * 2 + 2 * 6);
    }

    #[test]
    fn generation_is_deterministic() {
        let suite = BenchSuite::new(Domain::Blocks4, vec![3], 2, 7);
        let a = generate(&suite).unwrap();
        let b = generate(&suite).unwrap();
        assert_eq!(a.len(), 2);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.problem, y.problem);
            assert_eq!(x.optimal, y.optimal);
        }
    }

    #[test]
    fn puzzle_without_scramble_is_solved() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (p, _) = eight_puzzle(0, &mut rng).unwrap();
        let o = optimal_cost_oracle(&p, 10).unwrap();
        assert_eq!(o.cost(), Some(&Rational::from_int(0)));
    }

    #[test]
    fn counter_optimum() {
        let suite = BenchSuite::new(Domain::Counter, vec![], 1, 0);
        let g = generate(&suite).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].optimal, Rational::from_int(3));
    }

    #[test]
    fn caps_are_enforced() {
        assert!(generate(&BenchSuite::new(Domain::Blocks3, vec![7], 1, 0)).is_err());
        assert!(generate(&BenchSuite::new(Domain::Visitall, vec![5], 1, 0)).is_err());
        assert!("gripper".parse::<Domain>().is_err());
    }

    #[test]
    fn visitall_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (p, rules) = visitall(2, &mut rng).unwrap();
        assert_eq!(p.variables().len(), 8);
        assert_eq!(p.actions().len(), 8);
        assert!(p.goal_compliant_set().is_empty());
        assert!(rules.keys().all(|(_, v)| v.starts_with("at_")));
    }
}
