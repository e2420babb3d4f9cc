//! Self-checks runnable from the command line: oracle equivalence of the GVF
//! bank, superposition, desire arithmetic, and the grid partition.
//!
//! Each suite compares the implementation against a route that does not share
//! its code path and returns a report instead of panicking.

use crate::action::{Action, ActionValues};
use crate::env::{EnvParams, EnvState};
use crate::geom::{Rect, Vec2};
use crate::gvf::{CellTransition, GvfBank};
use crate::harness::{preset, Preset};
use crate::network::Network;
use crate::node::{desire_vector, emit_element, extract_q, node_forward, Element};
use crate::nres::{CellIndex, NresGrid};
use crate::oracle::{max_error, q_star, train_to_convergence, value_iteration, GridWorld};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

pub const ORACLE_TOLERANCE: f64 = 1e-9;
pub const ORACLE_TIME_BUDGET: Duration = Duration::from_secs(1);
pub const SUPERPOSITION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: usize,
    pub failures: Vec<String>,
    pub elapsed: Duration,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checks: 0,
            failures: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn timed(name: &'static str, body: impl FnOnce(&mut SuiteReport)) -> SuiteReport {
    let mut report = SuiteReport::new(name);
    let start = Instant::now();
    body(&mut report);
    report.elapsed = start.elapsed();
    report
}

pub fn run_all() -> Vec<SuiteReport> {
    vec![oracle_suite(), superposition_suite(), desire_suite(), partition_suite()]
}

/// Banks trained on deterministic grid worlds equal `γ^d` on every entry.
pub fn oracle_suite() -> SuiteReport {
    timed("oracle-equivalence", |r| {
        for n in [1, 3, 7] {
            for gamma in [0.5, 0.95] {
                let world = GridWorld::new(n);
                let start = Instant::now();
                let mut bank = GvfBank::new(NresGrid::new(n, Rect::unit()).unwrap(), gamma, 1.0).unwrap();
                train_to_convergence(&mut bank, &world).unwrap();
                let err = max_error(&bank, &world).unwrap();
                let took = start.elapsed();
                r.check(err < ORACLE_TOLERANCE, || format!("N={n} gamma={gamma}: max error {err:e}"));
                r.check(took < ORACLE_TIME_BUDGET, || format!("N={n} gamma={gamma}: took {took:?}"));
                // the closed form itself against value iteration
                for goal in 0..world.cells() {
                    let a = q_star(&world, goal, gamma);
                    let b = value_iteration(&world, goal, gamma, 1e-13);
                    let worst = a
                        .iter()
                        .zip(&b)
                        .flat_map(|(x, y)| Action::ALL.map(|act| (x[act] - y[act]).abs()))
                        .fold(0.0, f64::max);
                    r.check(worst < 1e-12, || format!("N={n} goal={goal}: q_star vs value iteration {worst:e}"));
                }
            }
        }
    })
}

/// Bank filled by a random walk of transitions.
pub fn random_bank(rng: &mut ChaCha8Rng, resolution: usize, transitions: usize) -> GvfBank {
    let grid = NresGrid::new(resolution, Rect::unit()).unwrap();
    let gamma = rng.gen_range(0.5..0.99);
    let alpha = rng.gen_range(0.05..=1.0);
    let mut bank = GvfBank::new(grid, gamma, alpha).unwrap();
    let cells = grid.cell_count();
    for _ in 0..transitions {
        bank.update_all(CellTransition {
            from_cell: CellIndex(rng.gen_range(0..cells)),
            action: Action::ALL[rng.gen_range(0..4)],
            to_cell: CellIndex(rng.gen_range(0..cells)),
        })
        .unwrap();
    }
    bank
}

pub fn random_elements(rng: &mut ChaCha8Rng, count: usize) -> Vec<Element> {
    (0..count)
        .map(|_| {
            Element::new(
                Vec2::new(rng.gen_range(-0.1..1.1), rng.gen_range(-0.1..1.1)),
                rng.gen_range(-2.0..2.0),
            )
        })
        .collect()
}

fn close(a: &ActionValues, b: &ActionValues, tol: f64) -> bool {
    a.0.iter().zip(b.0).all(|(x, y)| (x - y).abs() <= tol)
}

/// Value extraction is linear in the element set and ignores ordering.
pub fn superposition_suite() -> SuiteReport {
    timed("superposition", |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        for case in 0..100 {
            let n = rng.gen_range(1..=9);
            let bank = random_bank(&mut rng, n, 400);
            let elements = random_elements(&mut rng, 6);
            let grid = *bank.grid();
            let agent = CellIndex(rng.gen_range(0..grid.cell_count()));
            let whole = extract_q(&bank, agent, &elements);

            // brute force: slice lookups summed one by one
            let mut oracle = ActionValues::ZERO;
            for e in &elements {
                let s = bank.q_slice(grid.cell_of(e.coordinate), agent).unwrap();
                for a in Action::ALL {
                    oracle[a] += e.valence * s[a];
                }
            }
            r.check(close(&whole, &oracle, SUPERPOSITION_TOLERANCE), || {
                format!("case {case}: {whole:?} vs element-wise {oracle:?}")
            });

            for mask in 0u32..(1 << elements.len()) {
                let (left, right): (Vec<_>, Vec<_>) =
                    elements.iter().enumerate().partition(|(i, _)| mask & (1 << i) != 0);
                let left: Vec<Element> = left.into_iter().map(|(_, e)| *e).collect();
                let right: Vec<Element> = right.into_iter().map(|(_, e)| *e).collect();
                let parts = extract_q(&bank, agent, &left) + extract_q(&bank, agent, &right);
                r.check(close(&whole, &parts, SUPERPOSITION_TOLERANCE), || {
                    format!("case {case} mask {mask:#b}: partition sum differs")
                });
            }

            let pos = grid.cell_center(agent).unwrap();
            let base = node_forward(&bank, pos, &elements);
            for _ in 0..5 {
                let mut shuffled = elements.clone();
                shuffled.shuffle(&mut rng);
                let out = node_forward(&bank, pos, &shuffled);
                let ok = close(&base.q, &out.q, SUPERPOSITION_TOLERANCE)
                    && base.desire.coordinate.distance(out.desire.coordinate) <= SUPERPOSITION_TOLERANCE
                    && (base.desire.valence - out.desire.valence).abs() <= SUPERPOSITION_TOLERANCE;
                r.check(ok, || format!("case {case}: permutation changed the output"));
            }
        }
    })
}

/// Σ_a Q(a)·unit(a), one basis vector at a time.
pub fn basis_sum(q: &ActionValues) -> Vec2 {
    let mut d = Vec2::ZERO;
    for a in Action::ALL {
        d = d + a.unit() * q[a];
    }
    d
}

pub fn desire_suite() -> SuiteReport {
    desire_suite_with(desire_vector)
}

/// Desire arithmetic against the explicit basis sum, using `desire` as the
/// implementation under test.
pub fn desire_suite_with(desire: fn(&ActionValues) -> Vec2) -> SuiteReport {
    timed("desire-arithmetic", |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
        for i in 0..10_000 {
            let q = ActionValues(std::array::from_fn(|_| rng.gen_range(-3.0..3.0)));
            let got = desire(&q);
            let want = basis_sum(&q);
            r.check(got == want, || format!("draw {i}: desire {got:?} vs basis sum {want:?}"));
        }
        for i in 0..1_000 {
            let count = rng.gen_range(0..8);
            let elements = random_elements(&mut rng, count);
            let mut expected = 0.0;
            for e in &elements {
                expected += e.valence;
            }
            let d = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let out = emit_element(Vec2::new(0.5, 0.5), d, &elements, &Rect::unit());
            r.check(out.valence.to_bits() == expected.to_bits(), || {
                format!("draw {i}: emitted valence {} vs sum {expected}", out.valence)
            });
        }

        // A recurrent network's first tick equals the same network without the
        // feedback edge, even after both have learned identically.
        let mut informative = 0;
        for seed in 0..10 {
            let arena = Rect::unit();
            let mut with_loop = Network::build(&preset(Preset::D), arena).unwrap();
            let mut without = Network::build(&preset(Preset::B), arena).unwrap();
            let mut env = EnvState::new(EnvParams::default(), seed).unwrap();
            let mut walk = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..2_000 {
                let prev = env.observe();
                let a = Action::ALL[walk.gen_range(0..4)];
                env.step(a);
                let next = env.observe();
                with_loop.learn(&prev, a, &next);
                without.learn(&prev, a, &next);
            }
            let obs = env.observe();
            let mut r1 = ChaCha8Rng::seed_from_u64(99);
            let mut r2 = ChaCha8Rng::seed_from_u64(99);
            let t1 = with_loop.tick(&obs, &mut r1);
            let t2 = without.tick(&obs, &mut r2);
            let same = t1.agent_q.0.iter().zip(t2.agent_q.0).all(|(a, b)| a.to_bits() == b.to_bits());
            informative += usize::from(t1.agent_q != ActionValues::ZERO);
            r.check(same, || format!("seed {seed}: tick-0 agent_q {:?} vs {:?}", t1.agent_q, t2.agent_q));
        }
        r.check(informative > 0, || "every tick-0 comparison was trivially zero".into());
    })
}

/// Half-open membership, with the upper boundary folded into the last cell.
fn claims(grid: &NresGrid, cell: CellIndex, p: Vec2) -> bool {
    let n = grid.resolution();
    let b = grid.bounds();
    let (row, col) = (cell.0 / n, cell.0 % n);
    let inside = |v: f64, lo: f64, span: f64, k: usize| {
        let a = lo + span * k as f64 / n as f64;
        let z = lo + span * (k + 1) as f64 / n as f64;
        (v >= a && v < z) || (k + 1 == n && v == lo + span)
    };
    inside(p.x, b.min.x, b.width(), col) && inside(p.y, b.min.y, b.height(), row)
}

pub fn partition_suite() -> SuiteReport {
    timed("partition", |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
        for n in [1, 3, 7, 23] {
            let grid = NresGrid::new(n, Rect::unit()).unwrap();
            for i in 0..10_000 {
                let p = Vec2::new(rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
                let owners: Vec<CellIndex> = grid.cells().filter(|&c| claims(&grid, c, p)).collect();
                let found = grid.cell_of(p);
                r.check(owners == [found], || format!("N={n} sample {i} {p:?}: owners {owners:?}, cell_of {found}"));
            }
            for c in grid.cells() {
                let back = grid.cell_of(grid.cell_center(c).unwrap());
                r.check(back == c, || format!("N={n}: center of {c} maps to {back}"));
            }
            let other = NresGrid::new(n + 2, Rect::unit()).unwrap();
            r.check(grid.compatible(&grid), || format!("N={n}: not reflexive"));
            r.check(grid.compatible(&other) && other.compatible(&grid), || format!("N={n}: not symmetric"));
        }
    })
}
