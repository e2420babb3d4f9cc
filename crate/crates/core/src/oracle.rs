//! Brute-force ground truth on deterministic grid worlds.
//!
//! Nothing here calls into the GVF update rule except
//! [`train_to_convergence`], which drives a real bank with a schedule that is
//! known to reach the fixed point; [`q_star`] and [`value_iteration`] compute
//! that fixed point independently.

use crate::action::{Action, ActionValues};
use crate::error::Result;
use crate::gvf::{CellTransition, GvfBank};
use crate::nres::CellIndex;
use std::collections::VecDeque;

/// N×N cells with deterministic 4-neighbour moves; bumping a wall stays put.
/// Row 0 is the southern edge, matching grid indexing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridWorld {
    pub resolution: usize,
}

impl GridWorld {
    pub fn new(resolution: usize) -> Self {
        assert!(resolution >= 1, "grid world needs at least one cell");
        Self { resolution }
    }

    pub fn cells(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn next(&self, s: usize, a: Action) -> usize {
        let n = self.resolution;
        let (row, col) = (s / n, s % n);
        let (row, col) = match a {
            Action::North if row + 1 < n => (row + 1, col),
            Action::South if row > 0 => (row - 1, col),
            Action::East if col + 1 < n => (row, col + 1),
            Action::West if col > 0 => (row, col - 1),
            _ => (row, col),
        };
        row * n + col
    }

    /// Shortest step counts to `goal` by breadth-first search over reversed moves.
    pub fn distances(&self, goal: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.cells()];
        dist[goal] = 0;
        let mut queue = VecDeque::from([goal]);
        while let Some(cur) = queue.pop_front() {
            for s in 0..self.cells() {
                if dist[s] == usize::MAX && Action::ALL.iter().any(|&a| self.next(s, a) == cur) {
                    dist[s] = dist[cur] + 1;
                    queue.push_back(s);
                }
            }
        }
        dist
    }
}

/// Exact GVF fixed point for `goal`: `Q*(s, a) = γ^d(next(s, a), goal)`.
pub fn q_star(world: &GridWorld, goal: usize, gamma: f64) -> Vec<ActionValues> {
    let dist = world.distances(goal);
    (0..world.cells())
        .map(|s| {
            let mut q = ActionValues::ZERO;
            for a in Action::ALL {
                q[a] = gamma.powi(dist[world.next(s, a)] as i32);
            }
            q
        })
        .collect()
}

/// Second route to the same table: synchronous value iteration until the
/// largest change drops below `tol`.
pub fn value_iteration(world: &GridWorld, goal: usize, gamma: f64, tol: f64) -> Vec<ActionValues> {
    let mut q = vec![ActionValues::ZERO; world.cells()];
    loop {
        let mut delta: f64 = 0.0;
        let next_q: Vec<ActionValues> = (0..world.cells())
            .map(|s| {
                let mut row = ActionValues::ZERO;
                for a in Action::ALL {
                    let s2 = world.next(s, a);
                    row[a] = if s2 == goal { 1.0 } else { gamma * q[s2].max() };
                    delta = delta.max((row[a] - q[s][a]).abs());
                }
                row
            })
            .collect();
        q = next_q;
        if delta < tol {
            return q;
        }
    }
}

/// Transitions ordered by increasing distance of their source from `goal`.
fn sweep(world: &GridWorld, goal: usize) -> Vec<CellTransition> {
    let dist = world.distances(goal);
    let mut states: Vec<usize> = (0..world.cells()).collect();
    states.sort_by_key(|&s| (dist[s], s));
    states
        .into_iter()
        .flat_map(|s| {
            Action::ALL.into_iter().map(move |a| CellTransition {
                from_cell: CellIndex(s),
                action: a,
                to_cell: CellIndex(world.next(s, a)),
            })
        })
        .collect()
}

/// Drive `bank` to the fixed point. For each goal in turn, every
/// `(state, action)` is replayed outward from the goal, twice: the first pass
/// settles each state's greedy entry before anything bootstraps from it, the
/// second settles the remaining entries. Requires `alpha = 1`.
pub fn train_to_convergence(bank: &mut GvfBank, world: &GridWorld) -> Result<()> {
    assert_eq!(bank.alpha(), 1.0, "one-pass convergence needs alpha = 1");
    assert_eq!(bank.grid().resolution(), world.resolution);
    for goal in 0..world.cells() {
        let transitions = sweep(world, goal);
        for _ in 0..2 {
            for &t in &transitions {
                bank.update_all(t)?;
            }
        }
    }
    Ok(())
}

/// Largest absolute difference between a bank and `q_star` over every goal.
pub fn max_error(bank: &GvfBank, world: &GridWorld) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for goal in 0..world.cells() {
        let exact = q_star(world, goal, bank.gamma());
        for (s, row) in exact.iter().enumerate() {
            let got = bank.q_slice(CellIndex(goal), CellIndex(s))?;
            for a in Action::ALL {
                worst = worst.max((got[a] - row[a]).abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;
    use crate::nres::NresGrid;

    #[test]
    fn adjacent_entry_is_one() {
        let w = GridWorld::new(3);
        let q = q_star(&w, 4, 0.5);
        assert_eq!(q[3][Action::East], 1.0);
        // bumping the west wall stays one step away
        assert_eq!(q[3][Action::West], 0.5);
        assert_eq!(q[3][Action::North], 0.25);
    }

    #[test]
    fn far_corner() {
        // from the south-west corner, moving North leaves 3 steps to the north-east corner
        let w = GridWorld::new(3);
        let q = q_star(&w, 8, 0.5);
        assert_eq!(q[0][Action::North], 0.125);
        // bumping the south wall keeps distance 4
        assert_eq!(q[0][Action::South], 0.0625);
    }

    #[test]
    fn value_iteration_agrees() {
        for n in [1, 3, 5] {
            let w = GridWorld::new(n);
            for goal in 0..w.cells() {
                let exact = q_star(&w, goal, 0.9);
                let vi = value_iteration(&w, goal, 0.9, 1e-13);
                for (a, b) in exact.iter().zip(&vi) {
                    for act in Action::ALL {
                        assert!((a[act] - b[act]).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn values_fall_with_distance() {
        let w = GridWorld::new(5);
        let dist = w.distances(7);
        let q = q_star(&w, 7, 0.95);
        for s in 0..w.cells() {
            for a in Action::ALL {
                for s2 in 0..w.cells() {
                    for a2 in Action::ALL {
                        let (d1, d2) = (dist[w.next(s, a)], dist[w.next(s2, a2)]);
                        if d1 < d2 {
                            assert!(q[s][a] > q[s2][a2]);
                        } else if d1 == d2 {
                            assert_eq!(q[s][a], q[s2][a2]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn single_cell_converges_in_one_update() {
        let grid = NresGrid::new(1, Rect::unit()).unwrap();
        let mut bank = GvfBank::new(grid, 0.95, 1.0).unwrap();
        bank.update_all(CellTransition {
            from_cell: CellIndex(0),
            action: Action::East,
            to_cell: CellIndex(0),
        })
        .unwrap();
        assert_eq!(bank.q_slice(CellIndex(0), CellIndex(0)).unwrap()[Action::East], 1.0);
    }

    #[test]
    fn trained_bank_matches() {
        for (n, gamma) in [(1, 0.5), (3, 0.95), (4, 0.5)] {
            let w = GridWorld::new(n);
            let mut bank = GvfBank::new(NresGrid::new(n, Rect::unit()).unwrap(), gamma, 1.0).unwrap();
            train_to_convergence(&mut bank, &w).unwrap();
            assert!(max_error(&bank, &w).unwrap() < 1e-9);
        }
    }
}
