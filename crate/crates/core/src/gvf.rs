//! The cognitive map: one off-policy GVF per goal cell of a grid.
//!
//! Every GVF sees the same behaviour stream. GVF `g` has cumulant 1 on entering
//! cell `g` and terminates there, so `q[g][s][a]` estimates the discounted
//! expectancy of reaching `g` by taking `a` in `s` and acting greedily
//! towards `g` afterwards. All entries stay inside `[0, 1]`.

use crate::action::{Action, ActionValues};
use crate::error::{Error, Result};
use crate::nres::{CellIndex, NresGrid};
use std::io::Write;

/// One observed move between cells of a bank's grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellTransition {
    pub from_cell: CellIndex,
    pub action: Action,
    pub to_cell: CellIndex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GvfBank {
    grid: NresGrid,
    gamma: f64,
    alpha: f64,
    /// Flat `[goal][state][action]` table.
    q: Vec<f64>,
    updates: u64,
}

impl GvfBank {
    /// Zero-initialised bank. `gamma` in `(0, 1)`, `alpha` in `(0, 1]`.
    pub fn new(grid: NresGrid, gamma: f64, alpha: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::config("gamma", format!("must lie in (0, 1), got {gamma}")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::config("alpha", format!("must lie in (0, 1], got {alpha}")));
        }
        let cells = grid.cell_count();
        Ok(Self {
            grid,
            gamma,
            alpha,
            q: vec![0.0; cells * cells * 4],
            updates: 0,
        })
    }

    pub fn grid(&self) -> &NresGrid {
        &self.grid
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of `update_all` calls applied so far.
    pub fn update_count(&self) -> u64 {
        self.updates
    }

    #[inline]
    fn offset(&self, goal: usize, state: usize) -> usize {
        (goal * self.grid.cell_count() + state) * 4
    }

    /// Train every GVF in the bank from one behaviour transition.
    pub fn update_all(&mut self, t: CellTransition) -> Result<()> {
        self.grid.check(t.from_cell)?;
        self.grid.check(t.to_cell)?;
        let cells = self.grid.cell_count();
        let (from, to, a) = (t.from_cell.0, t.to_cell.0, t.action.index());
        let (gamma, alpha) = (self.gamma, self.alpha);
        for (goal, table) in self.q.chunks_exact_mut(cells * 4).enumerate() {
            let target = if to == goal {
                1.0
            } else {
                let next = &table[to * 4..to * 4 + 4];
                gamma * next[0].max(next[1]).max(next[2]).max(next[3])
            };
            let entry = &mut table[from * 4 + a];
            *entry += alpha * (target - *entry);
        }
        self.updates += 1;
        Ok(())
    }

    /// The four action values for reaching `goal` from `state`.
    pub fn q_slice(&self, goal: CellIndex, state: CellIndex) -> Result<ActionValues> {
        self.grid.check(goal)?;
        self.grid.check(state)?;
        let o = self.offset(goal.0, state.0);
        Ok(ActionValues([self.q[o], self.q[o + 1], self.q[o + 2], self.q[o + 3]]))
    }

    /// Raw table in `[goal][state][action]` order.
    pub fn values(&self) -> &[f64] {
        &self.q
    }

    /// Write the table as CSV rows `goal,state,action,value`.
    pub fn dump_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "goal,state,action,value")?;
        let cells = self.grid.cell_count();
        for goal in 0..cells {
            for state in 0..cells {
                let o = self.offset(goal, state);
                for a in Action::ALL {
                    writeln!(out, "{goal},{state},{a},{}", self.q[o + a.index()])?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;
    use proptest::prelude::*;

    fn bank(n: usize) -> GvfBank {
        GvfBank::new(NresGrid::new(n, Rect::unit()).unwrap(), 0.95, 0.1).unwrap()
    }

    fn tr(from: usize, action: Action, to: usize) -> CellTransition {
        CellTransition {
            from_cell: CellIndex(from),
            action,
            to_cell: CellIndex(to),
        }
    }

    #[test]
    fn fresh_bank_is_zero() {
        let b = bank(3);
        assert_eq!(b.values().len(), 9 * 9 * 4);
        assert!(b.values().iter().all(|v| *v == 0.0));
        assert_eq!(b.q_slice(CellIndex(2), CellIndex(5)).unwrap(), ActionValues::ZERO);
    }

    #[test]
    fn constants_are_checked() {
        let g = NresGrid::new(3, Rect::unit()).unwrap();
        assert!(GvfBank::new(g, 1.0, 0.1).is_err());
        assert!(GvfBank::new(g, 0.0, 0.1).is_err());
        assert!(GvfBank::new(g, 0.9, 0.0).is_err());
        assert!(GvfBank::new(g, 0.9, 1.5).is_err());
        assert!(GvfBank::new(g, 0.9, 1.0).is_ok());
    }

    #[test]
    fn single_and_repeated_entry() {
        let mut b = bank(3);
        let t = tr(3, Action::East, 4);
        b.update_all(t).unwrap();
        assert_eq!(b.q_slice(CellIndex(4), CellIndex(3)).unwrap(), ActionValues::new(0.0, 0.0, 0.1, 0.0));
        // other goals saw no cumulant and bootstrap from zeros
        for g in (0..9).filter(|g| *g != 4) {
            assert_eq!(b.q_slice(CellIndex(g), CellIndex(3)).unwrap(), ActionValues::ZERO);
        }
        b.update_all(t).unwrap();
        let v = b.q_slice(CellIndex(4), CellIndex(3)).unwrap()[Action::East];
        assert!((v - 0.19).abs() < 1e-15, "{v}");
        assert_eq!(b.update_count(), 2);
    }

    #[test]
    fn bootstraps_through_next_cell() {
        let mut b = bank(3);
        b.update_all(tr(4, Action::East, 5)).unwrap();
        b.update_all(tr(3, Action::East, 4)).unwrap();
        // goal 5 from 3: 0.1 * 0.95 * 0.1
        let v = b.q_slice(CellIndex(5), CellIndex(3)).unwrap()[Action::East];
        assert!((v - 0.0095).abs() < 1e-15);
    }

    #[test]
    fn single_cell_bank() {
        let mut b = bank(1);
        b.update_all(tr(0, Action::North, 0)).unwrap();
        assert_eq!(b.q_slice(CellIndex(0), CellIndex(0)).unwrap()[Action::North], 0.1);
    }

    #[test]
    fn invalid_indices() {
        let mut b = bank(3);
        assert!(b.q_slice(CellIndex(9), CellIndex(0)).is_err());
        assert!(b.update_all(tr(0, Action::North, 9)).is_err());
        assert_eq!(b.update_count(), 0);
    }

    #[test]
    fn csv_dump_shape() {
        let mut b = bank(2);
        b.update_all(tr(0, Action::East, 1)).unwrap();
        let mut buf = Vec::new();
        b.dump_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "goal,state,action,value");
        assert_eq!(lines.len(), 1 + 4 * 4 * 4);
        assert!(lines.contains(&"1,0,E,0.1"));
    }

    fn transitions(n: usize) -> impl Strategy<Value = Vec<(usize, usize, usize)>> {
        prop::collection::vec((0..n * n, 0..4usize, 0..n * n), 1..200)
    }

    proptest! {
        #[test]
        fn entries_stay_in_unit_interval(
            steps in transitions(4),
            alpha in 0.01f64..=1.0,
            gamma in 0.01f64..0.99,
        ) {
            let mut b = GvfBank::new(NresGrid::new(4, Rect::unit()).unwrap(), gamma, alpha).unwrap();
            for (f, a, t) in steps {
                b.update_all(tr(f, Action::ALL[a], t)).unwrap();
            }
            prop_assert!(b.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }

        #[test]
        fn update_touches_only_its_state_action(
            warmup in transitions(3),
            (f, a, t) in (0..9usize, 0..4usize, 0..9usize),
        ) {
            let mut b = bank(3);
            for (f, a, t) in warmup {
                b.update_all(tr(f, Action::ALL[a], t)).unwrap();
            }
            let before = b.values().to_vec();
            b.update_all(tr(f, Action::ALL[a], t)).unwrap();
            for (i, (x, y)) in before.iter().zip(b.values()).enumerate() {
                let (state, action) = ((i / 4) % 9, i % 4);
                if state != f || action != a {
                    prop_assert_eq!(x.to_bits(), y.to_bits());
                }
            }
        }
    }
}
