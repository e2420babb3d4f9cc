//! The cardinal action set and state-action value quadruples.

use crate::geom::Vec2;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul};

/// One of the four cardinal accelerations. North is `+y`, East is `+x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    North,
    South,
    East,
    West,
}

impl Action {
    /// Canonical ordering; value quadruples are indexed in this order.
    pub const ALL: [Action; 4] = [Action::North, Action::South, Action::East, Action::West];

    pub const fn index(self) -> usize {
        match self {
            Action::North => 0,
            Action::South => 1,
            Action::East => 2,
            Action::West => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Self::ALL.get(i).copied()
    }

    pub const fn unit(self) -> Vec2 {
        match self {
            Action::North => Vec2::new(0.0, 1.0),
            Action::South => Vec2::new(0.0, -1.0),
            Action::East => Vec2::new(1.0, 0.0),
            Action::West => Vec2::new(-1.0, 0.0),
        }
    }

    pub const fn symbol(self) -> char {
        match self {
            Action::North => 'N',
            Action::South => 'S',
            Action::East => 'E',
            Action::West => 'W',
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// A state-action value quadruple ordered `[N, S, E, W]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ActionValues(pub [f64; 4]);

impl ActionValues {
    pub const ZERO: ActionValues = ActionValues([0.0; 4]);

    pub const fn new(north: f64, south: f64, east: f64, west: f64) -> Self {
        Self([north, south, east, west])
    }

    pub fn get(&self, a: Action) -> f64 {
        self.0[a.index()]
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Every action attaining the maximum, in canonical order.
    pub fn argmax_set(&self) -> Vec<Action> {
        let best = self.max();
        Action::ALL.into_iter().filter(|a| self.get(*a) == best).collect()
    }

    /// `self += k * other`, component-wise.
    pub fn add_scaled(&mut self, other: &ActionValues, k: f64) {
        for (dst, src) in self.0.iter_mut().zip(other.0) {
            *dst += k * src;
        }
    }
}

impl Index<Action> for ActionValues {
    type Output = f64;
    fn index(&self, a: Action) -> &f64 {
        &self.0[a.index()]
    }
}

impl IndexMut<Action> for ActionValues {
    fn index_mut(&mut self, a: Action) -> &mut f64 {
        &mut self.0[a.index()]
    }
}

impl Add for ActionValues {
    type Output = ActionValues;
    fn add(mut self, rhs: ActionValues) -> ActionValues {
        self.add_scaled(&rhs, 1.0);
        self
    }
}

impl Mul<f64> for ActionValues {
    type Output = ActionValues;
    fn mul(self, k: f64) -> ActionValues {
        ActionValues(self.0.map(|v| v * k))
    }
}
