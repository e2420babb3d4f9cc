//! A neoRL node: elements-of-interest in, an actionable value quadruple and
//! one output desire element out.
//!
//! The value quadruple is the valence-weighted superposition of the GVF slices
//! addressed by each element. Because the actions have Euclidean meaning, that
//! quadruple projects onto the plane as a desire vector, and the node emits an
//! element at the tip of that vector carrying the summed input valence. The
//! emitted element lives in the same arena coordinates as the inputs, so it can
//! feed any compatible node, including the one that produced it.

use crate::action::{Action, ActionValues};
use crate::geom::{Rect, Vec2};
use crate::gvf::GvfBank;
use crate::nres::CellIndex;
use serde::{Deserialize, Serialize};

/// A purposive element-of-interest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub coordinate: Vec2,
    /// Signed reward expectancy.
    pub valence: f64,
}

impl Element {
    pub const fn new(coordinate: Vec2, valence: f64) -> Self {
        Self { coordinate, valence }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeOutput {
    pub q: ActionValues,
    pub desire: Element,
}

/// `Q(a) = Σ_e ψ_e · q[cell(e)][agent_cell][a]`, summed in list order.
///
/// Elements with zero valence are skipped so they never contribute, not even
/// a signed zero.
pub fn extract_q(bank: &GvfBank, agent_cell: CellIndex, elements: &[Element]) -> ActionValues {
    let grid = bank.grid();
    let mut q = ActionValues::ZERO;
    for e in elements.iter().filter(|e| e.valence != 0.0) {
        let goal = grid.cell_of(e.coordinate);
        let slice = bank
            .q_slice(goal, agent_cell)
            .expect("cell_of yields valid cells; agent_cell checked by caller");
        q.add_scaled(&slice, e.valence);
    }
    q
}

/// Projection of a value quadruple onto the cardinal basis:
/// `(Q_E - Q_W, Q_N - Q_S)`.
pub fn desire_vector(q: &ActionValues) -> Vec2 {
    Vec2::new(q[Action::East] - q[Action::West], q[Action::North] - q[Action::South])
}

/// Output element at `agent_position + d` (clamped to `bounds`), carrying the
/// sum of the input valences.
pub fn emit_element(agent_position: Vec2, d: Vec2, elements: &[Element], bounds: &Rect) -> Element {
    Element {
        coordinate: bounds.clamp(agent_position + d),
        valence: elements.iter().fold(0.0, |acc, e| acc + e.valence),
    }
}

/// How a node turns its desire vector into the emitted element's offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesireOptions {
    /// Scale the vector to unit length first (a zero vector stays zero).
    pub normalize: bool,
    /// Multiplier applied after normalisation.
    pub scale: f64,
    /// Flip the offset when the summed valence is negative, so that the
    /// element's valence times its direction reproduces the desire.
    pub orient_by_valence: bool,
}

impl Default for DesireOptions {
    fn default() -> Self {
        Self {
            normalize: false,
            scale: 1.0,
            orient_by_valence: false,
        }
    }
}

impl DesireOptions {
    pub fn offset(&self, d: Vec2, valence: f64) -> Vec2 {
        let mut d = d;
        if self.normalize {
            let len = d.norm();
            if len > 0.0 {
                d = d * (1.0 / len);
            }
        }
        d = d * self.scale;
        if self.orient_by_valence && valence < 0.0 {
            d = d * -1.0;
        }
        d
    }
}

/// Full forward pass of one node. Pure with respect to the bank.
pub fn node_forward(bank: &GvfBank, agent_position: Vec2, elements: &[Element]) -> NodeOutput {
    node_forward_with(bank, agent_position, elements, &DesireOptions::default())
}

/// As [`node_forward`], shaping the emitted offset by `options`.
pub fn node_forward_with(
    bank: &GvfBank,
    agent_position: Vec2,
    elements: &[Element],
    options: &DesireOptions,
) -> NodeOutput {
    let grid = bank.grid();
    let agent_cell = grid.cell_of(agent_position);
    let q = extract_q(bank, agent_cell, elements);
    let valence = elements.iter().fold(0.0, |acc, e| acc + e.valence);
    let d = options.offset(desire_vector(&q), valence);
    NodeOutput {
        q,
        desire: emit_element(agent_position, d, elements, &grid.bounds()),
    }
}
