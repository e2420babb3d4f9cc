//! Purposive networks of neoRL nodes.
//!
//! A node holds a cognitive map: a bank of off-policy general value functions,
//! one per cell of a square grid over the arena, each learning how to reach its
//! own cell from the shared behaviour stream. Elements-of-interest (a position
//! plus a signed valence) select and weight slices of that map; the weighted
//! sum is an actionable value quadruple over the cardinal actions, and its
//! Euclidean projection is a desire that can be passed on to further nodes or
//! back to the same node.
//!
//! The crate also ships a WaterWorld clone to run agents in, the four reference
//! architectures, a seeded batch runner, and brute-force oracles.

pub mod action;
pub mod env;
pub mod error;
pub mod geom;
pub mod gvf;
pub mod harness;
pub mod network;
pub mod node;
pub mod nres;
pub mod oracle;
pub mod verify;

pub use action::{Action, ActionValues};
pub use env::{EnvParams, EnvState, ObjectColor, ObjectState, Observation, StepEvent, StepResult};
pub use error::{Error, Result};
pub use geom::{Rect, Vec2};
pub use gvf::{CellTransition, GvfBank};
pub use harness::{run_batch, run_trial, AggregateCurve, BatchResult, ExperimentConfig, Preset, RewardTrace};
pub use network::{epsilon_greedy, Network, NetworkSpec, Tick};
pub use node::{desire_vector, emit_element, extract_q, node_forward, Element, NodeOutput};
pub use nres::{CellIndex, NresGrid};
