//! Purposive networks: neoRL nodes wired by desire edges and read out through
//! weighted value taps.
//!
//! Each node owns one GVF bank over its own grid. A node exposes one or more
//! *extraction groups*; every group gathers its inputs from the edges that
//! target it and runs one forward pass over the shared bank. Edges carry either
//! the external objects (optionally filtered by colour) or the desire element
//! emitted by another group. `Immediate` edges are evaluated within the same
//! tick and must be acyclic between nodes. `OneStep` edges deliver the
//! element the source emitted on the previous tick, which is how recurrence is
//! expressed. Every edge multiplies the valence it carries by its gain.

use crate::action::{Action, ActionValues};
use crate::env::{ObjectColor, Observation};
use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::gvf::{CellTransition, GvfBank};
use crate::node::{node_forward_with, DesireOptions, Element, NodeOutput};
use crate::nres::NresGrid;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub name: String,
    /// Cells per axis of this node's grid.
    pub resolution: usize,
    pub gamma: f64,
    pub alpha: f64,
    /// Extraction group names; each yields its own output.
    pub groups: Vec<String>,
    #[serde(default)]
    pub desire: DesireOptions,
    /// Grid bounds; the arena when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Rect>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectFilter {
    All,
    GreenOnly,
    RedOnly,
}

impl ObjectFilter {
    pub fn admits(self, color: ObjectColor) -> bool {
        match self {
            ObjectFilter::All => true,
            ObjectFilter::GreenOnly => color == ObjectColor::Green,
            ObjectFilter::RedOnly => color == ObjectColor::Red,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupRef {
    pub node: String,
    pub group: String,
}

impl GroupRef {
    pub fn new(node: &str, group: &str) -> Self {
        Self {
            node: node.to_owned(),
            group: group.to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeSource {
    ExternalObjects(ObjectFilter),
    NodeDesire(GroupRef),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delay {
    #[default]
    Immediate,
    OneStep,
}

fn unit_gain() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub source: EdgeSource,
    pub target: GroupRef,
    #[serde(default = "unit_gain")]
    pub gain: f64,
    #[serde(default)]
    pub delay: Delay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TapSpec {
    pub node: String,
    pub group: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
    pub taps: Vec<TapSpec>,
    /// Exploration rate of the ε-greedy behaviour policy.
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Source {
    External(ObjectFilter),
    Desire { node: usize, group: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Edge {
    source: Source,
    node: usize,
    group: usize,
    gain: f64,
    delay: Delay,
}

#[derive(Debug, Clone, PartialEq)]
struct Node {
    spec: NodeSpec,
    bank: GvfBank,
    /// Edge indices feeding each group, in declaration order.
    inputs: Vec<Vec<usize>>,
}

/// One group's result for the current tick.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupOutput {
    pub node: String,
    pub group: String,
    pub inputs: usize,
    pub output: NodeOutput,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tick {
    pub action: Action,
    pub agent_q: ActionValues,
    /// Per-group outputs in evaluation order.
    pub diagnostics: Vec<GroupOutput>,
}

/// A validated, runnable network with its learned state.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    /// Topological order of nodes under immediate edges.
    order: Vec<usize>,
    taps: Vec<(usize, usize, f64)>,
    epsilon: f64,
    bounds: Rect,
    /// Element emitted last tick, per edge; only set for `OneStep` edges.
    delayed: Vec<Option<Element>>,
}

impl Network {
    /// Validate `spec` and build fresh zero banks over `arena`.
    pub fn build(spec: &NetworkSpec, arena: Rect) -> Result<Self> {
        if !(0.0..=1.0).contains(&spec.epsilon) {
            return Err(Error::config("epsilon", "must lie in [0, 1]"));
        }
        if spec.nodes.is_empty() {
            return Err(Error::config("nodes", "a network needs at least one node"));
        }

        let mut nodes = Vec::with_capacity(spec.nodes.len());
        for ns in &spec.nodes {
            if spec.nodes.iter().filter(|o| o.name == ns.name).count() > 1 {
                return Err(Error::config("nodes", format!("duplicate node name `{}`", ns.name)));
            }
            if ns.groups.is_empty() {
                return Err(Error::config(
                    format!("nodes.{}.groups", ns.name),
                    "a node needs at least one extraction group",
                ));
            }
            let unique: BTreeSet<_> = ns.groups.iter().collect();
            if unique.len() != ns.groups.len() {
                return Err(Error::config(
                    format!("nodes.{}.groups", ns.name),
                    "group names must be unique",
                ));
            }
            let grid = NresGrid::new(ns.resolution, ns.bounds.unwrap_or(arena))
                .map_err(|e| prefix(e, &ns.name))?;
            if !grid.compatible(&NresGrid::new(1, arena)?) {
                return Err(Error::config(
                    format!("nodes.{}.bounds", ns.name),
                    "grid is not compatible with the arena (bounds differ)",
                ));
            }
            let bank = GvfBank::new(grid, ns.gamma, ns.alpha).map_err(|e| prefix(e, &ns.name))?;
            nodes.push(Node {
                spec: ns.clone(),
                bank,
                inputs: vec![Vec::new(); ns.groups.len()],
            });
        }

        let resolve = |r: &GroupRef, what: &str| -> Result<(usize, usize)> {
            let n = spec
                .nodes
                .iter()
                .position(|ns| ns.name == r.node)
                .ok_or_else(|| Error::config(what, format!("unknown node `{}`", r.node)))?;
            let g = spec.nodes[n]
                .groups
                .iter()
                .position(|g| *g == r.group)
                .ok_or_else(|| Error::config(what, format!("node `{}` has no group `{}`", r.node, r.group)))?;
            Ok((n, g))
        };

        let mut edges = Vec::with_capacity(spec.edges.len());
        for (i, es) in spec.edges.iter().enumerate() {
            let field = format!("edges[{i}]");
            if !es.gain.is_finite() {
                return Err(Error::config(field, "gain must be finite"));
            }
            let (node, group) = resolve(&es.target, &field)?;
            let source = match &es.source {
                EdgeSource::ExternalObjects(f) => Source::External(*f),
                EdgeSource::NodeDesire(r) => {
                    let (sn, sg) = resolve(r, &field)?;
                    if sn == node && es.delay == Delay::Immediate {
                        return Err(Error::config(
                            field,
                            format!("immediate cycle: {0} -> {0}; recurrent edges need delay one_step", r.node),
                        ));
                    }
                    Source::Desire { node: sn, group: sg }
                }
            };
            nodes[node].inputs[group].push(i);
            edges.push(Edge {
                source,
                node,
                group,
                gain: es.gain,
                delay: es.delay,
            });
        }

        let order = topological_order(spec, &edges)?;

        if spec.taps.is_empty() {
            return Err(Error::config("taps", "a network needs at least one value tap"));
        }
        let mut taps = Vec::with_capacity(spec.taps.len());
        for (i, t) in spec.taps.iter().enumerate() {
            let field = format!("taps[{i}]");
            if !t.weight.is_finite() {
                return Err(Error::config(field, "weight must be finite"));
            }
            let (n, g) = resolve(&GroupRef::new(&t.node, &t.group), &field)?;
            taps.push((n, g, t.weight));
        }

        let delayed = edges
            .iter()
            .map(|e| (e.delay == Delay::OneStep).then_some(Element::new(arena.center(), 0.0)))
            .collect();

        Ok(Self {
            nodes,
            edges,
            order,
            taps,
            epsilon: spec.epsilon,
            bounds: arena,
            delayed,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn set_epsilon(&mut self, epsilon: f64) {
        self.epsilon = epsilon.clamp(0.0, 1.0);
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn bank(&self, node: &str) -> Option<&GvfBank> {
        self.nodes.iter().find(|n| n.spec.name == node).map(|n| &n.bank)
    }

    pub fn node_names(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.spec.name.as_str())
    }

    /// Node names in evaluation order.
    pub fn evaluation_order(&self) -> Vec<&str> {
        self.order.iter().map(|&i| self.nodes[i].spec.name.as_str()).collect()
    }

    /// Evaluate every group, read the taps and choose an action.
    pub fn tick<R: Rng + ?Sized>(&mut self, obs: &Observation, rng: &mut R) -> Tick {
        let mut outputs: Vec<Vec<Option<NodeOutput>>> =
            self.nodes.iter().map(|n| vec![None; n.spec.groups.len()]).collect();
        let mut diagnostics = Vec::new();
        let mut inputs = Vec::new();

        for &ni in &self.order {
            let node = &self.nodes[ni];
            for (gi, edge_ids) in node.inputs.iter().enumerate() {
                inputs.clear();
                for &ei in edge_ids {
                    let edge = &self.edges[ei];
                    match (edge.source, edge.delay) {
                        (Source::External(filter), _) => {
                            inputs.extend(
                                obs.objects
                                    .iter()
                                    .filter(|o| filter.admits(o.color))
                                    .map(|o| Element::new(o.position, o.color.valence() * edge.gain)),
                            );
                        }
                        (Source::Desire { node, group }, Delay::Immediate) => {
                            let e = outputs[node][group].expect("topological order").desire;
                            inputs.push(Element::new(e.coordinate, e.valence * edge.gain));
                        }
                        (Source::Desire { .. }, Delay::OneStep) => {
                            let e = self.delayed[ei].expect("one-step edges carry a delayed element");
                            inputs.push(Element::new(e.coordinate, e.valence * edge.gain));
                        }
                    }
                }
                let out = node_forward_with(&node.bank, obs.agent_position, &inputs, &node.spec.desire);
                outputs[ni][gi] = Some(out);
                diagnostics.push(GroupOutput {
                    node: node.spec.name.clone(),
                    group: node.spec.groups[gi].clone(),
                    inputs: inputs.len(),
                    output: out,
                });
            }
        }

        let mut agent_q = ActionValues::ZERO;
        for &(n, g, w) in &self.taps {
            let q = outputs[n][g].expect("all groups evaluated").q;
            agent_q.add_scaled(&q, w);
        }
        let action = epsilon_greedy(&agent_q, self.epsilon, rng);

        for (ei, edge) in self.edges.iter().enumerate() {
            if let (Source::Desire { node, group }, Delay::OneStep) = (edge.source, edge.delay) {
                self.delayed[ei] = outputs[node][group].map(|o| o.desire);
            }
        }

        Tick {
            action,
            agent_q,
            diagnostics,
        }
    }

    /// Train every node's bank on the agent's move between two observations.
    pub fn learn(&mut self, prev: &Observation, action: Action, next: &Observation) {
        for node in &mut self.nodes {
            let grid = *node.bank.grid();
            let t = CellTransition {
                from_cell: grid.cell_of(prev.agent_position),
                action,
                to_cell: grid.cell_of(next.agent_position),
            };
            node.bank.update_all(t).expect("cells come from the bank's own grid");
        }
    }

    /// Plain-text adjacency listing of the wiring.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        let label = |n: usize, g: usize| format!("{}.{}", self.nodes[n].spec.name, self.nodes[n].spec.groups[g]);
        writeln!(s, "nodes (evaluation order):").unwrap();
        for &i in &self.order {
            let n = &self.nodes[i].spec;
            writeln!(
                s,
                "  {} N={} gamma={} alpha={} groups=[{}]",
                n.name,
                n.resolution,
                n.gamma,
                n.alpha,
                n.groups.join(", ")
            )
            .unwrap();
        }
        writeln!(s, "edges:").unwrap();
        for e in &self.edges {
            let src = match e.source {
                Source::External(ObjectFilter::All) => "objects(all)".to_owned(),
                Source::External(ObjectFilter::GreenOnly) => "objects(green)".to_owned(),
                Source::External(ObjectFilter::RedOnly) => "objects(red)".to_owned(),
                Source::Desire { node, group } => label(node, group),
            };
            let delay = match e.delay {
                Delay::Immediate => "",
                Delay::OneStep => " [one-step]",
            };
            writeln!(s, "  {src} -> {} gain={}{delay}", label(e.node, e.group), e.gain).unwrap();
        }
        writeln!(s, "taps:").unwrap();
        for &(n, g, w) in &self.taps {
            writeln!(s, "  {} weight={w}", label(n, g)).unwrap();
        }
        writeln!(s, "epsilon: {}", self.epsilon).unwrap();
        s
    }
}

fn prefix(e: Error, node: &str) -> Error {
    match e {
        Error::Config { field, reason } => Error::config(format!("nodes.{node}.{field}"), reason),
        other => other,
    }
}

/// Kahn's algorithm over immediate node-to-node edges, ties broken by node
/// name so the order does not depend on declaration order.
fn topological_order(spec: &NetworkSpec, edges: &[Edge]) -> Result<Vec<usize>> {
    let n = spec.nodes.len();
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for e in edges {
        if let (Source::Desire { node, .. }, Delay::Immediate) = (e.source, e.delay) {
            succ[node].insert(e.node);
        }
    }
    let mut indegree = vec![0usize; n];
    for s in &succ {
        for &t in s {
            indegree[t] += 1;
        }
    }
    let name = |i: usize| spec.nodes[i].name.as_str();
    let mut ready: BTreeSet<(&str, usize)> = (0..n).filter(|&i| indegree[i] == 0).map(|i| (name(i), i)).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(first) = ready.pop_first() {
        let i = first.1;
        order.push(i);
        for &t in &succ[i] {
            indegree[t] -= 1;
            if indegree[t] == 0 {
                ready.insert((name(t), t));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }

    // Walk successors inside the unresolved remainder until a node repeats.
    let stuck: Vec<usize> = (0..n).filter(|&i| indegree[i] > 0).collect();
    let mut path = vec![stuck[0]];
    loop {
        let cur = *path.last().unwrap();
        let next = *succ[cur].iter().find(|t| indegree[**t] > 0).expect("stuck nodes have stuck successors");
        if let Some(pos) = path.iter().position(|&p| p == next) {
            let mut cycle: Vec<&str> = path[pos..].iter().map(|&i| name(i)).collect();
            cycle.push(name(next));
            return Err(Error::config("edges", format!("immediate cycle: {}", cycle.join(" -> "))));
        }
        path.push(next);
    }
}

/// With probability `epsilon` a uniformly random action, otherwise a uniformly
/// random member of the argmax set of `q`. Always consumes one draw for the
/// exploration coin and one for the pick.
pub fn epsilon_greedy<R: Rng + ?Sized>(q: &ActionValues, epsilon: f64, rng: &mut R) -> Action {
    let explore = rng.gen::<f64>() < epsilon;
    if explore {
        Action::ALL[rng.gen_range(0..4)]
    } else {
        let best = q.argmax_set();
        best[rng.gen_range(0..best.len())]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::ObjectState;
    use crate::geom::Vec2;
    use crate::node::node_forward;
    use crate::nres::CellIndex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn node(name: &str, n: usize, groups: &[&str]) -> NodeSpec {
        NodeSpec {
            name: name.into(),
            resolution: n,
            gamma: 0.95,
            alpha: 0.1,
            groups: groups.iter().map(|g| g.to_string()).collect(),
            desire: DesireOptions::default(),
            bounds: None,
        }
    }

    fn ext(filter: ObjectFilter, node: &str, group: &str) -> EdgeSpec {
        EdgeSpec {
            source: EdgeSource::ExternalObjects(filter),
            target: GroupRef::new(node, group),
            gain: 1.0,
            delay: Delay::Immediate,
        }
    }

    fn desire(from: (&str, &str), to: (&str, &str), delay: Delay, gain: f64) -> EdgeSpec {
        EdgeSpec {
            source: EdgeSource::NodeDesire(GroupRef::new(from.0, from.1)),
            target: GroupRef::new(to.0, to.1),
            gain,
            delay,
        }
    }

    fn tap(node: &str, group: &str, weight: f64) -> TapSpec {
        TapSpec {
            node: node.into(),
            group: group.into(),
            weight,
        }
    }

    fn single(epsilon: f64) -> NetworkSpec {
        NetworkSpec {
            nodes: vec![node("pc", 3, &["all"])],
            edges: vec![ext(ObjectFilter::All, "pc", "all")],
            taps: vec![tap("pc", "all", 1.0)],
            epsilon,
        }
    }

    fn obs(agent: Vec2, objects: &[(Vec2, ObjectColor)]) -> Observation {
        Observation {
            agent_position: agent,
            agent_velocity: Vec2::ZERO,
            objects: objects
                .iter()
                .map(|&(position, color)| ObjectState {
                    position,
                    velocity: Vec2::ZERO,
                    color,
                })
                .collect(),
        }
    }

    fn err_text(spec: &NetworkSpec) -> String {
        Network::build(spec, Rect::unit()).unwrap_err().to_string()
    }

    #[test]
    fn rejects_bad_wiring() {
        let mut s = single(0.1);
        s.edges.push(desire(("pc", "all"), ("pc", "all"), Delay::Immediate, 1.0));
        assert!(err_text(&s).contains("cycle"));

        let mut s = single(0.1);
        s.taps.clear();
        assert!(err_text(&s).contains("taps"));

        let mut s = single(0.1);
        s.edges.push(ext(ObjectFilter::All, "nope", "all"));
        assert!(err_text(&s).contains("unknown node"));

        let mut s = single(0.1);
        s.nodes[0].groups.push("all".into());
        assert!(err_text(&s).contains("unique"));

        let mut s = single(0.1);
        s.nodes[0].bounds = Some(Rect::sized(2.0, 1.0));
        assert!(err_text(&s).contains("compatible"));

        assert!(Network::build(&single(1.5), Rect::unit()).is_err());
    }

    #[test]
    fn reports_longer_cycles() {
        let s = NetworkSpec {
            nodes: vec![node("a", 3, &["g"]), node("b", 3, &["g"]), node("c", 3, &["g"])],
            edges: vec![
                ext(ObjectFilter::All, "a", "g"),
                desire(("a", "g"), ("b", "g"), Delay::Immediate, 1.0),
                desire(("b", "g"), ("c", "g"), Delay::Immediate, 1.0),
                desire(("c", "g"), ("b", "g"), Delay::Immediate, 1.0),
            ],
            taps: vec![tap("c", "g", 1.0)],
            epsilon: 0.0,
        };
        let msg = err_text(&s);
        assert!(msg.contains("b -> c -> b") || msg.contains("c -> b -> c"), "{msg}");
    }

    #[test]
    fn delayed_self_edge_is_fine() {
        let mut s = single(0.1);
        s.edges.push(desire(("pc", "all"), ("pc", "all"), Delay::OneStep, -1.0));
        let net = Network::build(&s, Rect::unit()).unwrap();
        assert!(net.describe().contains("pc.all -> pc.all gain=-1 [one-step]"));
    }

    #[test]
    fn zero_banks_give_zero_q_and_random_actions() {
        let mut net = Network::build(&single(0.0), Rect::unit()).unwrap();
        let o = obs(Vec2::new(0.5, 0.5), &[(Vec2::new(0.1, 0.1), ObjectColor::Green)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = BTreeSet::new();
        for _ in 0..200 {
            let t = net.tick(&o, &mut rng);
            assert_eq!(t.agent_q, ActionValues::ZERO);
            seen.insert(t.action);
        }
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn greedy_follows_the_goal_slice() {
        let mut net = Network::build(&single(0.0), Rect::unit()).unwrap();
        // teach: moving East from cell 4 enters cell 5
        let a = obs(Vec2::new(0.5, 0.5), &[]);
        let b = obs(Vec2::new(0.9, 0.5), &[]);
        net.learn(&a, Action::East, &b);
        let o = obs(Vec2::new(0.5, 0.5), &[(Vec2::new(0.8, 0.45), ObjectColor::Green)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = net.tick(&o, &mut rng);
        let slice = net.bank("pc").unwrap().q_slice(CellIndex(5), CellIndex(4)).unwrap();
        assert_eq!(t.agent_q, slice);
        assert_eq!(t.action, Action::East);
    }

    #[test]
    fn learning_per_node_grid() {
        let s = NetworkSpec {
            nodes: vec![node("coarse", 3, &["g"]), node("fine", 9, &["g"])],
            edges: vec![
                ext(ObjectFilter::All, "coarse", "g"),
                desire(("coarse", "g"), ("fine", "g"), Delay::Immediate, 1.0),
            ],
            taps: vec![tap("fine", "g", 1.0)],
            epsilon: 0.1,
        };
        let mut net = Network::build(&s, Rect::unit()).unwrap();
        // crosses a fine boundary but stays inside one coarse cell
        let a = obs(Vec2::new(0.40, 0.5), &[]);
        let b = obs(Vec2::new(0.46, 0.5), &[]);
        net.learn(&a, Action::East, &b);
        let coarse = net.bank("coarse").unwrap();
        let fine = net.bank("fine").unwrap();
        assert_eq!((coarse.update_count(), fine.update_count()), (1, 1));
        // coarse saw a self-transition into its own goal cell 4
        assert_eq!(coarse.q_slice(CellIndex(4), CellIndex(4)).unwrap()[Action::East], 0.1);
        let (from, to) = (fine.grid().cell_of(a.agent_position), fine.grid().cell_of(b.agent_position));
        assert_ne!(from, to);
        assert_eq!(fine.q_slice(to, from).unwrap()[Action::East], 0.1);
        assert_eq!(fine.values().iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn one_step_element_is_last_ticks_output() {
        let s = NetworkSpec {
            nodes: vec![node("ovc", 5, &["g"])],
            edges: vec![
                ext(ObjectFilter::All, "ovc", "g"),
                desire(("ovc", "g"), ("ovc", "g"), Delay::OneStep, -1.0),
            ],
            taps: vec![tap("ovc", "g", 1.0)],
            epsilon: 0.0,
        };
        let mut net = Network::build(&s, Rect::unit()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut prev = obs(Vec2::new(0.5, 0.5), &[(Vec2::new(0.2, 0.7), ObjectColor::Green)]);
        let mut last_desire: Option<Element> = None;
        for step in 0..50 {
            let t = net.tick(&prev, &mut rng);
            let out = t.diagnostics[0].output;
            // recompute with the delayed element made explicit
            let mut ins = vec![Element::new(Vec2::new(0.2, 0.7), 1.0)];
            let fed = last_desire.unwrap_or(Element::new(Vec2::new(0.5, 0.5), 0.0));
            ins.push(Element::new(fed.coordinate, -fed.valence));
            let bank = net.bank("ovc").unwrap();
            assert_eq!(node_forward(bank, prev.agent_position, &ins), out, "step {step}");
            last_desire = Some(out.desire);
            let mut next = prev.clone();
            next.agent_position = Vec2::new(0.1 + 0.8 * ((step * 7) % 10) as f64 / 10.0, 0.5);
            net.learn(&prev, t.action, &next);
            prev = next;
        }
    }

    #[test]
    fn epsilon_greedy_conventions() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            assert_eq!(epsilon_greedy(&ActionValues::new(1.0, 0.0, 0.0, 0.0), 0.0, &mut rng), Action::North);
        }
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            counts[epsilon_greedy(&ActionValues::ZERO, 0.0, &mut rng).index()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 40_000.0 - 0.25).abs() < 0.01, "{counts:?}");
        }
    }

    #[test]
    fn declaration_order_does_not_matter() {
        let nodes = vec![node("a", 3, &["g"]), node("b", 5, &["g"])];
        let edges = vec![
            ext(ObjectFilter::All, "a", "g"),
            desire(("a", "g"), ("b", "g"), Delay::Immediate, 1.0),
        ];
        let taps = vec![tap("a", "g", 1.0), tap("b", "g", 1.0)];
        let s1 = NetworkSpec {
            nodes: nodes.clone(),
            edges: edges.clone(),
            taps: taps.clone(),
            epsilon: 0.2,
        };
        let mut s2 = s1.clone();
        s2.nodes.reverse();
        let mut n1 = Network::build(&s1, Rect::unit()).unwrap();
        let mut n2 = Network::build(&s2, Rect::unit()).unwrap();
        assert_eq!(n1.evaluation_order(), n2.evaluation_order());
        let mut r1 = ChaCha8Rng::seed_from_u64(5);
        let mut r2 = ChaCha8Rng::seed_from_u64(5);
        let mut env = crate::env::EnvState::new(Default::default(), 5).unwrap();
        for _ in 0..500 {
            let o = env.observe();
            let t1 = n1.tick(&o, &mut r1);
            let t2 = n2.tick(&o, &mut r2);
            assert_eq!(t1, t2);
            env.step(t1.action);
            let next = env.observe();
            n1.learn(&o, t1.action, &next);
            n2.learn(&o, t2.action, &next);
        }
    }
}
