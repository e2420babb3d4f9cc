//! Seeded experiment runs: the four reference architectures, single trials,
//! multi-seed batches, and CSV output.

use crate::env::{EnvParams, EnvState};
use crate::error::{Error, Result};
use crate::network::{
    Delay, EdgeSource, EdgeSpec, GroupRef, Network, NetworkSpec, NodeSpec, ObjectFilter, TapSpec,
};
use crate::node::DesireOptions;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

pub const DEFAULT_GAMMA: f64 = 0.95;
pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_PC_RESOLUTION: usize = 7;
pub const DEFAULT_OVC_RESOLUTION: usize = 23;
pub const DEFAULT_FEEDBACK_GAIN: f64 = -1.0;
pub const DEFAULT_STEPS: u64 = 36_000;
pub const DEFAULT_SEED_COUNT: u64 = 20;
pub const DEFAULT_SAMPLE_INTERVAL: u64 = 300;
pub const DEFAULT_STEPS_PER_SECOND: f64 = 30.0;

/// Generator stream labels split off each run's master seed. The environment
/// stream does not depend on the network, so every preset sees the same world
/// for a given seed.
pub const ENV_STREAM: u64 = 0;
pub const POLICY_STREAM: u64 = u64::from_be_bytes(*b"\0\0policy");

pub const PC: &str = "pc";
pub const OVC: &str = "ovc";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Preset {
    A,
    B,
    C,
    D,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::A, Preset::B, Preset::C, Preset::D];
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Preset::A => "A",
            Preset::B => "B",
            Preset::C => "C",
            Preset::D => "D",
        };
        f.write_str(s)
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Preset::A),
            "B" => Ok(Preset::B),
            "C" => Ok(Preset::C),
            "D" => Ok(Preset::D),
            _ => Err(Error::config("preset", format!("unknown preset `{s}` (expected A, B, C or D)"))),
        }
    }
}

/// Optional replacements for the built-in constants.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pc_resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ovc_resolution: Option<usize>,
    /// Gain on every one-step (recurrent) edge.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feedback_gain: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pc_tap_weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ovc_tap_weight: Option<f64>,
}

impl Overrides {
    /// Apply to an arbitrary spec. Resolution and tap weights address nodes
    /// named `pc` and `ovc`.
    pub fn apply(&self, spec: &mut NetworkSpec) {
        for n in &mut spec.nodes {
            if let Some(g) = self.gamma {
                n.gamma = g;
            }
            if let Some(a) = self.alpha {
                n.alpha = a;
            }
            match n.name.as_str() {
                PC => n.resolution = self.pc_resolution.unwrap_or(n.resolution),
                OVC => n.resolution = self.ovc_resolution.unwrap_or(n.resolution),
                _ => {}
            }
        }
        if let Some(e) = self.epsilon {
            spec.epsilon = e;
        }
        if let Some(g) = self.feedback_gain {
            for e in spec.edges.iter_mut().filter(|e| e.delay == Delay::OneStep) {
                e.gain = g;
            }
        }
        for t in &mut spec.taps {
            match t.node.as_str() {
                PC => t.weight = self.pc_tap_weight.unwrap_or(t.weight),
                OVC => t.weight = self.ovc_tap_weight.unwrap_or(t.weight),
                _ => {}
            }
        }
    }
}

fn node(name: &str, resolution: usize, groups: &[&str]) -> NodeSpec {
    NodeSpec {
        name: name.into(),
        resolution,
        gamma: DEFAULT_GAMMA,
        alpha: DEFAULT_ALPHA,
        groups: groups.iter().map(|g| (*g).into()).collect(),
        desire: DesireOptions::default(),
        bounds: None,
    }
}

fn objects(filter: ObjectFilter, node: &str, group: &str) -> EdgeSpec {
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

fn tap(node: &str, group: &str) -> TapSpec {
    TapSpec {
        node: node.into(),
        group: group.into(),
        weight: 1.0,
    }
}

/// Wiring of the four reference agents, with default constants.
///
/// * A: all objects → `pc.all` → desire → `ovc.desire`; tap on `ovc`.
/// * B: `pc.green` and `pc.red` each emit a desire into `ovc.desire`; tap on `ovc`.
/// * C: B plus a `pc.all` group fed by every object, tapped 1:1 with `ovc`.
/// * D: B plus `ovc.desire` fed back into itself one step later with gain −1.
pub fn preset(which: Preset) -> NetworkSpec {
    let immediate = Delay::Immediate;
    let valence_split = || {
        (
            vec![
                objects(ObjectFilter::GreenOnly, PC, "green"),
                objects(ObjectFilter::RedOnly, PC, "red"),
                desire((PC, "green"), (OVC, "desire"), immediate, 1.0),
                desire((PC, "red"), (OVC, "desire"), immediate, 1.0),
            ],
            node(OVC, DEFAULT_OVC_RESOLUTION, &["desire"]),
        )
    };
    let (nodes, edges, taps) = match which {
        Preset::A => (
            vec![
                node(PC, DEFAULT_PC_RESOLUTION, &["all"]),
                node(OVC, DEFAULT_OVC_RESOLUTION, &["desire"]),
            ],
            vec![
                objects(ObjectFilter::All, PC, "all"),
                desire((PC, "all"), (OVC, "desire"), immediate, 1.0),
            ],
            vec![tap(OVC, "desire")],
        ),
        Preset::B => {
            let (edges, ovc) = valence_split();
            (
                vec![node(PC, DEFAULT_PC_RESOLUTION, &["green", "red"]), ovc],
                edges,
                vec![tap(OVC, "desire")],
            )
        }
        Preset::C => {
            let (mut edges, ovc) = valence_split();
            edges.push(objects(ObjectFilter::All, PC, "all"));
            (
                vec![node(PC, DEFAULT_PC_RESOLUTION, &["green", "red", "all"]), ovc],
                edges,
                vec![tap(PC, "all"), tap(OVC, "desire")],
            )
        }
        Preset::D => {
            let (mut edges, ovc) = valence_split();
            edges.push(desire((OVC, "desire"), (OVC, "desire"), Delay::OneStep, DEFAULT_FEEDBACK_GAIN));
            (
                vec![node(PC, DEFAULT_PC_RESOLUTION, &["green", "red"]), ovc],
                edges,
                vec![tap(OVC, "desire")],
            )
        }
    };
    NetworkSpec {
        nodes,
        edges,
        taps,
        epsilon: DEFAULT_EPSILON,
    }
}

/// Everything a batch needs. At most one of `preset` and `network` is set;
/// with neither, preset D runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    pub steps: u64,
    pub seeds: Vec<u64>,
    pub sample_interval: u64,
    pub steps_per_second: f64,
    pub env: EnvParams,
    pub overrides: Overrides,
    /// Custom wiring in place of a preset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            preset: Some(Preset::D),
            steps: DEFAULT_STEPS,
            seeds: (1..=DEFAULT_SEED_COUNT).collect(),
            sample_interval: DEFAULT_SAMPLE_INTERVAL,
            steps_per_second: DEFAULT_STEPS_PER_SECOND,
            env: EnvParams::default(),
            overrides: Overrides::default(),
            network: None,
        }
    }
}

impl ExperimentConfig {
    pub fn for_preset(p: Preset) -> Self {
        Self {
            preset: Some(p),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::config("steps", "must be at least 1"));
        }
        if self.sample_interval == 0 {
            return Err(Error::config("sample_interval", "must be at least 1"));
        }
        if !(self.steps_per_second.is_finite() && self.steps_per_second > 0.0) {
            return Err(Error::config("steps_per_second", "must be finite and > 0"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "need at least one seed"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("seeds", "seeds must be distinct"));
        }
        self.env.validate()?;
        Network::build(&self.network_spec()?, self.env.bounds())?;
        Ok(())
    }

    /// The wiring to run, with overrides applied.
    pub fn network_spec(&self) -> Result<NetworkSpec> {
        let mut spec = match (&self.network, self.preset) {
            (Some(n), None) => n.clone(),
            (None, Some(p)) => preset(p),
            (Some(_), Some(_)) => {
                return Err(Error::config("network", "set either `preset` or `network`, not both"))
            }
            (None, None) => preset(Preset::D),
        };
        self.overrides.apply(&mut spec);
        Ok(spec)
    }

    /// Label used in file names and comparison tables.
    pub fn label(&self) -> String {
        match (&self.network, self.preset) {
            (Some(_), _) => "custom".into(),
            (None, p) => p.unwrap_or(Preset::D).to_string(),
        }
    }
}

/// Steps to minutes at a nominal simulation rate.
pub fn to_minutes(step: u64, steps_per_second: f64) -> f64 {
    step as f64 / (steps_per_second * 60.0)
}

/// Accumulated reward of one run, sampled at fixed step intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardTrace {
    pub seed: u64,
    /// `(step, accumulated_reward)`, steps strictly increasing.
    pub samples: Vec<(u64, f64)>,
    pub green_captures: u64,
    pub red_captures: u64,
    pub board_resets: u64,
}

impl RewardTrace {
    pub fn final_reward(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.1)
    }
}

/// A single run from zero banks: observe, tick, step, learn.
pub fn run_trial(config: &ExperimentConfig, seed: u64) -> Result<RewardTrace> {
    run_trial_with_network(config, seed).map(|(trace, _)| trace)
}

/// As [`run_trial`], also handing back the trained network.
pub fn run_trial_with_network(config: &ExperimentConfig, seed: u64) -> Result<(RewardTrace, Network)> {
    config.validate()?;
    let spec = config.network_spec()?;
    run_with_spec(config, &spec, seed)
}

fn run_with_spec(config: &ExperimentConfig, spec: &NetworkSpec, seed: u64) -> Result<(RewardTrace, Network)> {
    let mut env = EnvState::new(config.env.clone(), seed)?;
    let mut net = Network::build(spec, config.env.bounds())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(POLICY_STREAM);

    let mut trace = RewardTrace {
        seed,
        samples: Vec::with_capacity((config.steps / config.sample_interval + 1) as usize),
        green_captures: 0,
        red_captures: 0,
        board_resets: 0,
    };
    let mut accumulated = 0.0;
    let mut obs = env.observe();
    for step in 1..=config.steps {
        let tick = net.tick(&obs, &mut rng);
        let result = env.step(tick.action);
        let next = env.observe();
        net.learn(&obs, tick.action, &next);
        accumulated += result.reward;
        trace.green_captures += result.greens() as u64;
        trace.red_captures += result.reds() as u64;
        trace.board_resets += u64::from(result.board_reset());
        if step % config.sample_interval == 0 || step == config.steps {
            trace.samples.push((step, accumulated));
        }
        obs = next;
    }
    Ok((trace, net))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub step: u64,
    pub minutes: f64,
    pub mean: f64,
    pub stddev: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub samples: Vec<CurvePoint>,
}

impl AggregateCurve {
    /// Mean accumulated reward at the last sample.
    pub fn final_mean(&self) -> f64 {
        self.samples.last().map_or(0.0, |p| p.mean)
    }

    /// Interpolation-free mean at the sample nearest `step` from below (0 before the first).
    pub fn mean_at(&self, step: u64) -> f64 {
        self.samples
            .iter()
            .take_while(|p| p.step <= step)
            .last()
            .map_or(0.0, |p| p.mean)
    }
}

/// Mean and sample standard deviation across traces, reduced in seed order.
pub fn aggregate(traces: &[RewardTrace], steps_per_second: f64) -> Result<AggregateCurve> {
    let first = traces
        .first()
        .ok_or_else(|| Error::config("seeds", "nothing to aggregate"))?;
    let mut sorted: Vec<&RewardTrace> = traces.iter().collect();
    sorted.sort_by_key(|t| t.seed);
    let n = sorted.len();
    let mut samples = Vec::with_capacity(first.samples.len());
    for (i, &(step, _)) in first.samples.iter().enumerate() {
        let mut values = Vec::with_capacity(n);
        for t in &sorted {
            match t.samples.get(i) {
                Some(&(s, v)) if s == step => values.push(v),
                _ => return Err(Error::config("traces", "sample steps do not align across seeds")),
            }
        }
        let (mean, stddev) = mean_stddev(&values);
        samples.push(CurvePoint {
            step,
            minutes: to_minutes(step, steps_per_second),
            mean,
            stddev,
            n,
        });
    }
    Ok(AggregateCurve { samples })
}

/// Arithmetic mean and sample (n − 1) standard deviation; zero spread for one value.
pub fn mean_stddev(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    pub label: String,
    pub curve: AggregateCurve,
    /// One per seed, sorted by seed.
    pub traces: Vec<RewardTrace>,
}

/// Run every seed on up to `workers` threads and aggregate. The result does
/// not depend on `workers`.
pub fn run_batch(config: &ExperimentConfig, workers: usize) -> Result<BatchResult> {
    config.validate()?;
    let spec = config.network_spec()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let mut traces = pool.install(|| {
        config
            .seeds
            .par_iter()
            .map(|&seed| run_with_spec(config, &spec, seed).map(|(trace, _)| trace))
            .collect::<Result<Vec<_>>>()
    })?;
    traces.sort_by_key(|t| t.seed);
    let curve = aggregate(&traces, config.steps_per_second)?;
    Ok(BatchResult {
        label: config.label(),
        curve,
        traces,
    })
}

pub const TRACE_HEADER: &str = "run_id,step,minutes,accumulated_reward";
pub const AGGREGATE_HEADER: &str = "step,minutes,mean,stddev,n";
pub const COMPARISON_HEADER: &str = "preset,step,minutes,mean,stddev,n";

/// Per-seed CSV; `run_id` is the seed.
pub fn write_trace_csv<W: Write>(mut out: W, trace: &RewardTrace, steps_per_second: f64) -> Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for &(step, reward) in &trace.samples {
        writeln!(out, "{},{step},{},{reward}", trace.seed, to_minutes(step, steps_per_second))?;
    }
    Ok(())
}

pub fn write_aggregate_csv<W: Write>(mut out: W, curve: &AggregateCurve) -> Result<()> {
    writeln!(out, "{AGGREGATE_HEADER}")?;
    for p in &curve.samples {
        writeln!(out, "{},{},{},{},{}", p.step, p.minutes, p.mean, p.stddev, p.n)?;
    }
    Ok(())
}

/// Long-format table stacking several aggregates.
pub fn write_comparison_csv<W: Write>(mut out: W, batches: &[BatchResult]) -> Result<()> {
    writeln!(out, "{COMPARISON_HEADER}")?;
    for b in batches {
        for p in &b.curve.samples {
            writeln!(out, "{},{},{},{},{},{}", b.label, p.step, p.minutes, p.mean, p.stddev, p.n)?;
        }
    }
    Ok(())
}
