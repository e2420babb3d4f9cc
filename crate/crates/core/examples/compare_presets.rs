//! Runs the four reference presets on the same seeds and prints final means.
//!
//! `cargo run --release -p neorl-core --example compare_presets -- [seeds] [steps]`

use neorl_core::harness::{run_batch, ExperimentConfig, Preset};
use std::time::Instant;

fn main() {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let steps: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(36_000);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    for p in Preset::ALL {
        let config = ExperimentConfig {
            steps,
            seeds: (1..=seeds).collect(),
            ..ExperimentConfig::for_preset(p)
        };
        let start = Instant::now();
        let batch = run_batch(&config, workers).expect("valid preset config");
        let last = batch.curve.samples.last().unwrap();
        let third = steps / 3;
        let early = batch.curve.mean_at(third);
        let late = last.mean - batch.curve.mean_at(steps - third);
        println!(
            "{p}: final mean {:8.2} ± {:6.2} (sd {:6.2})  first third {:7.2}  last third {:7.2}  [{:.1?}]",
            last.mean,
            last.stddev / (last.n as f64).sqrt(),
            last.stddev,
            early,
            late,
            start.elapsed()
        );
    }
}
