//! Command-line front end: single runs, batches, self-verification and config
//! inspection.
//!
//! Settings resolve in three layers: built-in defaults, then the `--config`
//! TOML file, then explicit flags.

use clap::{Args, Parser, Subcommand};
use neorl_core::harness::{
    run_batch, run_trial_with_network, write_aggregate_csv, write_comparison_csv,
    write_trace_csv, BatchResult, ExperimentConfig, Preset,
};
use neorl_core::network::Network;
use neorl_core::verify::{self, SuiteReport};
use neorl_core::Error;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

pub mod plot;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "neorl", version, about = "Purposive neoRL networks in a WaterWorld arena")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one seed and write its reward trace.
    Run(RunArgs),
    /// Run many seeds for one or more presets and aggregate.
    Batch(BatchArgs),
    /// Run the oracle, superposition, desire and partition suites.
    Verify,
    /// Inspect the effective configuration.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
    /// Print a network's wiring.
    Describe(Settings),
}

#[derive(Debug, Subcommand)]
pub enum ConfigAction {
    /// Print the effective configuration as TOML.
    Dump(Settings),
}

/// Flags shared by every experiment command. Unset flags fall back to the
/// config file, then to defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Settings {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Preset A, B, C or D (batch accepts a comma-separated list).
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub sample_interval: Option<u64>,
    #[arg(long)]
    pub steps_per_second: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub pc_resolution: Option<usize>,
    #[arg(long)]
    pub ovc_resolution: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub feedback_gain: Option<f64>,
    #[arg(long)]
    pub pc_tap_weight: Option<f64>,
    #[arg(long)]
    pub ovc_tap_weight: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub settings: Settings,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write each node's GVF table as CSV.
    #[arg(long)]
    pub dump_banks: bool,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    #[command(flatten)]
    pub settings: Settings,
    /// Number of seeds; runs seeds 1..=N.
    #[arg(long)]
    pub seeds: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Write an SVG chart of mean accumulated reward against minutes.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Verify(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Verify(_) => EXIT_VERIFY,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Verify(m) => f.write_str(m),
        }
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
}

pub fn dump_config(config: &ExperimentConfig) -> Result<String, CliError> {
    toml::to_string(config).map_err(|e| CliError::Usage(format!("config: {e}")))
}

fn load_file(path: Option<&Path>) -> Result<ExperimentConfig, CliError> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            parse_config(&text)
        }
        None => Ok(ExperimentConfig::default()),
    }
}

pub fn parse_presets(list: &str) -> Result<Vec<Preset>, CliError> {
    list.split(',').map(|s| s.parse::<Preset>().map_err(CliError::from)).collect()
}

impl Settings {
    /// Layer these flags over `base`. `preset` is applied separately since
    /// batch may expand it into several configs.
    pub fn apply(&self, mut base: ExperimentConfig) -> ExperimentConfig {
        if let Some(v) = self.steps {
            base.steps = v;
        }
        if let Some(v) = self.sample_interval {
            base.sample_interval = v;
        }
        if let Some(v) = self.steps_per_second {
            base.steps_per_second = v;
        }
        let o = &mut base.overrides;
        o.gamma = self.gamma.or(o.gamma);
        o.alpha = self.alpha.or(o.alpha);
        o.epsilon = self.epsilon.or(o.epsilon);
        o.pc_resolution = self.pc_resolution.or(o.pc_resolution);
        o.ovc_resolution = self.ovc_resolution.or(o.ovc_resolution);
        o.feedback_gain = self.feedback_gain.or(o.feedback_gain);
        o.pc_tap_weight = self.pc_tap_weight.or(o.pc_tap_weight);
        o.ovc_tap_weight = self.ovc_tap_weight.or(o.ovc_tap_weight);
        base
    }

    /// One resolved config per requested preset (or the file's own choice).
    pub fn resolve(&self) -> Result<Vec<ExperimentConfig>, CliError> {
        let base = self.apply(load_file(self.config.as_deref())?);
        let configs = match &self.preset {
            Some(list) => parse_presets(list)?
                .into_iter()
                .map(|p| ExperimentConfig {
                    preset: Some(p),
                    network: None,
                    ..base.clone()
                })
                .collect(),
            None => vec![base],
        };
        for c in &configs {
            c.validate()?;
        }
        Ok(configs)
    }

    pub fn resolve_one(&self) -> Result<ExperimentConfig, CliError> {
        let mut all = self.resolve()?;
        if all.len() != 1 {
            return Err(CliError::Usage("this command takes a single preset".into()));
        }
        Ok(all.remove(0))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))
}

pub fn trace_file(out: &Path, label: &str, seed: u64) -> PathBuf {
    out.join(format!("{label}_seed{seed}.csv"))
}

pub fn aggregate_file(out: &Path, label: &str) -> PathBuf {
    out.join(format!("{label}_aggregate.csv"))
}

pub fn cmd_run(args: &RunArgs, log: &mut dyn Write) -> Result<(), CliError> {
    let config = args.settings.resolve_one()?;
    ensure_dir(&args.out)?;
    let (trace, network) = run_trial_with_network(&config, args.seed)?;
    let label = config.label();
    let path = trace_file(&args.out, &label, args.seed);
    let mut w = create(&path)?;
    write_trace_csv(&mut w, &trace, config.steps_per_second)?;
    w.flush()?;
    if args.dump_banks {
        for name in network.node_names() {
            let bank = network.bank(name).expect("listed node");
            let path = args.out.join(format!("{label}_seed{}_{name}_bank.csv", args.seed));
            let mut w = create(&path)?;
            bank.dump_csv(&mut w)?;
            w.flush()?;
        }
    }
    writeln!(
        log,
        "preset {label} seed {}: accumulated reward {} ({} green, {} red) -> {}",
        args.seed,
        trace.final_reward(),
        trace.green_captures,
        trace.red_captures,
        path.display()
    )?;
    Ok(())
}

pub fn cmd_batch(args: &BatchArgs, log: &mut dyn Write) -> Result<Vec<BatchResult>, CliError> {
    let mut configs = args.settings.resolve()?;
    if let Some(n) = args.seeds {
        if n == 0 {
            return Err(CliError::Usage("--seeds must be at least 1".into()));
        }
        for c in &mut configs {
            c.seeds = (1..=n).collect();
        }
    }
    ensure_dir(&args.out)?;
    let mut batches = Vec::with_capacity(configs.len());
    for config in &configs {
        let batch = run_batch(config, args.workers)?;
        for t in &batch.traces {
            let mut w = create(&trace_file(&args.out, &batch.label, t.seed))?;
            write_trace_csv(&mut w, t, config.steps_per_second)?;
            w.flush()?;
        }
        let mut w = create(&aggregate_file(&args.out, &batch.label))?;
        write_aggregate_csv(&mut w, &batch.curve)?;
        w.flush()?;
        let last = batch.curve.samples.last().expect("steps >= 1");
        writeln!(
            log,
            "preset {}: {} seeds x {} steps, final mean {:.3} (sd {:.3})",
            batch.label, last.n, config.steps, last.mean, last.stddev
        )?;
        batches.push(batch);
    }
    if batches.len() > 1 {
        let mut w = create(&args.out.join("comparison.csv"))?;
        write_comparison_csv(&mut w, &batches)?;
        w.flush()?;
    }
    if args.plot {
        let name = if batches.len() > 1 {
            "comparison.svg".to_owned()
        } else {
            format!("{}_mean_reward.svg", batches[0].label)
        };
        plot::mean_reward_chart(&args.out.join(name), &batches)?;
    }
    Ok(batches)
}

pub fn print_reports(reports: &[SuiteReport], log: &mut dyn Write) -> io::Result<()> {
    writeln!(log, "{:<22} {:>8} {:>10} {:>8}", "suite", "checks", "elapsed", "result")?;
    for r in reports {
        writeln!(
            log,
            "{:<22} {:>8} {:>9.3}s {:>8}",
            r.name,
            r.checks,
            r.elapsed.as_secs_f64(),
            if r.passed() { "PASS" } else { "FAIL" }
        )?;
        for f in r.failures.iter().take(5) {
            writeln!(log, "    {f}")?;
        }
    }
    Ok(())
}

pub fn cmd_verify(log: &mut dyn Write) -> Result<(), CliError> {
    let reports = verify::run_all();
    print_reports(&reports, log)?;
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed()).map(|r| r.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verify(format!("failed suites: {}", failed.join(", "))))
    }
}

pub fn cmd_describe(settings: &Settings, log: &mut dyn Write) -> Result<(), CliError> {
    for config in settings.resolve()? {
        let net = Network::build(&config.network_spec()?, config.env.bounds())?;
        writeln!(log, "# {}", config.label())?;
        write!(log, "{}", net.describe())?;
    }
    Ok(())
}

pub fn execute(cli: &Cli, log: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(args) => cmd_run(args, log),
        Command::Batch(args) => cmd_batch(args, log).map(|_| ()),
        Command::Verify => cmd_verify(log),
        Command::Config {
            action: ConfigAction::Dump(settings),
        } => {
            let config = settings.resolve_one()?;
            write!(log, "{}", dump_config(&config)?)?;
            Ok(())
        }
        Command::Describe(settings) => cmd_describe(settings, log),
    }
}
