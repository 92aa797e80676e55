//! Command-line frontend: analytic sweeps, simulation sweeps, tolerance-gated
//! comparison with errata evidence, repeater curves, and trace export.
//!
//! Exit codes: 0 success, 1 validation error, 2 tolerance breach (compare),
//! 3 internal invariant violation.

mod compare;
mod config;
mod jobs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use telequeue::markov::DoubleQueueConfig;
use telequeue::sim::{run as sim_run, PolicySpec};

use config::{DisciplineKind, GridScale, Settings};
use jobs::{Sweep, SweepParam};

#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn validation(message: String) -> Self {
        Self { message, code: 1 }
    }

    pub fn internal(message: String) -> Self {
        Self { message, code: 3 }
    }

    pub fn from_core(err: telequeue::Error) -> Self {
        match err {
            telequeue::Error::Numerical(_) => Self::internal(err.to_string()),
            _ => Self::validation(err.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "telequeue",
    about = "Average teleportation fidelity of a node with noisy memories: analytics, simulation, and cross-checks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Flat key=value config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Shipped parameterization: fig3, fig4, fig5 (sweeps), fig6 (repeater).
    #[arg(long)]
    preset: Option<String>,
    /// Dephasing rate of both memories.
    #[arg(long)]
    gamma: Option<f64>,
    /// EPR generation rate.
    #[arg(long)]
    lambda_e: Option<f64>,
    /// Request arrival rate (fixed sweeps only; load sweeps derive it).
    #[arg(long)]
    lambda_r: Option<f64>,
    /// EPR buffer size.
    #[arg(long)]
    buf_e: Option<usize>,
    /// Request buffer size.
    #[arg(long)]
    buf_r: Option<usize>,
    /// Request-side discipline: fifo, lifo, fifo-po, lifo-po.
    #[arg(long)]
    disc_r: Option<String>,
    /// EPR-side discipline: fifo, lifo, fifo-po, lifo-po.
    #[arg(long)]
    disc_e: Option<String>,
    /// Simulation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Arrival events per simulated grid point.
    #[arg(long)]
    events: Option<u64>,
    /// Swept parameter: load or buffer (mu for repeater).
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long)]
    grid_min: Option<f64>,
    #[arg(long)]
    grid_max: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    /// linear or log.
    #[arg(long)]
    grid_scale: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic sweep: mean fidelity and service probabilities per point.
    Analyze(CommonOpts),
    /// Simulated sweep with batch-means standard errors.
    Simulate(CommonOpts),
    /// Analytic vs simulated gate; exits 2 on any tolerance breach.
    Compare(CommonOpts),
    /// Repeater infidelity over the generation rate (log grid).
    Repeater(CommonOpts),
    /// Run one simulation and export the per-request trace CSV.
    Trace(CommonOpts),
}

fn resolve_settings(opts: &CommonOpts) -> Result<Settings, CliError> {
    let mut s = Settings::default();
    if let Some(path) = &opts.config {
        s.apply_file(path)?;
    }
    if let Some(v) = opts.gamma {
        s.gamma = v;
    }
    if let Some(v) = opts.lambda_e {
        s.lambda_e = v;
    }
    if let Some(v) = opts.lambda_r {
        s.lambda_r = v;
    }
    if let Some(v) = opts.buf_e {
        s.buf_e = v;
    }
    if let Some(v) = opts.buf_r {
        s.buf_r = v;
    }
    if let Some(v) = &opts.disc_r {
        s.disc_r = DisciplineKind::parse(v)?;
    }
    if let Some(v) = &opts.disc_e {
        s.disc_e = DisciplineKind::parse(v)?;
    }
    if let Some(v) = opts.seed {
        s.seed = v;
    }
    if let Some(v) = opts.events {
        s.events = v;
    }
    if let Some(v) = opts.grid_min {
        s.grid_min = v;
    }
    if let Some(v) = opts.grid_max {
        s.grid_max = v;
    }
    if let Some(v) = opts.grid_points {
        s.grid_points = v;
    }
    if let Some(v) = &opts.grid_scale {
        s.grid_scale = match v.to_ascii_lowercase().as_str() {
            "linear" => GridScale::Linear,
            "log" => GridScale::Log,
            other => {
                return Err(CliError::validation(format!(
                    "unknown grid scale `{other}` (expected linear or log)"
                )))
            }
        };
    }
    if let Some(v) = &opts.output {
        s.output = Some(v.clone());
    }
    Ok(s)
}

fn resolve_sweep(opts: &CommonOpts, default_param: SweepParam) -> Result<Sweep, CliError> {
    let settings = resolve_settings(opts)?;
    if let Some(preset) = &opts.preset {
        if opts.sweep.is_some() {
            return Err(CliError::validation("--preset and --sweep are exclusive".into()));
        }
        // fig6 is the repeater parameterization (Bell curves on both
        // phases); the load sweeps belong to the other subcommands.
        let for_repeater = default_param == SweepParam::Mu;
        if for_repeater != (preset == "fig6") {
            return Err(CliError::validation(format!(
                "preset `{preset}` does not apply to this subcommand"
            )));
        }
        return Sweep::preset(preset, &settings);
    }
    let param = match &opts.sweep {
        Some(s) => SweepParam::parse(s)?,
        None => default_param,
    };
    Sweep::from_settings(&settings, param)
}

/// Writes to stdout, treating a closed pipe (e.g. `| head`) as a normal
/// early exit.
fn print_stdout(content: &str) -> Result<(), CliError> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(content.as_bytes()).and_then(|()| out.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(CliError::validation(format!("cannot write to stdout: {e}"))),
    }
}

/// Output is assembled fully in memory before anything is written, so a
/// failed run never leaves a partial file behind.
fn emit(settings: &Settings, content: &str) -> Result<(), CliError> {
    match &settings.output {
        Some(path) => std::fs::write(path, content).map_err(|e| {
            CliError::validation(format!("cannot write {}: {e}", path.display()))
        }),
        None => print_stdout(content),
    }
}

fn cmd_analyze(opts: &CommonOpts) -> Result<(), CliError> {
    let sweep = resolve_sweep(opts, SweepParam::Load)?;
    let rows = jobs::analyze(&sweep)?;
    emit(&sweep.settings, &jobs::analyze_csv(&rows))
}

fn cmd_simulate(opts: &CommonOpts) -> Result<(), CliError> {
    let sweep = resolve_sweep(opts, SweepParam::Load)?;
    let rows = jobs::simulate(&sweep)?;
    emit(&sweep.settings, &jobs::simulate_csv(&rows))
}

fn cmd_compare(opts: &CommonOpts) -> Result<(), CliError> {
    let sweep = resolve_sweep(opts, SweepParam::Load)?;
    let analytic = jobs::analyze(&sweep)?;
    let simulated = jobs::simulate(&sweep)?;
    let points = compare::compare_rows(&analytic, &simulated);
    let text = compare::report(&points)?;
    print_stdout(&text)?;
    if sweep.settings.output.is_some() {
        emit(&sweep.settings, &compare::compare_csv(&points))?;
    }
    if points.iter().any(|p| p.verdict == compare::Verdict::Breach) {
        return Err(CliError { message: "tolerance breach".into(), code: 2 });
    }
    Ok(())
}

fn cmd_repeater(opts: &CommonOpts) -> Result<(), CliError> {
    let mut sweep = resolve_sweep(opts, SweepParam::Mu)?;
    if opts.preset.is_none() {
        // Repeater defaults: log grid over mu unless the user pinned one.
        if opts.grid_scale.is_none() && opts.config.is_none() {
            sweep = Sweep {
                grid: {
                    let mut s = sweep.settings.clone();
                    s.grid_scale = GridScale::Log;
                    if opts.grid_min.is_none() {
                        s.grid_min = 0.1;
                    }
                    if opts.grid_max.is_none() {
                        s.grid_max = 100.0;
                    }
                    s.grid()
                },
                ..sweep
            };
        }
        // Symmetric buffer from buf_r (or --buf-e if given).
        for job in &mut sweep.jobs {
            let b = job.buf_r.min(job.buf_e);
            job.buf_r = b;
            job.buf_e = b;
        }
    }
    let rows = jobs::repeater_rows(&sweep)?;
    emit(&sweep.settings, &jobs::repeater_csv(&rows))
}

fn cmd_trace(opts: &CommonOpts) -> Result<(), CliError> {
    let s = resolve_settings(opts)?;
    s.validate()?;
    let (disc_r, buf_r) = s.disc_r.with_buffer(s.buf_r);
    let (disc_e, buf_e) = s.disc_e.with_buffer(s.buf_e);
    let cfg = DoubleQueueConfig::new(s.lambda_e, s.lambda_r, buf_e, buf_r, s.gamma, s.gamma)
        .map_err(CliError::from_core)?;
    let trace = sim_run(&cfg, PolicySpec::from_disciplines(disc_r, disc_e), s.events, s.seed);
    if trace.capped {
        eprintln!(
            "warning: occupancy guard tripped after {} events; trace truncated",
            trace.counters.arrivals_request + trace.counters.arrivals_epr
        );
    }
    emit(&s, &trace.to_csv())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(opts) => cmd_analyze(opts),
        Command::Simulate(opts) => cmd_simulate(opts),
        Command::Compare(opts) => cmd_compare(opts),
        Command::Repeater(opts) => cmd_repeater(opts),
        Command::Trace(opts) => cmd_trace(opts),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
