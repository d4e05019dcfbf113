use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

/// Basins of attraction and resonance thresholds of forced dissipative oscillators.
#[derive(Debug, Parser)]
#[command(name = "basinforge", version, about)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate relative basin areas by Monte Carlo sampling.
    Basins(BasinsArgs),
    /// Basin areas for a list of ramp parameters Δ on the same initial conditions.
    RampSweep(SweepArgs),
    /// Resonance damping thresholds.
    Threshold(ThresholdArgs),
    /// Floquet multipliers of a resonant periodic orbit.
    Floquet(FloquetArgs),
    /// Spin-orbit ε and γ from physical satellite data.
    SpinorbitParams(SpinParamsArgs),
    /// Plot data files from run outputs.
    #[command(subcommand)]
    Plotdata(PlotCommand),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// `key = value` file; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// cubic | spinorbit
    #[arg(long)]
    pub model: Option<String>,
    /// Forcing strength ε.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Orbital eccentricity (spin-orbit model).
    #[arg(long)]
    pub ecc: Option<f64>,
    /// Final damping γ0.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// constant | linear | exp
    #[arg(long)]
    pub schedule: Option<String>,
    /// Ramp parameter Δ (ramp time Δ/γ0).
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// taylor | rk (the spin-orbit model always uses rk)
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Taylor series order.
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub max_step: Option<f64>,
    #[arg(long)]
    pub min_step: Option<f64>,
    /// N in the transient time N/γ0.
    #[arg(long)]
    pub transient_factor: Option<f64>,
    /// Largest resonance denominator searched.
    #[arg(long)]
    pub q_max: Option<u32>,
    /// Stroboscopic samples per detection window.
    #[arg(long)]
    pub confirm_periods: Option<u32>,
    /// Distance below which representatives share a variant.
    #[arg(long)]
    pub cluster_radius: Option<f64>,
    /// Energy below which a trajectory is at the origin.
    #[arg(long)]
    pub origin_tol: Option<f64>,
    /// Distance below which stroboscopic samples match.
    #[arg(long)]
    pub period_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Sampling rectangle `q_lo,q_hi,v_lo,v_hi`.
    #[arg(long)]
    pub domain: Option<String>,
    /// Number of initial conditions.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Continue from the checkpoint in the output directory.
    #[arg(long)]
    pub resume: bool,
    /// Worker threads (default: all cores).
    #[arg(long, env = "BASINFORGE_WORKERS")]
    pub workers: Option<usize>,
    /// Exit with status 3 when the unclassified fraction exceeds this.
    #[arg(long)]
    pub alarm: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BasinsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub sample: SampleArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub sample: SampleArgs,
    /// Comma-separated Δ values.
    #[arg(long)]
    pub deltas: Option<String>,
    /// linear | exp
    #[arg(long)]
    pub ramp: Option<String>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated resonances, e.g. `1/2,1/4` or `3/2,2`.
    #[arg(long)]
    pub resonances: Option<String>,
    /// analytic | table | bisection
    #[arg(long = "threshold-method")]
    pub threshold_method: Option<String>,
    /// Bisection bracket `lo,hi` in γ.
    #[arg(long)]
    pub bracket: Option<String>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FloquetArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Resonance `p/q`.
    #[arg(long)]
    pub resonance: Option<String>,
    /// Comma-separated damping values (default: --gamma).
    #[arg(long)]
    pub gammas: Option<String>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpinParamsArgs {
    /// Satellite table (default: the shipped one).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum PlotCommand {
    /// Area versus log10 γ0 from several `basins_full.csv` files.
    Curves {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Initial conditions entering or leaving one basin between two runs.
    Diff {
        /// Labels file of the first run.
        #[arg(long)]
        a: PathBuf,
        /// Labels file of the second run.
        #[arg(long)]
        b: PathBuf,
        /// Resonance, e.g. `1/2`, or `0` for the origin.
        #[arg(long)]
        target: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Initial conditions grouped by label, from a labels file or a checkpoint.
    Scatter {
        #[arg(long, conflicts_with = "checkpoint", required_unless_present = "checkpoint")]
        labels: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Sampling rectangle of the checkpointed run.
        #[arg(long)]
        domain: Option<String>,
        /// Model of the checkpointed run, for its default rectangle.
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Basins(a) => commands::basins(a),
        Command::RampSweep(a) => commands::ramp_sweep(a),
        Command::Threshold(a) => commands::threshold(a),
        Command::Floquet(a) => commands::floquet(a),
        Command::SpinorbitParams(a) => commands::spinorbit_params(a),
        Command::Plotdata(PlotCommand::Curves { reports, out }) => commands::plot_curves(&reports, out),
        Command::Plotdata(PlotCommand::Diff { a, b, target, out }) => commands::plot_diff(&a, &b, &target, out),
        Command::Plotdata(PlotCommand::Scatter {
            labels,
            checkpoint,
            domain,
            model,
            out,
        }) => commands::plot_scatter(labels, checkpoint, domain, model, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
