//! `shotfrugal <experiment> --config <file> [...]` and `shotfrugal plot ...`.
//!
//! Exit codes: 0 on success, 1 on usage, configuration or I/O errors, 2 when
//! `bound_check` finds a violated bound.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{Experiment, Overrides, RawConfig, ResolvedConfig};
use crate::error::{HarnessError, Result};
use crate::experiments::{run_experiment, summary_lines, write_outputs};
use crate::plot::{emit_plot, PlotRequest};

#[derive(Debug, Parser)]
#[command(name = "shotfrugal", version, about = "Error-controlled shot-frugal optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulated annealing: fixed high E, fixed low E and error-aware targets.
    #[command(name = "sa_compare")]
    SaCompare(RunArgs),
    /// Gradient descent with sample-mean and recursive estimators.
    #[command(name = "gd_compare")]
    GdCompare(RunArgs),
    /// Gradient descent estimator comparison on QAOA MaxCut.
    #[command(name = "maxcut_compare")]
    MaxcutCompare(RunArgs),
    /// Monte Carlo check of the MSE and confidence bounds (exit 2 on failure).
    #[command(name = "bound_check")]
    BoundCheck(RunArgs),
    /// Render result CSVs to an SVG plot.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Flat JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Shot budget per trial.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// loss_vs_shots, dist_at_budget, error_bound_vs_shots, shots_per_iter,
    /// mse_bound_vs_actual or ci_check.
    #[arg(long)]
    kind: String,
    #[arg(long = "in", num_args = 1.., required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Only plot these variants (repeatable).
    #[arg(long = "variant")]
    variants: Vec<String>,
    /// Shot budget for dist_at_budget.
    #[arg(long)]
    budget: Option<u64>,
}

fn run(experiment: Experiment, args: RunArgs) -> Result<()> {
    let raw = RawConfig::load(&args.config)?;
    let over = Overrides {
        master_seed: args.seed,
        trials: args.trials,
        shot_budget: args.budget,
        output_dir: args.out_dir,
        workers: args.workers,
    };
    let cfg = ResolvedConfig::resolve(experiment, raw, over)?;
    let out = run_experiment(&cfg)?;
    let written = write_outputs(&cfg, &out)?;
    let mut stdout = std::io::stdout().lock();
    for line in summary_lines(&cfg, &out) {
        let _ = writeln!(stdout, "{line}");
    }
    for p in written {
        let _ = writeln!(stdout, "wrote {}", p.display());
    }
    let failures = out.bound_failures();
    if !failures.is_empty() {
        return Err(HarnessError::BoundCheck(format!(
            "{} iteration check(s) failed",
            failures.len()
        )));
    }
    Ok(())
}

fn plot(args: PlotArgs) -> Result<()> {
    let req = PlotRequest {
        kind: args.kind.parse()?,
        inputs: args.inputs,
        out: args.out,
        variants: (!args.variants.is_empty()).then_some(args.variants),
        budget: args.budget,
    };
    emit_plot(&req)?;
    let _ = writeln!(std::io::stdout(), "wrote {}", req.out.display());
    Ok(())
}

/// Parse `args` (including the program name) and run; never panics on bad
/// input.
pub fn main<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::SaCompare(a) => run(Experiment::SaCompare, a),
        Command::GdCompare(a) => run(Experiment::GdCompare, a),
        Command::MaxcutCompare(a) => run(Experiment::MaxcutCompare, a),
        Command::BoundCheck(a) => run(Experiment::BoundCheck, a),
        Command::Plot(a) => plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
