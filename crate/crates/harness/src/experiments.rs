//! Seeded ensembles for each experiment and the files they produce.

use std::path::PathBuf;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use shotfrugal_core::estimators::confidence_interval;
use shotfrugal_core::optimizers::{run_gd, run_sa};
use shotfrugal_core::rng::split;
use shotfrugal_core::{BenchmarkProblem64, TraceRow64};

use crate::bounds::{summarize, BoundRow, ErrorSample};
use crate::config::{Experiment, ResolvedConfig};
use crate::error::{HarnessError, Result};
use crate::table::{Record, VariantTable};

/// RNG lane for the starting point, shared by every variant of a trial so
/// that variants are compared from identical starts.
pub const INIT_LANE: u8 = 15;

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub tables: Vec<VariantTable>,
    /// Per-iteration statistics; filled by `bound_check` only.
    pub bounds: Vec<BoundRow>,
}

impl ExperimentOutput {
    pub fn table(&self, variant: &str) -> Option<&VariantTable> {
        self.tables.iter().find(|t| t.variant == variant)
    }

    pub fn bound_failures(&self) -> Vec<&BoundRow> {
        self.bounds.iter().filter(|b| !b.passed()).collect()
    }
}

enum Variant {
    Sa(shotfrugal_core::SaConfig64),
    Gd(shotfrugal_core::GdConfig64),
}

fn variants(cfg: &ResolvedConfig) -> Result<Vec<(&'static str, Variant)>> {
    Ok(match cfg.experiment {
        Experiment::SaCompare => cfg
            .sa_variants()
            .into_iter()
            .map(|(n, c)| (n, Variant::Sa(c)))
            .collect(),
        _ => cfg
            .gd_variants()?
            .into_iter()
            .map(|(n, c)| (n, Variant::Gd(c)))
            .collect(),
    })
}

/// Starting point of `trial`: `theta0` plus Gaussian jitter of scale
/// `init_spread`.
pub fn initial_theta(cfg: &ResolvedConfig, trial: u64) -> Vec<f64> {
    let mut rng = split(cfg.master_seed, trial, INIT_LANE);
    cfg.theta0
        .iter()
        .map(|&t| {
            let z: f64 = StandardNormal.sample(&mut rng);
            t + cfg.init_spread * z
        })
        .collect()
}

struct TrialResult {
    records: Vec<Record>,
    samples: Vec<ErrorSample>,
}

fn run_trial(
    cfg: &ResolvedConfig,
    problem: &BenchmarkProblem64,
    lane: usize,
    name: &str,
    variant: &Variant,
    trial: u64,
) -> Result<TrialResult> {
    let theta0 = initial_theta(cfg, trial);
    let mut rng = split(cfg.master_seed, trial, lane as u8);
    let trace: Vec<TraceRow64> = match variant {
        Variant::Sa(c) => run_sa(problem, c, &theta0, &mut rng)?,
        Variant::Gd(c) => run_gd(problem, c, &theta0, &mut rng)?,
    };
    let samples = if cfg.experiment == Experiment::BoundCheck {
        trace
            .iter()
            .map(|r| ErrorSample {
                iteration: r.iteration,
                error: r.estimate.value() - r.exact_f,
                mse_bound: r.estimate.mse_bound(),
                ci_radius: confidence_interval(&r.estimate, cfg.kappa).radius,
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(TrialResult {
        records: trace
            .iter()
            .map(|r| Record::from_trace(cfg.experiment.name(), name, trial, r))
            .collect(),
        samples,
    })
}

/// Run every variant of `cfg.experiment` over `cfg.trials` seeded trials.
/// The output depends only on the configuration, not on the worker count.
pub fn run_experiment(cfg: &ResolvedConfig) -> Result<ExperimentOutput> {
    let problem = cfg.build_problem()?;
    let variants = variants(cfg)?;
    let jobs: Vec<(usize, u64)> = (0..variants.len())
        .flat_map(|v| (0..cfg.trials as u64).map(move |t| (v, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| HarnessError::config(format!("worker pool: {e}")))?;
    let results: Vec<TrialResult> = pool.install(|| {
        jobs.par_iter()
            .map(|&(v, t)| {
                let (name, variant) = &variants[v];
                run_trial(cfg, &problem, v, name, variant, t)
            })
            .collect::<Result<_>>()
    })?;

    let mut tables = Vec::with_capacity(variants.len());
    let mut bounds = Vec::new();
    let per_variant = cfg.trials;
    for (v, chunk) in results.chunks(per_variant).enumerate() {
        let name = variants[v].0;
        let mut table = VariantTable {
            variant: name.to_string(),
            num_params: problem.num_params(),
            rows: chunk.iter().flat_map(|r| r.records.iter().cloned()).collect(),
        };
        table.sort();
        tables.push(table);
        if cfg.experiment == Experiment::BoundCheck {
            let samples: Vec<&ErrorSample> = chunk.iter().flat_map(|r| &r.samples).collect();
            bounds.extend(summarize(name, &samples, cfg.kappa, name == "sample_mean"));
        }
    }
    Ok(ExperimentOutput { tables, bounds })
}

#[derive(Debug, Serialize)]
struct VariantEntry {
    variant: String,
    file: String,
    rows: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    problem: String,
    num_params: usize,
    known_optimum: Option<f64>,
    config: &'a ResolvedConfig,
    variants: Vec<VariantEntry>,
    summary_file: Option<String>,
}

pub fn csv_file_name(experiment: Experiment, variant: &str) -> String {
    format!("{}_{variant}.csv", experiment.name())
}

/// Write one CSV per variant, the bound summary if any, and `manifest.json`.
/// Returns the paths written.
pub fn write_outputs(cfg: &ResolvedConfig, out: &ExperimentOutput) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut written = Vec::new();
    let mut entries = Vec::new();
    for t in &out.tables {
        let file = csv_file_name(cfg.experiment, &t.variant);
        let path = dir.join(&file);
        t.write(&path)?;
        written.push(path);
        entries.push(VariantEntry {
            variant: t.variant.clone(),
            file,
            rows: t.rows.len(),
        });
    }
    let summary_file = if out.bounds.is_empty() {
        None
    } else {
        let file = format!("{}_summary.csv", cfg.experiment.name());
        let path = dir.join(&file);
        crate::bounds::write_summary(&path, &out.bounds)?;
        written.push(path);
        Some(file)
    };
    let problem = cfg.build_problem()?;
    let manifest = Manifest {
        tool: "shotfrugal",
        version: env!("CARGO_PKG_VERSION"),
        problem: problem.name.clone(),
        num_params: problem.num_params(),
        known_optimum: problem.known_optimum.as_ref().map(|k| k.value),
        config: cfg,
        variants: entries,
        summary_file,
    };
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|source| HarnessError::Json {
        path: path.clone(),
        source,
    })?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
    written.push(path);
    Ok(written)
}

/// `exact_f` reached within `budget` shots: the last row whose cumulative
/// count does not exceed it (row 0 if none does).
pub fn exact_f_at_budget(rows: &[Record], budget: u64) -> Option<f64> {
    rows.iter()
        .rev()
        .find(|r| r.cumulative_shots <= budget)
        .or(rows.first())
        .map(|r| r.exact_f)
}

/// Rows of each trial, in trial order.
pub fn by_trial(rows: &[Record]) -> Vec<&[Record]> {
    rows.chunk_by(|a, b| a.trial == b.trial).collect()
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Human-readable lines describing the outcome of a run.
pub fn summary_lines(cfg: &ResolvedConfig, out: &ExperimentOutput) -> Vec<String> {
    let mut lines = Vec::new();
    for t in &out.tables {
        let trials = by_trial(&t.rows);
        let budget = cfg.shot_budget.unwrap_or(u64::MAX);
        let mut finals: Vec<f64> = trials
            .iter()
            .filter_map(|rows| exact_f_at_budget(rows, budget))
            .collect();
        let mut shots: Vec<f64> = trials
            .iter()
            .filter_map(|rows| rows.last().map(|r| r.cumulative_shots as f64))
            .collect();
        lines.push(format!(
            "{:<12} trials={:<4} median exact_f={:+.4}  median shots={}",
            t.variant,
            trials.len(),
            median(&mut finals),
            median(&mut shots)
        ));
    }
    if !out.bounds.is_empty() {
        let failures = out.bound_failures();
        lines.push(format!(
            "bound check: {} of {} iteration checks passed",
            out.bounds.len() - failures.len(),
            out.bounds.len()
        ));
        for f in failures {
            lines.push(format!("  FAIL {}", f.describe()));
        }
    }
    lines
}
