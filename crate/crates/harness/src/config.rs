//! Experiment configuration: a flat JSON object with optional keys.
//!
//! Every key may be omitted. Missing keys take a per-experiment default, and
//! the names of all defaulted keys are recorded in the manifest next to the
//! resolved values.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use shotfrugal_core::benchmarks::{make_cosine_problem, make_maxcut_problem, Graph};
use shotfrugal_core::estimators::DriftBound;
use shotfrugal_core::optimizers::{ErrorPolicy, EstimatorKind, GdConfig, SaConfig};
use shotfrugal_core::BenchmarkProblem64;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    SaCompare,
    GdCompare,
    MaxcutCompare,
    BoundCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [
        Experiment::SaCompare,
        Experiment::GdCompare,
        Experiment::MaxcutCompare,
        Experiment::BoundCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::SaCompare => "sa_compare",
            Experiment::GdCompare => "gd_compare",
            Experiment::MaxcutCompare => "maxcut_compare",
            Experiment::BoundCheck => "bound_check",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| HarnessError::config(format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Cosine,
    Maxcut,
}

impl FromStr for ProblemKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(ProblemKind::Cosine),
            "maxcut" => Ok(ProblemKind::Maxcut),
            other => Err(HarnessError::config(format!(
                "key \"problem\": unknown problem {other:?} (expected \"cosine\" or \"maxcut\")"
            ))),
        }
    }
}

/// The config file as written. Unknown keys are rejected by name.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: Option<String>,
    pub trials: Option<usize>,
    pub master_seed: Option<u64>,
    pub shot_budget: Option<u64>,
    pub workers: Option<usize>,
    pub output_dir: Option<PathBuf>,

    pub problem: Option<String>,
    pub graph_file: Option<PathBuf>,
    pub layers: Option<usize>,
    pub merge_terms: Option<bool>,
    pub theta0: Option<Vec<f64>>,
    pub init_spread: Option<f64>,

    pub t0: Option<f64>,
    pub cooling: Option<f64>,
    pub proposal_sigma: Option<f64>,
    pub eta: Option<f64>,
    pub e_high: Option<f64>,
    pub e_low: Option<f64>,
    pub refresh_incumbent: Option<bool>,
    pub sa_max_iters: Option<usize>,

    pub learning_rate: Option<f64>,
    pub e_f: Option<f64>,
    pub e_grad: Option<f64>,
    pub max_iters: Option<usize>,
    pub drift_bound: Option<String>,

    pub kappa: Option<f64>,
}

impl RawConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text).map_err(|e| HarnessError::config(format!("{}: {e}", path.display())))
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub master_seed: Option<u64>,
    pub trials: Option<usize>,
    pub shot_budget: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
}

/// Fully resolved configuration; written verbatim to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub experiment: Experiment,
    pub trials: usize,
    pub master_seed: u64,
    /// `null` means no cap.
    pub shot_budget: Option<u64>,
    /// 0 uses one worker per available core.
    pub workers: usize,
    pub output_dir: PathBuf,

    pub problem: ProblemKind,
    pub graph_file: Option<PathBuf>,
    pub layers: usize,
    pub merge_terms: bool,
    pub theta0: Vec<f64>,
    pub init_spread: f64,

    pub t0: f64,
    pub cooling: f64,
    pub proposal_sigma: f64,
    pub eta: f64,
    pub e_high: f64,
    pub e_low: f64,
    pub refresh_incumbent: bool,
    pub sa_max_iters: Option<usize>,

    pub learning_rate: f64,
    pub e_f: f64,
    pub e_grad: f64,
    pub max_iters: usize,
    pub drift_bound: String,

    pub kappa: f64,

    /// Keys whose values came from defaults rather than the file or flags.
    pub defaults_applied: Vec<String>,
}

struct Resolver {
    defaults: Vec<String>,
}

impl Resolver {
    fn take<V>(&mut self, key: &str, value: Option<V>, default: V) -> V {
        value.unwrap_or_else(|| {
            self.defaults.push(key.to_string());
            default
        })
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(HarnessError::config(format!(
            "key {key:?} must be positive and finite, got {v}"
        )))
    }
}

pub const MIN_BOUND_CHECK_TRIALS: usize = 500;

impl ResolvedConfig {
    pub fn resolve(experiment: Experiment, raw: RawConfig, over: Overrides) -> Result<Self> {
        if let Some(name) = &raw.experiment {
            let named: Experiment = name
                .parse()
                .map_err(|_| HarnessError::config(format!("key \"experiment\": unknown experiment {name:?}")))?;
            if named != experiment {
                return Err(HarnessError::config(format!(
                    "key \"experiment\" is {name:?} but the command runs {experiment}"
                )));
            }
        }
        let mut r = Resolver {
            defaults: Vec::new(),
        };
        let problem = match raw.problem.as_deref() {
            Some(p) => p.parse()?,
            None => r.take(
                "problem",
                None,
                if experiment == Experiment::MaxcutCompare {
                    ProblemKind::Maxcut
                } else {
                    ProblemKind::Cosine
                },
            ),
        };
        if experiment == Experiment::MaxcutCompare && problem != ProblemKind::Maxcut {
            return Err(HarnessError::config(
                "key \"problem\": maxcut_compare requires \"maxcut\"",
            ));
        }

        let trials = r.take(
            "trials",
            over.trials.or(raw.trials),
            match experiment {
                Experiment::SaCompare => 100,
                Experiment::GdCompare | Experiment::MaxcutCompare => 50,
                Experiment::BoundCheck => MIN_BOUND_CHECK_TRIALS,
            },
        );
        let master_seed = r.take("master_seed", over.master_seed.or(raw.master_seed), 0);
        let shot_budget = match over.shot_budget.or(raw.shot_budget) {
            Some(b) => Some(b),
            None => r.take(
                "shot_budget",
                None,
                (experiment == Experiment::SaCompare).then_some(7000),
            ),
        };
        let workers = r.take("workers", over.workers.or(raw.workers), 0);
        let output_dir = r.take(
            "output_dir",
            over.output_dir.or(raw.output_dir),
            PathBuf::from("out").join(experiment.name()),
        );

        let graph_file = raw.graph_file;
        let layers = r.take("layers", raw.layers, 1);
        let merge_terms = r.take("merge_terms", raw.merge_terms, false);
        let m = match problem {
            ProblemKind::Cosine => 1,
            ProblemKind::Maxcut => 2 * layers,
        };
        let default_theta0 = match (experiment, problem) {
            (Experiment::SaCompare, _) => vec![0.0; m],
            (_, ProblemKind::Cosine) => vec![1.0],
            (_, ProblemKind::Maxcut) => vec![0.2; m],
        };
        let theta0 = r.take("theta0", raw.theta0, default_theta0);
        let init_spread = r.take(
            "init_spread",
            raw.init_spread,
            if experiment == Experiment::SaCompare { 0.1 } else { 0.0 },
        );

        let t0 = r.take("t0", raw.t0, 4.0);
        let cooling = r.take("cooling", raw.cooling, 0.9);
        let proposal_sigma = r.take("proposal_sigma", raw.proposal_sigma, 1.0);
        let eta = r.take("eta", raw.eta, 0.5);
        let e_high = r.take("e_high", raw.e_high, 0.25);
        let e_low = r.take("e_low", raw.e_low, 0.0025);
        let refresh_incumbent = r.take("refresh_incumbent", raw.refresh_incumbent, false);
        let sa_max_iters = raw.sa_max_iters;

        let learning_rate = r.take(
            "learning_rate",
            raw.learning_rate,
            match problem {
                ProblemKind::Cosine => 0.2,
                ProblemKind::Maxcut => 0.1,
            },
        );
        let e_f = r.take("e_f", raw.e_f, 0.01);
        let e_grad = r.take("e_grad", raw.e_grad, 0.01);
        let max_iters = r.take("max_iters", raw.max_iters, 50);
        let drift_bound = r.take("drift_bound", raw.drift_bound, "algorithm".to_string());
        let kappa = r.take("kappa", raw.kappa, 2.0);

        let resolved = ResolvedConfig {
            experiment,
            trials,
            master_seed,
            shot_budget,
            workers,
            output_dir,
            problem,
            graph_file,
            layers,
            merge_terms,
            theta0,
            init_spread,
            t0,
            cooling,
            proposal_sigma,
            eta,
            e_high,
            e_low,
            refresh_incumbent,
            sa_max_iters,
            learning_rate,
            e_f,
            e_grad,
            max_iters,
            drift_bound,
            kappa,
            defaults_applied: r.defaults,
        };
        resolved.validate()?;
        Ok(resolved)
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HarnessError::config("key \"trials\" must be at least 1"));
        }
        if self.experiment == Experiment::BoundCheck && self.trials < MIN_BOUND_CHECK_TRIALS {
            return Err(HarnessError::config(format!(
                "key \"trials\": bound_check needs at least {MIN_BOUND_CHECK_TRIALS} trials, got {}",
                self.trials
            )));
        }
        if self.shot_budget == Some(0) {
            return Err(HarnessError::config("key \"shot_budget\" must be at least 1"));
        }
        if self.layers == 0 {
            return Err(HarnessError::config("key \"layers\" must be at least 1"));
        }
        if self.init_spread < 0.0 || !self.init_spread.is_finite() {
            return Err(HarnessError::config("key \"init_spread\" must be non-negative"));
        }
        if self.theta0.iter().any(|t| !t.is_finite()) {
            return Err(HarnessError::config("key \"theta0\" must be finite"));
        }
        if self.graph_file.is_some() && self.problem != ProblemKind::Maxcut {
            return Err(HarnessError::config(
                "key \"graph_file\" only applies to the maxcut problem",
            ));
        }
        positive("kappa", self.kappa)?;
        positive("e_high", self.e_high)?;
        positive("e_low", self.e_low)?;
        self.drift()?;
        if self.experiment == Experiment::SaCompare {
            for (_, cfg) in self.sa_variants() {
                cfg.validate()
                    .map_err(|e| HarnessError::config(e.to_string()))?;
            }
        } else {
            positive("e_grad", self.e_grad)?;
            for (_, cfg) in self.gd_variants()? {
                cfg.validate(self.num_params())
                    .map_err(|e| HarnessError::config(e.to_string()))?;
            }
        }
        if self.theta0.len() != self.num_params() {
            return Err(HarnessError::config(format!(
                "key \"theta0\" has {} entries, the problem has {} parameters",
                self.theta0.len(),
                self.num_params()
            )));
        }
        Ok(())
    }

    fn drift(&self) -> Result<DriftBound> {
        self.drift_bound
            .parse()
            .map_err(|_| {
                HarnessError::config(format!(
                    "key \"drift_bound\": unknown value {:?} (expected \"theorem\", \"sqrt-m\" or \"algorithm\")",
                    self.drift_bound
                ))
            })
    }

    pub fn num_params(&self) -> usize {
        match self.problem {
            ProblemKind::Cosine => 1,
            ProblemKind::Maxcut => 2 * self.layers,
        }
    }

    /// Graph for the maxcut problem: the edge-list file if given, else C₄.
    pub fn graph(&self) -> Result<Graph> {
        match &self.graph_file {
            None => Ok(Graph::square()),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
                Graph::parse_edge_list(&text)
                    .map_err(|e| HarnessError::config(format!("{}: {e}", path.display())))
            }
        }
    }

    pub fn build_problem(&self) -> Result<BenchmarkProblem64> {
        match self.problem {
            ProblemKind::Cosine => Ok(make_cosine_problem()),
            ProblemKind::Maxcut => Ok(make_maxcut_problem(
                &self.graph()?,
                self.layers,
                self.merge_terms,
            )?),
        }
    }

    pub fn budget(&self) -> u64 {
        self.shot_budget.unwrap_or(u64::MAX)
    }

    pub fn sa_variants(&self) -> Vec<(&'static str, SaConfig<f64>)> {
        let base = SaConfig {
            t0: self.t0,
            cooling: self.cooling,
            proposal_sigma: self.proposal_sigma,
            eta: self.eta,
            shot_budget: self.budget(),
            policy: ErrorPolicy::ErrorAware,
            estimator: EstimatorKind::SampleMean,
            refresh_incumbent: self.refresh_incumbent,
            max_iters: self.sa_max_iters,
        };
        [
            ("fixed_high", ErrorPolicy::Fixed(self.e_high)),
            ("fixed_low", ErrorPolicy::Fixed(self.e_low)),
            ("error_aware", ErrorPolicy::ErrorAware),
        ]
        .into_iter()
        .map(|(name, policy)| {
            (
                name,
                SaConfig {
                    policy,
                    ..base.clone()
                },
            )
        })
        .collect()
    }

    pub fn gd_variants(&self) -> Result<Vec<(&'static str, GdConfig<f64>)>> {
        let drift = self.drift()?;
        Ok([EstimatorKind::SampleMean, EstimatorKind::Recursive]
            .into_iter()
            .map(|estimator| {
                (
                    estimator.name(),
                    GdConfig {
                        learning_rate: self.learning_rate,
                        e_f: self.e_f,
                        e_grad: vec![self.e_grad; self.num_params()],
                        max_iters: self.max_iters,
                        shot_budget: self.budget(),
                        estimator,
                        drift,
                    },
                )
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_named() {
        let err = RawConfig::from_json(r#"{"trials": 3, "temprature": 1.0}"#).unwrap_err();
        assert!(err.to_string().contains("temprature"), "{err}");
    }

    #[test]
    fn defaults_are_recorded() {
        let raw = RawConfig::from_json(r#"{"trials": 3}"#).unwrap();
        let c = ResolvedConfig::resolve(Experiment::SaCompare, raw, Overrides::default()).unwrap();
        assert_eq!(c.trials, 3);
        assert_eq!(c.shot_budget, Some(7000));
        assert!(!c.defaults_applied.contains(&"trials".to_string()));
        for key in ["shot_budget", "t0", "e_high", "e_low", "eta", "master_seed"] {
            assert!(c.defaults_applied.contains(&key.to_string()), "{key}");
        }
    }

    #[test]
    fn overrides_win() {
        let raw = RawConfig::from_json(r#"{"trials": 3, "master_seed": 1}"#).unwrap();
        let over = Overrides {
            trials: Some(5),
            master_seed: Some(9),
            ..Overrides::default()
        };
        let c = ResolvedConfig::resolve(Experiment::GdCompare, raw, over).unwrap();
        assert_eq!((c.trials, c.master_seed), (5, 9));
        assert_eq!(c.shot_budget, None);
    }

    #[test]
    fn invalid_values_are_rejected() {
        let cases = [
            (Experiment::SaCompare, r#"{"cooling": 1.5}"#),
            (Experiment::SaCompare, r#"{"trials": 0}"#),
            (Experiment::BoundCheck, r#"{"trials": 100}"#),
            (Experiment::GdCompare, r#"{"experiment": "sa_compare"}"#),
            (Experiment::MaxcutCompare, r#"{"problem": "cosine"}"#),
            (Experiment::GdCompare, r#"{"drift_bound": "loose"}"#),
            (Experiment::GdCompare, r#"{"theta0": [1.0, 2.0]}"#),
            (Experiment::GdCompare, r#"{"e_f": -1}"#),
        ];
        for (exp, json) in cases {
            let raw = RawConfig::from_json(json).unwrap();
            assert!(
                ResolvedConfig::resolve(exp, raw, Overrides::default()).is_err(),
                "{json}"
            );
        }
    }

    #[test]
    fn maxcut_defaults() {
        let c = ResolvedConfig::resolve(
            Experiment::MaxcutCompare,
            RawConfig::default(),
            Overrides::default(),
        )
        .unwrap();
        assert_eq!(c.problem, ProblemKind::Maxcut);
        assert_eq!(c.theta0.len(), 2);
        assert_eq!(c.build_problem().unwrap().observable.num_terms(), 4);
    }
}
