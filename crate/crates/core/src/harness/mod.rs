//! Monte Carlo experiments: threshold estimation, simulation against the
//! mean-field solution and sampler self-tests.
//!
//! Trial `i` of any experiment seeds its process with `base_seed + i`, and
//! results are collected in trial order, so outputs do not depend on how
//! rayon schedules the trials.

mod compare;
pub mod output;
pub mod selftest;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use compare::{compare_trajectory, safe_comparison_bound, ComparisonPoint, ComparisonReport};
pub use selftest::{
    brute_force_distribution, closed_form_selftest, sampler_selftest, ClosedFormCheck, Fixture,
    SelftestReport,
};

use crate::error::{Error, Result};
use crate::process::{ModelKind, ModelSpec, ProcessState, Sampling, StopCondition};
use crate::tracker::Snapshot;

pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Timescale {
    /// Units of `n/2` edges.
    Giant,
    /// Units of `(n/2) ln n` edges.
    Connectivity,
}

impl fmt::Display for Timescale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Timescale::Giant => "giant",
            Timescale::Connectivity => "connectivity",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Giant,
    Connectivity,
    Trajectory,
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "giant" => Ok(Target::Giant),
            "connectivity" => Ok(Target::Connectivity),
            "trajectory" => Ok(Target::Trajectory),
            other => Err(Error::InvalidParameter(format!("unknown target `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub model: ModelKind,
    pub k: f64,
    pub n: usize,
    pub trials: usize,
    pub mean: f64,
    pub stddev: f64,
    pub timescale: Timescale,
    /// Edge count at the hitting time of each trial.
    pub edges: Vec<u64>,
    /// Hitting time of each trial in `timescale` units.
    pub values: Vec<f64>,
}

fn validate_run(n: usize, trials: usize) -> Result<()> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "n must be at least 4, got {n}"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter(
            "at least one trial required".into(),
        ));
    }
    Ok(())
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

/// Sample mean and (n - 1)-normalised standard deviation.
pub fn mean_stddev(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs `trials` independent processes to `stop`, in parallel.
pub fn run_trials(
    model: &ModelSpec,
    n: usize,
    trials: usize,
    base_seed: u64,
    stop: StopCondition,
) -> Result<Vec<Snapshot>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut state = ProcessState::new(*model, n, base_seed.wrapping_add(i))?;
            state.run_until(stop)
        })
        .collect()
}

fn estimate(
    model: &ModelSpec,
    n: usize,
    trials: usize,
    base_seed: u64,
    stop: StopCondition,
    timescale: Timescale,
) -> Result<ThresholdEstimate> {
    let snaps = run_trials(model, n, trials, base_seed, stop)?;
    let values: Vec<f64> = snaps
        .iter()
        .map(|s| match timescale {
            Timescale::Giant => s.t_g,
            Timescale::Connectivity => s.t_c,
        })
        .collect();
    let (mean, stddev) = mean_stddev(&values);
    Ok(ThresholdEstimate {
        model: model.kind,
        k: model.k,
        n,
        trials,
        mean,
        stddev,
        timescale,
        edges: snaps.iter().map(|s| s.m).collect(),
        values,
    })
}

/// First time, in units of `n/2` edges, at which a component of at least
/// `alpha * n` vertices exists.
pub fn estimate_giant_threshold(
    model: &ModelSpec,
    n: usize,
    alpha: f64,
    trials: usize,
    base_seed: u64,
) -> Result<ThresholdEstimate> {
    validate_run(n, trials)?;
    validate_alpha(alpha)?;
    estimate(
        model,
        n,
        trials,
        base_seed,
        StopCondition::GiantFraction(alpha),
        Timescale::Giant,
    )
}

/// First time, in units of `(n/2) ln n` edges, at which the graph is connected.
pub fn estimate_connectivity_threshold(
    model: &ModelSpec,
    n: usize,
    trials: usize,
    base_seed: u64,
) -> Result<ThresholdEstimate> {
    validate_run(n, trials)?;
    estimate(
        model,
        n,
        trials,
        base_seed,
        StopCondition::Connected,
        Timescale::Connectivity,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub models: Vec<ModelKind>,
    pub ks: Vec<f64>,
    pub n: usize,
    pub trials: usize,
    pub alpha: f64,
    pub base_seed: u64,
    pub target: Target,
    pub sampling: Sampling,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        validate_run(self.n, self.trials)?;
        validate_alpha(self.alpha)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub model: ModelKind,
    pub k: f64,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<ThresholdEstimate>,
    pub comparisons: Vec<ComparisonReport>,
    pub failures: Vec<CellFailure>,
}

/// Grid used by trajectory sweeps, as fractions of the singularity.
pub const TRAJECTORY_GRID_FRACTIONS: [f64; 3] = [0.25, 0.5, 0.75];

/// Every (model, K) cell of `config`, in model-major order. A failing cell is
/// recorded and the sweep moves on. Trajectory sweeps only use the `And`
/// model.
pub fn sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let mut result = SweepResult::default();
    if config.target == Target::Trajectory {
        for &k in &config.ks {
            match trajectory_cell(config, k) {
                Ok(report) => result.comparisons.push(report),
                Err(e) => result.failures.push(CellFailure {
                    model: ModelKind::And,
                    k,
                    error: e.to_string(),
                }),
            }
        }
        return Ok(result);
    }
    for &kind in &config.models {
        for &k in &config.ks {
            let cell =
                ModelSpec::new(kind, k, config.sampling).and_then(|model| match config.target {
                    Target::Giant => estimate_giant_threshold(
                        &model,
                        config.n,
                        config.alpha,
                        config.trials,
                        config.base_seed,
                    ),
                    _ => estimate_connectivity_threshold(
                        &model,
                        config.n,
                        config.trials,
                        config.base_seed,
                    ),
                });
            match cell {
                Ok(row) => result.rows.push(row),
                Err(e) => result.failures.push(CellFailure {
                    model: kind,
                    k,
                    error: e.to_string(),
                }),
            }
        }
    }
    Ok(result)
}

fn trajectory_cell(config: &SweepConfig, k: f64) -> Result<ComparisonReport> {
    let bound = safe_comparison_bound(k)?;
    let x_c = crate::ode::find_singularity(k, 1e-6)?.x_c;
    let grid: Vec<f64> = TRAJECTORY_GRID_FRACTIONS
        .iter()
        .map(|f| (f * x_c).min(bound))
        .collect();
    compare_trajectory(k, config.n, &grid, config.base_seed)
}
