use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{find_singularity, integrate_at, isolated_hitting_time, OdeParams};
use crate::process::{ModelKind, ModelSpec, ProcessState, StopCondition};

/// Comparisons stop this far (absolute, capped at a fifth of `x_c`) short of
/// the singularity.
pub const SINGULARITY_MARGIN: f64 = 0.2;
/// ...and before the isolated fraction drops below this level.
pub const ISOLATED_FLOOR: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonPoint {
    pub t: f64,
    pub m: u64,
    pub isolated_sim: f64,
    pub isolated_edges_sim: f64,
    pub susceptibility_sim: f64,
    pub y: f64,
    pub w: f64,
    pub z: f64,
}

impl ComparisonPoint {
    pub fn isolated_dev(&self) -> f64 {
        (self.isolated_sim - self.y).abs()
    }

    pub fn isolated_edges_dev(&self) -> f64 {
        (self.isolated_edges_sim - self.w).abs()
    }

    pub fn susceptibility_dev(&self) -> f64 {
        (self.susceptibility_sim - self.z).abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub k: f64,
    pub n: usize,
    pub seed: u64,
    pub points: Vec<ComparisonPoint>,
    pub max_isolated_dev: f64,
    pub max_isolated_edges_dev: f64,
    pub max_susceptibility_dev: f64,
}

/// Largest admissible grid time for `K`: short of the singularity by
/// [`SINGULARITY_MARGIN`] and no later than the time `y` reaches
/// [`ISOLATED_FLOOR`].
pub fn safe_comparison_bound(k: f64) -> Result<f64> {
    let x_c = find_singularity(k, 1e-9)?.x_c;
    let before_blow_up = x_c - SINGULARITY_MARGIN.min(0.2 * x_c);
    let floor = isolated_hitting_time(k, ISOLATED_FLOOR)?;
    Ok(before_blow_up.min(floor))
}

/// One `And(K)` run on `n` vertices, observed at each time of `grid` (giant
/// timescale, rounded to the nearest edge count) next to the ODE solution.
pub fn compare_trajectory(k: f64, n: usize, grid: &[f64], seed: u64) -> Result<ComparisonReport> {
    let model = ModelSpec::exact(ModelKind::And, k)?;
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "n must be at least 4, got {n}"
        )));
    }
    let bound = safe_comparison_bound(k)?;
    for &t in grid {
        if !(0.0..=bound).contains(&t) {
            return Err(Error::GridOutOfRange { t, bound });
        }
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(
            "grid must be non-decreasing".into(),
        ));
    }

    let t_end = grid.last().copied().unwrap_or(0.0).max(1e-3);
    let ode = integrate_at(&OdeParams::new(k, t_end), grid)?;
    let mut state = ProcessState::new(model, n, seed)?;
    let mut points = Vec::with_capacity(grid.len());
    for (&t, sol) in grid.iter().zip(&ode.samples) {
        let m = (t * n as f64 / 2.0).round() as u64;
        let snap = state.run_until(StopCondition::EdgeCount(m))?;
        points.push(ComparisonPoint {
            t,
            m,
            isolated_sim: snap.isolated,
            isolated_edges_sim: snap.isolated_edges,
            susceptibility_sim: snap.susceptibility,
            y: sol.y,
            w: sol.w,
            z: sol.z,
        });
    }
    let max_of = |f: fn(&ComparisonPoint) -> f64| points.iter().map(f).fold(0.0, f64::max);
    Ok(ComparisonReport {
        k,
        n,
        seed,
        max_isolated_dev: max_of(ComparisonPoint::isolated_dev),
        max_isolated_edges_dev: max_of(ComparisonPoint::isolated_edges_dev),
        max_susceptibility_dev: max_of(ComparisonPoint::susceptibility_dev),
        points,
    })
}
