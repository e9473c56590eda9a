//! Chi-square checks of the samplers against brute-force weight enumeration.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::ode::{closed_form_k0, closed_form_k1, find_singularity, integrate_at, OdeParams};
use crate::process::{ModelKind, ModelSpec, ProcessState, Sampling};

pub const MIN_DRAWS: u64 = 1_000;
pub const P_VALUE_THRESHOLD: f64 = 0.001;
/// Sup-norm bound for the numerical solution against the closed forms.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-6;

/// A small explicit graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixture {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Fixture {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        Fixture {
            n,
            edges: edges.to_vec(),
        }
    }

    /// The fixtures the `selftest` command runs.
    pub fn standard() -> Vec<Fixture> {
        vec![
            Fixture::new(3, &[]),
            Fixture::new(4, &[(0, 1)]),
            Fixture::new(6, &[(0, 1), (1, 2), (2, 3)]),
        ]
    }
}

/// Exact next-edge distribution: every missing pair `(u, v)`, `u < v`, with
/// its probability. Isolation is read off vertex degrees.
pub fn brute_force_distribution(
    model: &ModelSpec,
    fixture: &Fixture,
) -> Vec<((usize, usize), f64)> {
    let n = fixture.n;
    let mut degree = vec![0usize; n];
    let mut present = vec![vec![false; n]; n];
    for &(u, v) in &fixture.edges {
        degree[u] += 1;
        degree[v] += 1;
        present[u][v] = true;
        present[v][u] = true;
    }
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if present[u][v] {
                continue;
            }
            let both_isolated = degree[u] == 0 && degree[v] == 0;
            let neither_isolated = degree[u] > 0 && degree[v] > 0;
            let weight = match model.kind {
                ModelKind::Or if both_isolated => 1.0,
                ModelKind::Or => model.k,
                ModelKind::And if neither_isolated => model.k,
                ModelKind::And => 1.0,
            };
            pairs.push(((u, v), weight));
        }
    }
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    if total > 0.0 {
        pairs.iter_mut().for_each(|p| p.1 /= total);
    } else {
        let uniform = 1.0 / pairs.len() as f64;
        pairs.iter_mut().for_each(|p| p.1 = uniform);
    }
    pairs
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub model: ModelKind,
    pub k: f64,
    pub sampling: Sampling,
    pub n: usize,
    pub draws: u64,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub passed: bool,
}

/// Pearson chi-square statistic and upper-tail p-value. Observations in a
/// zero-probability cell give an infinite statistic and `p = 0`.
pub fn chi_square(observed: &[u64], probs: &[f64]) -> (f64, usize, f64) {
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(probs) {
        if p <= 0.0 {
            if o > 0 {
                return (f64::INFINITY, 0, 0.0);
            }
            continue;
        }
        cells += 1;
        let e = p * total as f64;
        stat += (o as f64 - e).powi(2) / e;
    }
    let dof = cells.saturating_sub(1);
    if dof == 0 {
        return (stat, 0, 1.0);
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    (stat, dof, dist.sf(stat))
}

/// Draws `draws` next edges from the fixture state (without adding them) and
/// tests the counts against [`brute_force_distribution`]. In ordered-pair
/// mode skipped draws are discarded, so the test is on the distribution
/// conditioned on a new edge.
pub fn sampler_selftest(
    model: &ModelSpec,
    fixture: &Fixture,
    draws: u64,
    seed: u64,
) -> Result<SelftestReport> {
    if draws < MIN_DRAWS {
        return Err(Error::InvalidParameter(format!(
            "at least {MIN_DRAWS} draws required, got {draws}"
        )));
    }
    if fixture.n > 8 {
        return Err(Error::InvalidParameter(format!(
            "fixtures are limited to 8 vertices, got {}",
            fixture.n
        )));
    }
    let expected = brute_force_distribution(model, fixture);
    if expected.is_empty() {
        return Err(Error::GraphComplete);
    }
    let mut state = ProcessState::with_edges(*model, fixture.n, &fixture.edges, seed)?;
    let index = |u: usize, v: usize| {
        let key = (u.min(v), u.max(v));
        expected
            .iter()
            .position(|&(p, _)| p == key)
            .expect("sampler returned a present edge or a loop")
    };

    let mut observed = vec![0u64; expected.len()];
    let mut accepted = 0;
    while accepted < draws {
        let (u, v) = match model.sampling {
            Sampling::Exact => state.sample_edge_exact()?,
            Sampling::OrderedPairApprox => {
                let (u, v) = state.draw_ordered_pair()?;
                if u == v || state.has_edge(u as usize, v as usize) {
                    continue;
                }
                (u as usize, v as usize)
            }
        };
        observed[index(u, v)] += 1;
        accepted += 1;
    }

    let probs: Vec<f64> = expected.iter().map(|p| p.1).collect();
    let (statistic, dof, p_value) = chi_square(&observed, &probs);
    Ok(SelftestReport {
        model: model.kind,
        k: model.k,
        sampling: model.sampling,
        n: fixture.n,
        draws,
        statistic,
        dof,
        p_value,
        passed: p_value > P_VALUE_THRESHOLD,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormCheck {
    pub k: f64,
    pub t_end: f64,
    /// Largest of `|y - y*|`, `|w - w*|` and `|z - z*| / z*` over the grid.
    pub max_deviation: f64,
    pub passed: bool,
}

/// Integrates `K = 1` and `K = 0` up to `0.05` short of the singularity and
/// compares against the closed-form solutions on a grid of 1001 points.
pub fn closed_form_selftest() -> Result<Vec<ClosedFormCheck>> {
    let mut checks = Vec::new();
    for k in [1.0, 0.0] {
        let t_end = find_singularity(k, 1e-12)?.x_c - 0.05;
        let grid: Vec<f64> = (0..=1000).map(|i| t_end * i as f64 / 1000.0).collect();
        let traj = integrate_at(&OdeParams::new(k, t_end), &grid)?;
        let mut max_deviation: f64 = 0.0;
        for s in &traj.samples {
            let exact = if k == 1.0 {
                closed_form_k1(s.t)?
            } else {
                closed_form_k0(s.t)?
            };
            max_deviation = max_deviation
                .max((s.y - exact.y).abs())
                .max((s.w - exact.w).abs())
                .max((s.z - exact.z).abs() / exact.z);
        }
        checks.push(ClosedFormCheck {
            k,
            t_end,
            max_deviation,
            passed: max_deviation <= CLOSED_FORM_TOLERANCE,
        });
    }
    Ok(checks)
}
