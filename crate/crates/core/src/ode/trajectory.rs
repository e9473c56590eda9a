use std::cell::Cell;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use super::dopri::{bisect_root, DenseStep, Dopri5};
use super::rhs::{rhs, rhs_exhausted, rhs_k0_reduced, rhs_reciprocal};
use crate::error::{Error, Result};

const Y: usize = 0;
const Z: usize = 1;
const W: usize = 2;
const V: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeParams {
    pub k: f64,
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// `z` (and `v = 1/z` past the singularity) stop being integrated once
    /// their magnitude exceeds this value.
    pub z_cap: f64,
}

impl OdeParams {
    pub fn new(k: f64, t_end: f64) -> Self {
        OdeParams {
            k,
            t_end,
            rel_tol: 1e-9,
            abs_tol: 1e-9,
            max_step: 0.01,
            z_cap: 1e6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !self.k.is_finite() || self.k < 0.0 {
            return bad(format!("K must be finite and non-negative, got {}", self.k));
        }
        if !self.t_end.is_finite() || self.t_end <= 0.0 {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.max_step.is_nan() || self.max_step <= 0.0 {
            return bad(format!("max_step must be positive, got {}", self.max_step));
        }
        if self.z_cap.is_nan() || self.z_cap <= 1.0 {
            return bad(format!("z cap must exceed 1, got {}", self.z_cap));
        }
        Ok(())
    }

    pub(crate) fn solver(&self) -> Dopri5 {
        Dopri5 {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub y: f64,
    /// Infinite once `z` has passed the cap.
    pub z: f64,
    pub w: f64,
    /// Negative past the singularity, `-inf` once below `-z_cap`.
    pub v: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub k: f64,
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&TrajectorySample> {
        self.samples.last()
    }
}

#[derive(Clone, Debug)]
struct Segment {
    step: DenseStep<4>,
    /// End of the valid range, before `step.t1` when an event cut the step.
    t_hi: f64,
    z_frozen: bool,
    v_frozen: bool,
}

impl Segment {
    fn sample(&self, t: f64) -> TrajectorySample {
        let s = if t == self.step.t1 {
            self.step.y1
        } else if t == self.step.t0 {
            self.step.y0
        } else {
            self.step.eval(t)
        };
        TrajectorySample {
            t,
            y: s[Y].clamp(0.0, 1.0),
            z: if self.z_frozen { f64::INFINITY } else { s[Z] },
            w: s[W],
            v: if self.v_frozen {
                f64::NEG_INFINITY
            } else {
                s[V]
            },
        }
    }
}

/// Integrates one phase, freezing `z` past the cap. `deriv` receives the
/// state with `y` clamped to `[0, 1]`. `event` may cut the phase short by
/// returning the time at which it ends within a step.
fn run_phase<F, E>(
    params: &OdeParams,
    t0: f64,
    s0: [f64; 4],
    deriv: F,
    mut event: E,
    segments: &mut Vec<Segment>,
) -> Result<Option<(f64, [f64; 4])>>
where
    F: Fn(f64, &[f64; 4]) -> Result<[f64; 4]>,
    E: FnMut(&DenseStep<4>) -> Option<f64>,
{
    let z_frozen = Cell::new(s0[Z] > params.z_cap);
    let v_frozen = Cell::new(s0[V] < -params.z_cap);
    let mut cut = None;
    params.solver().integrate(
        |t, s| {
            let mut s = *s;
            s[Y] = s[Y].clamp(0.0, 1.0);
            let mut d = deriv(t, &s)?;
            if z_frozen.get() {
                d[Z] = 0.0;
            }
            if v_frozen.get() {
                d[V] = 0.0;
            }
            Ok(d)
        },
        t0,
        s0,
        params.t_end,
        |step| {
            let (zf, vf) = (z_frozen.get(), v_frozen.get());
            if let Some(t_hit) = event(step) {
                segments.push(Segment {
                    step: step.clone(),
                    t_hi: t_hit,
                    z_frozen: zf,
                    v_frozen: vf,
                });
                cut = Some((t_hit, step.eval(t_hit)));
                return ControlFlow::Break(());
            }
            segments.push(Segment {
                step: step.clone(),
                t_hi: step.t1,
                z_frozen: zf,
                v_frozen: vf,
            });
            if step.y1[Z] > params.z_cap {
                z_frozen.set(true);
            }
            if step.y1[V] < -params.z_cap {
                v_frozen.set(true);
            }
            ControlFlow::Continue(())
        },
    )?;
    Ok(cut)
}

fn solve_segments(params: &OdeParams) -> Result<Vec<Segment>> {
    params.validate()?;
    let k = params.k;
    let s0 = [1.0, 1.0, 0.0, 1.0];
    let mut segments = Vec::new();
    if k > 0.0 {
        run_phase(
            params,
            0.0,
            s0,
            |t, s| {
                let d = rhs(k, t, s[Y], s[Z], s[W])?;
                let (_, dv) = rhs_reciprocal(k, t, s[Y], s[V])?;
                Ok([d.y, d.z, d.w, dv])
            },
            |_| None,
            &mut segments,
        )?;
        return Ok(segments);
    }

    // K = 0: the isolated vertices run out at a finite time, after which the
    // process is uniform.
    let exhausted = run_phase(
        params,
        0.0,
        s0,
        |_, s| Ok(rhs_k0_reduced(s)),
        |step| {
            (step.y1[Y] <= 0.0).then(|| {
                let (_, hi) = bisect_root(step, Y, 1e-15);
                hi
            })
        },
        &mut segments,
    )?;
    if let Some((tau, mut s)) = exhausted {
        s[Y] = 0.0;
        if tau < params.t_end {
            run_phase(
                params,
                tau,
                s,
                |_, s| Ok(rhs_exhausted(s)),
                |_| None,
                &mut segments,
            )?;
        }
    }
    Ok(segments)
}

/// Adaptive solution from `t = 0` to `params.t_end`, sampled at every
/// accepted step.
pub fn integrate(params: &OdeParams) -> Result<Trajectory> {
    let segments = solve_segments(params)?;
    let mut samples = vec![TrajectorySample {
        t: 0.0,
        y: 1.0,
        z: 1.0,
        w: 0.0,
        v: 1.0,
    }];
    for seg in &segments {
        if seg.t_hi > samples.last().map_or(0.0, |s| s.t) {
            samples.push(seg.sample(seg.t_hi));
        }
    }
    Ok(Trajectory {
        k: params.k,
        samples,
    })
}

/// Solution at the given times (each within `[0, params.t_end]`), read off
/// the dense output.
pub fn integrate_at(params: &OdeParams, times: &[f64]) -> Result<Trajectory> {
    for &t in times {
        if !(0.0..=params.t_end).contains(&t) {
            return Err(Error::InvalidParameter(format!(
                "sample time {t} outside [0, {}]",
                params.t_end
            )));
        }
    }
    let segments = solve_segments(params)?;
    let samples = times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return TrajectorySample {
                    t,
                    y: 1.0,
                    z: 1.0,
                    w: 0.0,
                    v: 1.0,
                };
            }
            let idx = segments.partition_point(|s| s.t_hi < t);
            let seg = segments
                .get(idx)
                .or(segments.last())
                .expect("non-empty span");
            seg.sample(t)
        })
        .collect();
    Ok(Trajectory {
        k: params.k,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k1_matches_closed_form() {
        let traj = integrate_at(&OdeParams::new(1.0, 0.95), &[0.5, 0.9]).unwrap();
        let s = traj.samples[0];
        assert!((s.y - (-0.5f64).exp()).abs() < 1e-6);
        assert!((s.w - 0.5 * (-1f64).exp()).abs() < 1e-6);
        assert!((traj.samples[1].z - 10.0).abs() < 1e-3);
    }

    #[test]
    fn invariants_along_trajectories() {
        for &k in &[0.0, 0.25, 1.0, 2.0, 8.0] {
            let traj = integrate(&OdeParams::new(k, 3.0)).unwrap();
            let first = traj.samples[0];
            assert_eq!((first.y, first.z, first.w, first.v), (1.0, 1.0, 0.0, 1.0));
            for pair in traj.samples.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                assert!(b.t > a.t);
                assert!(b.y <= a.y + 1e-12, "K={k} y increased at {}", b.t);
                if a.z.is_finite() {
                    assert!(b.z >= a.z * (1.0 - 1e-9), "K={k} z decreased at {}", b.t);
                }
                assert!(b.v <= a.v + 1e-12 || a.v.is_infinite());
                assert!((0.0..=1.0).contains(&b.y));
            }
        }
    }

    #[test]
    fn z_dominates_k1_solution_for_k_above_one() {
        let times: Vec<f64> = (1..40).map(|i| i as f64 * 0.02).collect();
        let traj = integrate_at(&OdeParams::new(2.0, 0.8), &times).unwrap();
        for s in &traj.samples {
            if s.z.is_finite() {
                assert!(s.z >= 1.0 / (1.0 - s.t) - 1e-9, "t={}", s.t);
            }
        }
    }

    #[test]
    fn z_frozen_past_cap() {
        let traj = integrate(&OdeParams::new(1.0, 1.5)).unwrap();
        let last = traj.last().unwrap();
        assert_eq!(last.t, 1.5);
        assert!(last.z.is_infinite());
        assert!((last.v - (1.0 - 1.5)).abs() < 1e-8);
        assert!((last.y - (-1.5f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn invalid_params() {
        let mut p = OdeParams::new(1.0, 1.0);
        p.rel_tol = 0.0;
        assert!(integrate(&p).is_err());
        assert!(integrate(&OdeParams::new(-1.0, 1.0)).is_err());
        assert!(integrate(&OdeParams::new(1.0, 0.0)).is_err());
        assert!(integrate_at(&OdeParams::new(1.0, 1.0), &[1.5]).is_err());
    }
}
