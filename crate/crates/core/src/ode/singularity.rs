use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use super::closed_form::x_c_k0;
use super::dopri::{bisect_root, Dopri5};
use super::rhs::rhs_reciprocal;
use crate::error::{Error, Result};

/// No sign change of `1/z` before this time means no singularity.
pub const SEARCH_HORIZON: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingularityMethod {
    ReciprocalBisection,
    ClosedFormK0,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityResult {
    /// `f64::INFINITY` when `z` stays finite up to [`SEARCH_HORIZON`].
    pub x_c: f64,
    /// Width of the final bracket.
    pub achieved_tol: f64,
    pub method: SingularityMethod,
}

impl SingularityResult {
    pub fn is_finite(&self) -> bool {
        self.x_c.is_finite()
    }
}

pub fn find_singularity(k: f64, tol: f64) -> Result<SingularityResult> {
    find_singularity_with(k, tol, 1e-9, 1e-9)
}

/// Blow-up time of `z`, located as the zero of `v = 1/z` on the dense output
/// of the `(y, v)` system.
pub fn find_singularity_with(
    k: f64,
    tol: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<SingularityResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if !k.is_finite() || k < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "K must be finite and non-negative, got {k}"
        )));
    }
    if k == 0.0 {
        return Ok(SingularityResult {
            x_c: x_c_k0(),
            achieved_tol: 0.0,
            method: SingularityMethod::ClosedFormK0,
        });
    }

    let solver = Dopri5 {
        rel_tol,
        abs_tol,
        max_step: f64::INFINITY,
    };
    let mut bracket = None;
    solver.integrate(
        |t, s: &[f64; 2]| {
            let (dy, dv) = rhs_reciprocal(k, t, s[0].clamp(0.0, 1.0), s[1])?;
            Ok([dy, dv])
        },
        0.0,
        [1.0, 1.0],
        SEARCH_HORIZON,
        |step| {
            if step.y1[1] <= 0.0 {
                bracket = Some(bisect_root(step, 1, tol));
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        },
    )?;

    Ok(match bracket {
        Some((lo, hi)) => SingularityResult {
            x_c: 0.5 * (lo + hi),
            achieved_tol: hi - lo,
            method: SingularityMethod::ReciprocalBisection,
        },
        None => SingularityResult {
            x_c: f64::INFINITY,
            achieved_tol: 0.0,
            method: SingularityMethod::ReciprocalBisection,
        },
    })
}
