//! Right-hand sides of the mean-field system for the `And(K)` process.
//!
//! `y` tracks the fraction of isolated vertices, `z` the susceptibility and
//! `w` the fraction of vertices in isolated edges. `v = 1/z` turns the blow-up
//! of `z` into a regular zero crossing.

use crate::error::{Error, Result};

/// Derivatives of `(y, z, w)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derivatives {
    pub y: f64,
    pub z: f64,
    pub w: f64,
}

#[inline]
fn denominator(k: f64, y: f64) -> f64 {
    1.0 + (k - 1.0) * (1.0 - y) * (1.0 - y)
}

fn checked_denominator(k: f64, y: f64) -> Result<f64> {
    let d = denominator(k, y);
    if k == 0.0 && y <= 0.0 || d <= 0.0 || !d.is_finite() {
        return Err(Error::SingularDenominator { k, y });
    }
    Ok(d)
}

pub fn rhs(k: f64, _t: f64, y: f64, z: f64, w: f64) -> Result<Derivatives> {
    let d = checked_denominator(k, y)?;
    Ok(Derivatives {
        y: -y / d,
        z: (z * z + (k - 1.0) * (z - y) * (z - y)) / d,
        w: (y * y - 2.0 * w * y - 2.0 * k * w * (1.0 - y)) / d,
    })
}

/// Derivatives of `(y, v)` with `v = 1/z`.
pub fn rhs_reciprocal(k: f64, _t: f64, y: f64, v: f64) -> Result<(f64, f64)> {
    let d = checked_denominator(k, y)?;
    let q = 1.0 - v * y;
    Ok((-y / d, -(1.0 + (k - 1.0) * q * q) / d))
}

/// The `K = 0` system with the common factor `y` of numerators and
/// denominator cancelled, over the state `(y, z, w, v)`. It agrees with the
/// general form wherever `y > 0` and stays regular as `y` reaches zero.
pub(crate) fn rhs_k0_reduced(s: &[f64; 4]) -> [f64; 4] {
    let [y, z, w, v] = *s;
    let r = 2.0 - y;
    [
        -1.0 / r,
        (2.0 * z - y) / r,
        (y - 2.0 * w) / r,
        -v * (2.0 - v * y) / r,
    ]
}

/// Dynamics once no isolated vertex is left (`y = 0`): the process is
/// uniform over missing edges for every `K`, so `z' = z^2`, `w' = -2w` and
/// `v' = -1`.
pub(crate) fn rhs_exhausted(s: &[f64; 4]) -> [f64; 4] {
    let [_, z, w, _] = *s;
    [0.0, z * z, -2.0 * w, -1.0]
}
