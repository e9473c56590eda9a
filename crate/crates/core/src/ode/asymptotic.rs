//! Leading-order behaviour for large `K`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use crate::error::{Error, Result};
use crate::process::ModelKind;

/// `(pi / 2 sqrt 2)(1 + pi^2/24)`, the constant of the `And` threshold.
pub fn and_constant() -> f64 {
    PI / (2.0 * SQRT_2) * (1.0 + PI * PI / 24.0)
}

/// `4 / sqrt 3`, the constant of the `Or` threshold.
pub fn or_constant() -> f64 {
    4.0 / 3f64.sqrt()
}

/// `64 sqrt 6 / (pi (24 + pi^2))`, which equals `or_constant() / and_constant()`.
pub fn constant_ratio() -> f64 {
    64.0 * 6f64.sqrt() / (PI * (24.0 + PI * PI))
}

fn require_positive(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "K must be positive, got {k}"
        )))
    }
}

/// Giant threshold to leading order, `constant / sqrt K`.
pub fn asymptotic_tg(model: ModelKind, k: f64) -> Result<f64> {
    require_positive(k)?;
    let c = match model {
        ModelKind::And => and_constant(),
        ModelKind::Or => or_constant(),
    };
    Ok(c / k.sqrt())
}

/// Real root of `(K/3) u^3 + u = t`.
///
/// Cardano's formula written as `u = A + C` with `A^3 + C^3 = t'` and
/// `AC < 0`, rearranged to `u = t' / (A^2 - AC + C^2)` so that nothing cancels
/// for small `t`.
pub fn asymptotic_u(t: f64, k: f64) -> Result<f64> {
    require_positive(k)?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("t must be >= 0, got {t}")));
    }
    // u^3 + p u = q
    let p = 3.0 / k;
    let q = 3.0 * t / k;
    let half = 0.5 * q;
    let disc = (half * half + (p / 3.0).powi(3)).sqrt();
    let a = (half + disc).cbrt();
    if a == 0.0 {
        return Ok(0.0);
    }
    let c = -p / (3.0 * a);
    Ok(q / (a * a - a * c + c * c))
}

/// `1 + sqrt(2/K) tan(sqrt(2K) u) - u`, with `u` from [`asymptotic_u`].
pub fn asymptotic_z(t: f64, k: f64) -> Result<f64> {
    let u = asymptotic_u(t, k)?;
    let arg = (2.0 * k).sqrt() * u;
    if arg >= FRAC_PI_2 {
        return Err(Error::BeyondSingularity {
            t,
            x_c: asymptotic_tg(ModelKind::And, k)?,
        });
    }
    Ok(1.0 + (2.0 / k).sqrt() * arg.tan() - u)
}
