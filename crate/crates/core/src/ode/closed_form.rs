//! Exact solutions for `K = 0` and `K = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time at which the isolated vertices of the `K = 0` process run out.
pub const K0_EXHAUSTION_TIME: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub y: f64,
    pub z: f64,
    pub w: f64,
}

/// Singularity of the `K = 0` susceptibility, `3/2 + 4/(3e^2 - 1)`.
pub fn x_c_k0() -> f64 {
    let e2 = 2f64.exp();
    1.5 + 4.0 / (3.0 * e2 - 1.0)
}

/// The `K = 0` solution. Up to `t = 3/2` these are the explicit solutions of
/// the reduced equations; afterwards `y = 0`, `z = 1/(x_c - t)` and `w`
/// decays as `e^{-2(t - 3/2)}`, the uniform-process dynamics.
pub fn closed_form_k0(t: f64) -> Result<ClosedForm> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("t must be >= 0, got {t}")));
    }
    if t <= K0_EXHAUSTION_TIME {
        let s = (1.0 + 2.0 * t).sqrt();
        return Ok(ClosedForm {
            y: 2.0 - s,
            z: 0.75 * (2.0 * (s - 1.0)).exp() - 0.5 * s + 0.75,
            w: 1.25 - 0.75 * (2.0 * (1.0 - s)).exp() - 0.5 * s,
        });
    }
    let x_c = x_c_k0();
    if t >= x_c {
        return Err(Error::BeyondSingularity { t, x_c });
    }
    let w_exhausted = 0.25 - 0.75 * (-2f64).exp();
    Ok(ClosedForm {
        y: 0.0,
        z: 1.0 / (x_c - t),
        w: w_exhausted * (-2.0 * (t - K0_EXHAUSTION_TIME)).exp(),
    })
}

/// First time at which the isolated fraction `y` falls to `level`, from
/// integrating `dt = -(1 + (K-1)(1-y)^2) dy / y` in closed form.
pub fn isolated_hitting_time(k: f64, level: f64) -> Result<f64> {
    if !(level > 0.0 && level <= 1.0) && !(k == 0.0 && level == 0.0) {
        return Err(Error::InvalidParameter(format!(
            "level must lie in (0, 1], got {level}"
        )));
    }
    if !k.is_finite() || k < 0.0 {
        return Err(Error::InvalidParameter(format!("K must be >= 0, got {k}")));
    }
    let log_term = if k == 0.0 { 0.0 } else { -k * level.ln() };
    Ok(log_term + (k - 1.0) * (2.0 * level - 0.5 * level * level - 1.5))
}

/// The `K = 1` (uniform process) solution, valid for `t < 1`.
pub fn closed_form_k1(t: f64) -> Result<ClosedForm> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("t must be >= 0, got {t}")));
    }
    if t >= 1.0 {
        return Err(Error::BeyondSingularity { t, x_c: 1.0 });
    }
    Ok(ClosedForm {
        y: (-t).exp(),
        z: 1.0 / (1.0 - t),
        w: t * (-2.0 * t).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k0_at_exhaustion() {
        let c = closed_form_k0(1.5).unwrap();
        assert!(c.y.abs() < 1e-15);
        let e2 = 2f64.exp();
        assert!((c.z - (0.75 * e2 - 0.25)).abs() < 1e-12);
        assert!((c.z - 5.29180).abs() < 1e-5);
        assert!((c.w - 0.1485).abs() < 5e-5);
    }

    #[test]
    fn k0_initial_conditions() {
        let c = closed_form_k0(0.0).unwrap();
        assert_eq!((c.y, c.z, c.w), (1.0, 1.0, 0.0));
    }

    #[test]
    fn k0_continuous_at_exhaustion() {
        let a = closed_form_k0(1.5).unwrap();
        let b = closed_form_k0(1.5 + 1e-12).unwrap();
        assert!((a.z - b.z).abs() < 1e-9);
        assert!((a.w - b.w).abs() < 1e-9);
    }

    #[test]
    fn k0_threshold_value() {
        assert!((x_c_k0() - 1.68897).abs() < 1e-5);
        assert!(matches!(
            closed_form_k0(1.7),
            Err(Error::BeyondSingularity { .. })
        ));
        assert!(closed_form_k0(-0.1).is_err());
    }

    #[test]
    fn hitting_time_matches_solutions() {
        assert!((isolated_hitting_time(0.0, 0.0).unwrap() - 1.5).abs() < 1e-15);
        let t = isolated_hitting_time(0.0, 0.02).unwrap();
        assert!((closed_form_k0(t).unwrap().y - 0.02).abs() < 1e-12);
        let t = isolated_hitting_time(1.0, 0.3).unwrap();
        assert!((t + 0.3f64.ln()).abs() < 1e-12);
        assert_eq!(isolated_hitting_time(3.0, 1.0).unwrap(), 0.0);
        assert!(isolated_hitting_time(1.0, 0.0).is_err());
    }

    #[test]
    fn k1_values() {
        let c = closed_form_k1(0.5).unwrap();
        assert!((c.y - 0.606531).abs() < 1e-6);
        assert!((c.w - 0.183940).abs() < 1e-6);
        assert!(closed_form_k1(1.0).is_err());
    }
}
