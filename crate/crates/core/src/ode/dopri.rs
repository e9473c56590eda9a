//! Dormand-Prince 5(4) with step-size control and the fourth-order dense output.

use std::ops::ControlFlow;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const MAX_STEPS: usize = 1_000_000;

/// An accepted step together with its continuous extension.
#[derive(Clone, Debug)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    coeffs: [[f64; N]; 4],
}

impl<const N: usize> DenseStep<N> {
    /// Interpolated state at `t` in `[t0, t1]`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let theta = if h > 0.0 { (t - self.t0) / h } else { 1.0 };
        let theta1 = 1.0 - theta;
        let [r2, r3, r4, r5] = &self.coeffs;
        std::array::from_fn(|i| {
            self.y0[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])))
        })
    }

    pub fn eval_component(&self, t: f64, i: usize) -> f64 {
        self.eval(t)[i]
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Dopri5 {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(a, k)| a * k[i]).sum::<f64>())
}

impl Dopri5 {
    fn error_norm<const N: usize>(&self, y0: &[f64; N], y1: &[f64; N], err: &[f64; N]) -> f64 {
        let sum: f64 = (0..N)
            .map(|i| {
                let scale = self.abs_tol + self.rel_tol * y0[i].abs().max(y1[i].abs());
                (err[i] / scale).powi(2)
            })
            .sum();
        (sum / N as f64).sqrt()
    }

    fn initial_step<const N: usize>(&self, y0: &[f64; N], f0: &[f64; N], span: f64) -> f64 {
        let d0 = self.error_norm(y0, y0, y0);
        let d1 = self.error_norm(y0, y0, f0);
        let h = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h.min(self.max_step).min(span).max(1e-12)
    }

    /// Integrates `y' = f(t, y)` from `t0` towards `t_end`, handing every
    /// accepted step to `observer`. Stops early when the observer breaks.
    /// Returns the last accepted time and state.
    pub fn integrate<const N: usize, F, O>(
        &self,
        mut f: F,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        mut observer: O,
    ) -> Result<(f64, [f64; N])>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
        O: FnMut(&DenseStep<N>) -> ControlFlow<()>,
    {
        let mut t = t0;
        let mut y = y0;
        if t_end <= t0 {
            return Ok((t, y));
        }
        let mut k1 = f(t, &y)?;
        let mut h = self.initial_step(&y, &k1, t_end - t0);
        let mut steps = 0;

        while t < t_end {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::StepSizeUnderflow { t });
            }
            let last = t + h >= t_end;
            if last {
                h = t_end - t;
            }
            if h <= f64::EPSILON * t.abs().max(1.0) * 4.0 {
                return Err(Error::StepSizeUnderflow { t });
            }

            let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]))?;
            let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = f(
                t + C4 * h,
                &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            )?;
            let k5 = f(
                t + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = f(
                t + h,
                &axpy(
                    &y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            )?;
            let y_new = axpy(
                &y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let t_new = if last { t_end } else { t + h };
            let k7 = f(t_new, &y_new)?;
            let err: [f64; N] = std::array::from_fn(|i| {
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            });
            let err_norm = self.error_norm(&y, &y_new, &err);

            if !err_norm.is_finite() || err_norm > 1.0 {
                let fac = if err_norm.is_finite() {
                    (SAFETY * err_norm.powf(-0.2)).max(FAC_MIN)
                } else {
                    FAC_MIN
                };
                h *= fac;
                continue;
            }

            let diff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - diff[i]);
            let step = DenseStep {
                t0: t,
                t1: t_new,
                y0: y,
                y1: y_new,
                coeffs: [
                    diff,
                    bspl,
                    std::array::from_fn(|i| diff[i] - h * k7[i] - bspl[i]),
                    std::array::from_fn(|i| {
                        h * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i])
                    }),
                ],
            };
            t = t_new;
            y = y_new;
            k1 = k7;
            if observer(&step).is_break() {
                break;
            }
            let fac = if err_norm == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err_norm.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
            };
            h = (h * fac).min(self.max_step);
        }
        Ok((t, y))
    }
}

/// Bisection for a sign change of component `i` of the dense output inside
/// `step`, assuming `g(t0) > 0 >= g(t1)` for `g = sign * y_i`. Returns the
/// final bracket.
pub fn bisect_root<const N: usize>(step: &DenseStep<N>, i: usize, tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (step.t0, step.t1);
    for _ in 0..200 {
        if hi - lo < tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if step.eval_component(mid, i) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}
