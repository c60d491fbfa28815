//! Adaptive Dormand-Prince 5(4) integrator shared by the profile solver and
//! the Evans shooting.

use crate::error::{EvansError, Result};

/// Minimal vector-space interface the integrator needs from a state.
pub trait OdeState: Clone {
    /// `self += a * x`.
    fn axpy(&mut self, a: f64, x: &Self);

    /// Weighted RMS of `err` against the scale `atol + rtol * max(|y0|, |y1|)`,
    /// taken componentwise.
    fn error_norm(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64;
}

impl OdeState for f64 {
    fn axpy(&mut self, a: f64, x: &Self) {
        *self += a * x;
    }

    fn error_norm(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
        err.abs() / (atol + rtol * y0.abs().max(y1.abs()))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub atol: f64,
    pub rtol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 {
            atol: 1e-6,
            rtol: 1e-8,
            h_init: None,
            h_max: f64::INFINITY,
            h_min: 1e-12,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evals: usize,
}

// Dormand-Prince tableau.
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

impl Dopri5 {
    pub fn with_tolerances(atol: f64, rtol: f64) -> Self {
        Dopri5 {
            atol,
            rtol,
            ..Default::default()
        }
    }

    /// Integrates `y' = f(x, y)` from `x0` to `x1` (either direction).
    ///
    /// After every accepted step `observer(x, &mut y, &dy)` is called; it may
    /// modify `y` in place and must return `true` if it did, so that the
    /// first-same-as-last derivative is recomputed.
    pub fn integrate<S, F, O>(&self, mut f: F, x0: f64, y0: S, x1: f64, mut observer: O) -> Result<(S, OdeStats)>
    where
        S: OdeState,
        F: FnMut(f64, &S) -> S,
        O: FnMut(f64, &mut S, &S) -> bool,
    {
        let mut stats = OdeStats::default();
        let mut y = y0;
        if x1 == x0 {
            return Ok((y, stats));
        }
        let dir = (x1 - x0).signum();
        let span = (x1 - x0).abs();
        let mut x = x0;
        let mut k1 = f(x, &y);
        stats.evals += 1;
        let mut h = self.h_init.unwrap_or((span / 100.0).min(0.1)).min(self.h_max).min(span);

        while (x1 - x) * dir > 0.0 {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(EvansError::IntegrationFailure {
                    x,
                    reason: format!("step budget {} exhausted", self.max_steps),
                });
            }
            let remaining = (x1 - x).abs();
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let hs = h * dir;

            let stage = |base: &S, terms: &[(f64, &S)]| {
                let mut s = base.clone();
                for (c, k) in terms {
                    s.axpy(hs * c, k);
                }
                s
            };
            let k2 = f(x + C2 * hs, &stage(&y, &[(A21, &k1)]));
            let k3 = f(x + C3 * hs, &stage(&y, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(x + C4 * hs, &stage(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                x + C5 * hs,
                &stage(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                x + hs,
                &stage(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = stage(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = f(x + hs, &y_new);
            stats.evals += 6;

            let mut err = k1.clone();
            // err = h * sum(E_i k_i); build from zero via axpy on a scaled copy
            err.axpy(-1.0, &k1);
            for (c, k) in [(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)] {
                err.axpy(hs * c, k);
            }
            let en = S::error_norm(&err, &y, &y_new, self.atol, self.rtol);
            if !en.is_finite() {
                return Err(EvansError::IntegrationFailure {
                    x,
                    reason: "non-finite state".into(),
                });
            }

            if en <= 1.0 {
                stats.accepted += 1;
                x = if last { x1 } else { x + hs };
                y = y_new;
                k1 = k7;
                if observer(x, &mut y, &k1) {
                    k1 = f(x, &y);
                    stats.evals += 1;
                }
                let fac = if en == 0.0 {
                    5.0
                } else {
                    (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = (h * fac).min(self.h_max);
            } else {
                stats.rejected += 1;
                h *= (0.9 * en.powf(-0.2)).clamp(0.1, 0.9);
                if h < self.h_min {
                    return Err(EvansError::IntegrationFailure {
                        x,
                        reason: format!("step size underflow (h = {h:e})"),
                    });
                }
            }
        }
        Ok((y, stats))
    }
}
