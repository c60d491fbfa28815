//! Traveling-wave density profile `v(x)` solving `(2 mu + eta) v' = H(v, v+)`.
//!
//! The profile ODE is scalar and autonomous, so the profile is obtained by
//! integrating outward from an interior anchor value in both directions
//! until the endstates are reached to within the endpoint tolerance.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{EvansError, Result};
use crate::ode::Dopri5;
use crate::params::PhysicalParams;

/// Anything that supplies the density coefficient entering the Evans system.
pub trait DensityProfile: Sync {
    /// Density at `x`; outside the computational domain returns the endstate.
    fn density(&self, x: f64) -> f64;
    /// Computational domain `(-L_-, L_+)`.
    fn domain(&self) -> (f64, f64);
}

#[derive(Debug, Clone, Copy)]
pub struct ProfileOptions {
    /// Endpoint tolerance on `|v(-L_-) - 1|` and `|v(L_+) - v+|`.
    pub tol: f64,
    pub atol: f64,
    pub rtol: f64,
    /// Initial truncation length used on both sides.
    pub l_init: f64,
    /// The domain may grow up to `l_cap_factor * l_init` on each side.
    pub l_cap_factor: f64,
    /// Largest integrator step, which also bounds the interpolation spacing.
    pub h_max: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            tol: 1e-3,
            atol: 1e-8,
            rtol: 1e-8,
            l_init: 20.0,
            l_cap_factor: 10.0,
            h_max: 0.05,
        }
    }
}

/// Anchor value `v(0)`: `v+ + 1/12` for `v+ <= 1/12`, the midpoint of
/// `(v+, 1)` otherwise.
pub fn profile_anchor(v_plus: f64) -> f64 {
    if v_plus <= 1.0 / 12.0 {
        v_plus + 1.0 / 12.0
    } else {
        v_plus + 0.5 * (1.0 - v_plus)
    }
}

/// Sampled profile with cubic Hermite interpolation between samples.
#[derive(Debug, Clone)]
pub struct Profile {
    pub params: PhysicalParams,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    slopes: Vec<f64>,
    pub l_minus: f64,
    pub l_plus: f64,
    pub endpoint_error: f64,
}

#[derive(Serialize, Deserialize)]
struct ProfileFile {
    params: PhysicalParams,
    l_minus: f64,
    l_plus: f64,
    grid: Vec<f64>,
    values: Vec<f64>,
    endpoint_error: f64,
}

/// Relative distance to an endstate below which samples are considered flat.
const SATURATION: f64 = 1e-12;

/// Samples `(x, v)` of one half, reached length, endpoint error.
type HalfSolve = (Vec<(f64, f64)>, f64, f64);

/// Computes the profile for `0 < v+ < 1`.
pub fn compute_profile(params: &PhysicalParams, opts: &ProfileOptions) -> Result<Profile> {
    let vp = params.v_plus;
    if !(vp > 0.0 && vp < 1.0) {
        return Err(EvansError::Domain(format!("profile requires 0 < v_plus < 1, got {vp}")));
    }
    let kappa = params.profile_viscosity();
    let rhs = |_x: f64, v: &f64| params.profile_rhs(*v) / kappa;
    let solver = Dopri5 {
        atol: opts.atol * vp.min(1.0),
        rtol: opts.rtol,
        h_init: Some(opts.h_max.min(0.01)),
        h_max: opts.h_max,
        ..Default::default()
    };
    let cap = opts.l_init * opts.l_cap_factor;
    let v0 = profile_anchor(vp);

    // Integrate one half-line, growing the length until the endstate is met.
    let half = |target: f64, sign: f64| -> Result<HalfSolve> {
        let mut nodes = vec![(0.0, v0)];
        let mut x = 0.0;
        let mut v = v0;
        let mut len = opts.l_init;
        loop {
            let (v_end, _) = solver.integrate(rhs, x, v, sign * len, |xs, vs, _| {
                nodes.push((xs, *vs));
                false
            })?;
            x = sign * len;
            v = v_end;
            let err = (v - target).abs();
            if err <= opts.tol {
                // Fast decay can reach the endstate to rounding well before
                // the end; cut the flat tail so the samples stay monotone.
                let floor = SATURATION * target;
                let dir = target - v0;
                let mut keep = 1;
                while keep < nodes.len() && (nodes[keep].1 - nodes[keep - 1].1) * dir > 0.0 {
                    keep += 1;
                    if (nodes[keep - 1].1 - target).abs() <= floor {
                        break;
                    }
                }
                nodes.truncate(keep);
                let last = nodes[keep - 1];
                return Ok((nodes, last.0.abs(), (last.1 - target).abs()));
            }
            if len >= cap {
                return Err(EvansError::ProfileNonConvergence {
                    tol: opts.tol,
                    cap,
                    achieved: err,
                });
            }
            len = (len * 1.5).min(cap);
        }
    };

    let (right, l_plus, err_plus) = half(vp, 1.0)?;
    let (left, l_minus, err_minus) = half(1.0, -1.0)?;

    let mut grid = Vec::with_capacity(left.len() + right.len());
    let mut values = Vec::with_capacity(left.len() + right.len());
    for &(x, v) in left.iter().rev() {
        grid.push(x);
        values.push(v);
    }
    for &(x, v) in right.iter().skip(1) {
        grid.push(x);
        values.push(v);
    }
    let profile = Profile::from_samples(*params, grid, values, l_minus, l_plus, err_plus.max(err_minus));
    profile.check_invariants()?;
    Ok(profile)
}

impl Profile {
    fn from_samples(
        params: PhysicalParams,
        grid: Vec<f64>,
        values: Vec<f64>,
        l_minus: f64,
        l_plus: f64,
        endpoint_error: f64,
    ) -> Self {
        let kappa = params.profile_viscosity();
        let slopes = values.iter().map(|&v| params.profile_rhs(v) / kappa).collect();
        Profile {
            params,
            grid,
            values,
            slopes,
            l_minus,
            l_plus,
            endpoint_error,
        }
    }

    fn check_invariants(&self) -> Result<()> {
        let vp = self.params.v_plus;
        for w in self.grid.windows(2) {
            if !(w[1] > w[0]) {
                return Err(EvansError::Domain("profile grid not increasing".into()));
            }
        }
        for (i, w) in self.values.windows(2).enumerate() {
            if !(w[1] < w[0]) {
                return Err(EvansError::Domain(format!(
                    "profile not strictly decreasing at x = {}",
                    self.grid[i]
                )));
            }
        }
        if self.values.iter().any(|&v| !(v > vp && v < 1.0)) {
            return Err(EvansError::Domain("profile left (v+, 1)".into()));
        }
        Ok(())
    }

    /// Interpolated density; clamped to the endstates outside the domain.
    pub fn value(&self, x: f64) -> f64 {
        let n = self.grid.len();
        if x <= self.grid[0] {
            return if x < self.grid[0] { 1.0 } else { self.values[0] };
        }
        if x >= self.grid[n - 1] {
            return if x > self.grid[n - 1] {
                self.params.v_plus
            } else {
                self.values[n - 1]
            };
        }
        let i = match self.grid.binary_search_by(|g| g.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.values[i],
            Err(i) => i - 1,
        };
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.values[i] + h10 * h * self.slopes[i] + h01 * self.values[i + 1] + h11 * h * self.slopes[i + 1]
    }

    /// `v'(x) = H(v(x))/(2 mu + eta)`, evaluated from the ODE rather than by
    /// differentiating the interpolant.
    pub fn derivative(&self, x: f64) -> f64 {
        self.params.profile_rhs(self.value(x)) / self.params.profile_viscosity()
    }

    /// Same orbit shifted by `shift`: `w(x) = v(x - shift)`.
    pub fn translated(&self, shift: f64) -> Profile {
        let grid = self.grid.iter().map(|x| x + shift).collect();
        Profile {
            params: self.params,
            grid,
            values: self.values.clone(),
            slopes: self.slopes.clone(),
            l_minus: self.l_minus - shift,
            l_plus: self.l_plus + shift,
            endpoint_error: self.endpoint_error,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ProfileFile {
            params: self.params,
            l_minus: self.l_minus,
            l_plus: self.l_plus,
            grid: self.grid.clone(),
            values: self.values.clone(),
            endpoint_error: self.endpoint_error,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProfileFile = serde_json::from_str(text)?;
        if file.grid.len() != file.values.len() || file.grid.len() < 2 {
            return Err(EvansError::Domain("profile grid/values length mismatch".into()));
        }
        file.params.validate()?;
        let p = Profile::from_samples(
            file.params,
            file.grid,
            file.values,
            file.l_minus,
            file.l_plus,
            file.endpoint_error,
        );
        p.check_invariants()?;
        Ok(p)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Profile::from_json(&std::fs::read_to_string(path)?)
    }
}

impl DensityProfile for Profile {
    fn density(&self, x: f64) -> f64 {
        self.value(x)
    }

    fn domain(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }
}

/// Strong-shock limiting profile: the `tanh` layer with `v(0) = 1/12`.
pub fn limiting_profile(x: f64, params: &PhysicalParams) -> f64 {
    let kappa = params.profile_viscosity();
    0.5 * (1.0 - (x / (2.0 * kappa) + (5.0f64 / 6.0).atanh()).tanh())
}

/// The `tanh` layer before translation, `(1 - tanh(x / (2 (2 mu + eta)))) / 2`.
pub fn limiting_profile_centered(x: f64, params: &PhysicalParams) -> f64 {
    0.5 * (1.0 - (x / (2.0 * params.profile_viscosity())).tanh())
}

/// Closed-form limiting profile on a truncated domain.
#[derive(Debug, Clone, Copy)]
pub struct LimitingProfile {
    pub params: PhysicalParams,
    pub l_minus: f64,
    pub l_plus: f64,
}

impl LimitingProfile {
    /// Domain chosen so that `v0(L_+) < plus_threshold` and
    /// `1 - v0(-L_-) <= minus_tol`, but never shorter than `l_init`.
    pub fn new(params: &PhysicalParams, l_init: f64, plus_threshold: f64, minus_tol: f64) -> Self {
        let kappa = params.profile_viscosity();
        let s0 = (5.0f64 / 6.0).atanh();
        // v0 = (1 - tanh(y))/2 < thr  <=>  y > atanh(1 - 2 thr)
        let y_plus = (1.0 - 2.0 * plus_threshold).atanh();
        let y_minus = -(1.0 - 2.0 * minus_tol).atanh();
        let l_plus = (2.0 * kappa * (y_plus - s0)).max(l_init);
        let l_minus = (-2.0 * kappa * (y_minus - s0)).max(l_init);
        LimitingProfile {
            params: *params,
            l_minus,
            l_plus,
        }
    }

    pub fn with_defaults(params: &PhysicalParams) -> Self {
        LimitingProfile::new(params, 20.0, 1e-8, 1e-3)
    }
}

impl DensityProfile for LimitingProfile {
    fn density(&self, x: f64) -> f64 {
        if x > self.l_plus {
            0.0
        } else if x < -self.l_minus {
            1.0
        } else {
            limiting_profile(x, &self.params)
        }
    }

    fn domain(&self) -> (f64, f64) {
        (-self.l_minus, self.l_plus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(vp: f64) -> PhysicalParams {
        PhysicalParams::new(5.0 / 3.0, vp, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn anchor_values() {
        assert!((profile_anchor(0.05) - (0.05 + 1.0 / 12.0)).abs() < 1e-15);
        assert!((profile_anchor(0.5) - 0.75).abs() < 1e-15);
        let p = compute_profile(&params(0.05), &ProfileOptions::default()).unwrap();
        assert!((p.value(0.0) - (0.05 + 1.0 / 12.0)).abs() < 1e-14);
    }

    #[test]
    fn monotone_and_sandwiched() {
        for vp in [0.5, 0.05, 1e-3, 0.8] {
            let p = compute_profile(&params(vp), &ProfileOptions::default()).unwrap();
            assert!(p.endpoint_error <= 1e-3);
            for i in 0..400 {
                let x = -p.l_minus + (p.l_minus + p.l_plus) * (i as f64 + 0.5) / 400.0;
                let v = p.value(x);
                assert!(v > vp && v < 1.0);
                assert!(p.derivative(x) < 0.0);
            }
        }
    }

    #[test]
    fn clamps_outside_domain() {
        let p = compute_profile(&params(0.3), &ProfileOptions::default()).unwrap();
        assert_eq!(p.value(p.l_plus + 5.0), 0.3);
        assert_eq!(p.value(-p.l_minus - 5.0), 1.0);
    }

    #[test]
    fn weak_shock_extends_domain() {
        let p = compute_profile(&params(0.95), &ProfileOptions::default()).unwrap();
        assert!(p.l_plus > 20.0 || p.l_minus > 20.0, "{} {}", p.l_minus, p.l_plus);
        assert!(p.endpoint_error <= 1e-3);
    }

    #[test]
    fn cap_reports_nonconvergence() {
        let opts = ProfileOptions {
            l_cap_factor: 1.0,
            tol: 1e-12,
            ..Default::default()
        };
        match compute_profile(&params(0.9), &opts) {
            Err(EvansError::ProfileNonConvergence { .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_endstate() {
        assert!(compute_profile(&params(1.0), &ProfileOptions::default()).is_err());
    }

    #[test]
    fn limiting_profile_basics() {
        let p = params(0.5);
        assert!((limiting_profile_centered(0.0, &p) - 0.5).abs() < 1e-15);
        assert!((limiting_profile(0.0, &p) - 1.0 / 12.0).abs() < 1e-15);
        assert!((limiting_profile(-200.0, &p) - 1.0).abs() < 1e-15);
        let lp = LimitingProfile::with_defaults(&p);
        assert!(lp.density(lp.l_plus) <= 1.0001e-8);
        assert!(1.0 - lp.density(-lp.l_minus) <= 1e-3);
    }

    #[test]
    fn json_round_trip() {
        let p = compute_profile(&params(0.2), &ProfileOptions::default()).unwrap();
        let q = Profile::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(p.grid, q.grid);
        assert_eq!(p.value(0.37), q.value(0.37));
    }
}
