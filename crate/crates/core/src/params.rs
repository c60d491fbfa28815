//! Physical parameters of the rescaled parallel shock problem.
//!
//! After rescaling the left endstate is `v_- = 1` and the shock speed is
//! `s = -1`; the remaining free parameters are the gas constant, the right
//! endstate and the three magnetic parameters.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{EvansError, Result};

/// Left endstate density after rescaling.
pub const V_MINUS: f64 = 1.0;
/// Shock speed after rescaling.
pub const SHOCK_SPEED: f64 = -1.0;
/// Relative tolerance for deciding that `B1*` sits on a characteristic boundary.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Pressure coefficient `a` closing the Rankine-Hugoniot conditions,
/// `a = v+^gamma (1 - v+) / (1 - v+^gamma)`.
///
/// The removable singularities at `v+ = 1` (limit `1/gamma`) and `gamma = 1`
/// (limit `v+`) are evaluated through their analytic limits.
pub fn rh_coefficient(v_plus: f64, gamma: f64) -> Result<f64> {
    if !(v_plus > 0.0) || !v_plus.is_finite() {
        return Err(EvansError::Domain(format!("v_plus must be positive, got {v_plus}")));
    }
    if v_plus > 1.0 {
        return Err(EvansError::Domain(format!("v_plus must not exceed 1, got {v_plus}")));
    }
    if !(gamma >= 1.0) || !gamma.is_finite() {
        return Err(EvansError::Domain(format!("gamma must be >= 1, got {gamma}")));
    }
    if gamma == 1.0 {
        return Ok(v_plus);
    }
    if v_plus == 1.0 {
        return Ok(1.0 / gamma);
    }
    // (1 - v) / (1 - v^g) with both factors from expm1 so the ratio stays
    // accurate as v -> 1.
    let ln_v = (v_plus - 1.0).ln_1p();
    let num = -(ln_v).exp_m1();
    let den = -(gamma * ln_v).exp_m1();
    Ok((gamma * ln_v).exp() * num / den)
}

/// The five free parameters plus the (fixed) viscosities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub gamma: f64,
    pub v_plus: f64,
    pub b1: f64,
    pub mu0: f64,
    pub sigma: f64,
    pub mu: f64,
    pub eta: f64,
    /// Derived pressure coefficient, kept consistent with `v_plus` and `gamma`.
    pub a: f64,
}

impl PhysicalParams {
    /// Builds a parameter set with `mu = 1` and `eta = -2/3`.
    pub fn new(gamma: f64, v_plus: f64, b1: f64, mu0: f64, sigma: f64) -> Result<Self> {
        Self::with_viscosity(gamma, v_plus, b1, mu0, sigma, 1.0, -2.0 / 3.0)
    }

    pub fn with_viscosity(gamma: f64, v_plus: f64, b1: f64, mu0: f64, sigma: f64, mu: f64, eta: f64) -> Result<Self> {
        let a = rh_coefficient(v_plus, gamma)?;
        let p = PhysicalParams {
            gamma,
            v_plus,
            b1,
            mu0,
            sigma,
            mu,
            eta,
            a,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(EvansError::Domain(format!("{what} invalid: {v}")));
        if !(self.b1 >= 0.0) || !self.b1.is_finite() {
            return bad("b1", self.b1);
        }
        if !(self.mu0 > 0.0) || !self.mu0.is_finite() {
            return bad("mu0", self.mu0);
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return bad("sigma", self.sigma);
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return bad("mu", self.mu);
        }
        if !(self.profile_viscosity() > 0.0) {
            return bad("2 mu + eta", self.profile_viscosity());
        }
        Ok(())
    }

    /// The profile ODE coefficient `2 mu + eta` (4/3 by default).
    pub fn profile_viscosity(&self) -> f64 {
        2.0 * self.mu + self.eta
    }

    /// Copy with a different right endstate; `a` is recomputed.
    pub fn with_v_plus(&self, v_plus: f64) -> Result<Self> {
        Self::with_viscosity(self.gamma, v_plus, self.b1, self.mu0, self.sigma, self.mu, self.eta)
    }

    pub fn with_b1(&self, b1: f64) -> Result<Self> {
        let mut p = *self;
        p.b1 = b1;
        p.validate()?;
        Ok(p)
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        let mut p = *self;
        p.sigma = sigma;
        p.validate()?;
        Ok(p)
    }

    pub fn with_mu0(&self, mu0: f64) -> Result<Self> {
        let mut p = *self;
        p.mu0 = mu0;
        p.validate()?;
        Ok(p)
    }

    /// `H(v, v+) = v (v - 1 + a (v^-gamma - 1))`.
    pub fn profile_rhs(&self, v: f64) -> f64 {
        v * (v - 1.0 + self.a * (v.powf(-self.gamma) - 1.0))
    }

    /// Endstate density on the given side.
    pub fn endstate(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.v_plus,
            Side::Minus => V_MINUS,
        }
    }

    /// Canonical key `g=..,v=..,b=..,m=..,s=..` using shortest round-trip decimals.
    pub fn key(&self) -> String {
        format!(
            "g={},v={},b={},m={},s={}",
            self.gamma, self.v_plus, self.b1, self.mu0, self.sigma
        )
    }
}

/// Which asymptotic endstate a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Plus => write!(f, "+"),
            Side::Minus => write!(f, "-"),
        }
    }
}

/// Characteristic boundary hit by a degenerate shock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CharacteristicBoundary {
    /// `B1* = sqrt(mu0 v+)`.
    Fast,
    /// `B1* = sqrt(mu0)`.
    Slow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShockType {
    Lax1,
    Overcompressive,
    Lax3,
    Degenerate(CharacteristicBoundary),
}

impl fmt::Display for ShockType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShockType::Lax1 => write!(f, "lax1"),
            ShockType::Overcompressive => write!(f, "overcompressive"),
            ShockType::Lax3 => write!(f, "lax3"),
            ShockType::Degenerate(CharacteristicBoundary::Fast) => write!(f, "degenerate(fast)"),
            ShockType::Degenerate(CharacteristicBoundary::Slow) => write!(f, "degenerate(slow)"),
        }
    }
}

/// Classifies the shock by comparing `B1*` with `sqrt(mu0 v+)` and `sqrt(mu0)`.
/// Equality within the relative tolerance `tol` reports the boundary.
pub fn classify_shock(params: &PhysicalParams, tol: f64) -> ShockType {
    let fast = (params.mu0 * params.v_plus).sqrt();
    let slow = params.mu0.sqrt();
    let b = params.b1;
    let near = |edge: f64| (b - edge).abs() <= tol * edge.max(f64::MIN_POSITIVE);
    if near(fast) {
        ShockType::Degenerate(CharacteristicBoundary::Fast)
    } else if near(slow) {
        ShockType::Degenerate(CharacteristicBoundary::Slow)
    } else if b < fast {
        ShockType::Lax1
    } else if b < slow {
        ShockType::Overcompressive
    } else {
        ShockType::Lax3
    }
}

/// Gas-dynamical sound speed `c(v) = sqrt(gamma a v^(-gamma-1))`.
pub fn sound_speed(v: f64, params: &PhysicalParams) -> Result<f64> {
    if !(v > 0.0) {
        return Err(EvansError::Domain(format!("sound speed needs v > 0, got {v}")));
    }
    Ok((params.gamma * params.a * v.powf(-params.gamma - 1.0)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rh_limits() {
        assert!((rh_coefficient(1.0, 5.0 / 3.0).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(rh_coefficient(0.37, 1.0).unwrap(), 0.37);
        // mpmath: 0.5^(5/3) * 0.5 / (1 - 0.5^(5/3))
        let a = rh_coefficient(0.5, 5.0 / 3.0).unwrap();
        assert!((a - 0.229_905_975_856_377_17).abs() < 1e-12, "{a}");
        assert!(rh_coefficient(0.0, 1.4).is_err());
        assert!(rh_coefficient(-0.1, 1.4).is_err());
    }

    #[test]
    fn rh_continuity_at_removable_points() {
        let g = 5.0 / 3.0;
        for k in 4..9 {
            let h = 10f64.powi(-k);
            let near_one = rh_coefficient(1.0 - h, g).unwrap();
            assert!((near_one - 0.6).abs() < 1e-6 || k < 6, "{k} {near_one}");
            let near_gamma = rh_coefficient(0.37, 1.0 + h).unwrap();
            assert!((near_gamma - 0.37).abs() < 10.0 * h, "{k} {near_gamma}");
        }
        assert!((rh_coefficient(1.0 - 1e-7, g).unwrap() - 0.6).abs() < 1e-6);
        assert!((rh_coefficient(0.37, 1.0 + 1e-7).unwrap() - 0.37).abs() < 1e-6);
    }

    #[test]
    fn classification() {
        let p = PhysicalParams::new(5.0 / 3.0, 0.5, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(classify_shock(&p, DEGENERACY_TOL), ShockType::Lax1);
        let p = PhysicalParams::new(5.0 / 3.0, 0.01, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(classify_shock(&p, DEGENERACY_TOL), ShockType::Lax3);
        let p = PhysicalParams::new(5.0 / 3.0, 0.04, 0.5, 1.0, 1.0).unwrap();
        assert_eq!(classify_shock(&p, DEGENERACY_TOL), ShockType::Overcompressive);
        let p = PhysicalParams::new(5.0 / 3.0, 0.04, 0.2, 1.0, 1.0).unwrap();
        assert_eq!(
            classify_shock(&p, DEGENERACY_TOL),
            ShockType::Degenerate(CharacteristicBoundary::Fast)
        );
        let p = PhysicalParams::new(5.0 / 3.0, 0.04, 2.0, 4.0, 1.0).unwrap();
        assert_eq!(
            classify_shock(&p, DEGENERACY_TOL),
            ShockType::Degenerate(CharacteristicBoundary::Slow)
        );
    }

    #[test]
    fn sound_speed_ordering() {
        let p = PhysicalParams::new(5.0 / 3.0, 0.5, 0.0, 1.0, 1.0).unwrap();
        assert!(sound_speed(0.5, &p).unwrap() > 1.0);
        assert!(sound_speed(1.0, &p).unwrap() < 1.0);
        let p1 = PhysicalParams::new(1.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert!((sound_speed(1.0, &p1).unwrap() - 1.0).abs() < 1e-15);
        assert!(sound_speed(0.0, &p).is_err());
    }

    #[test]
    fn invalid_params() {
        assert!(PhysicalParams::new(5.0 / 3.0, 0.5, -1.0, 1.0, 1.0).is_err());
        assert!(PhysicalParams::new(5.0 / 3.0, 0.5, 1.0, 0.0, 1.0).is_err());
        assert!(PhysicalParams::with_viscosity(5.0 / 3.0, 0.5, 1.0, 1.0, 1.0, 1.0, -2.0).is_err());
        let p = PhysicalParams::new(5.0 / 3.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        assert!((p.profile_viscosity() - 4.0 / 3.0).abs() < 1e-15);
        // a closes the profile ODE at the right endstate
        assert!(p.profile_rhs(p.v_plus).abs() < 1e-15);
        assert!(p.profile_rhs(1.0).abs() < 1e-15);
    }
}
