//! Polar-coordinate shooting of the Evans system and evaluation of the Evans
//! function with its renormalizations.
//!
//! A solution wedge `W = rho * (omega_1 ^ omega_2)` is carried as an
//! orthonormal frame `Omega` and `log rho`. The radial equation subtracts the
//! trace of the limiting eigenvalues, so that `W(x) ~ exp(A_+- x) R` is
//! factored out and the value at `x = 0` does not depend on where the
//! integration starts.

use crate::error::{EvansError, Result};
use crate::evans_system::{self, coefficient_matrix};
use crate::kato::{self, KatoFrame};
use crate::linalg::{self, c, Frame, C64, ONE};
use crate::ode::{Dopri5, OdeState, OdeStats};
use crate::params::{PhysicalParams, Side};
use crate::profile::DensityProfile;

#[derive(Debug, Clone, Copy)]
pub struct PolarState {
    pub omega: Frame,
    pub log_rho: C64,
    pub x: f64,
}

impl PolarState {
    /// Polar factorization of a rank-2 frame at `x`.
    pub fn from_frame(frame: &Frame, x: f64) -> PolarState {
        let (q, r) = linalg::thin_qr(frame);
        PolarState {
            omega: q,
            log_rho: c((r[(0, 0)].re * r[(1, 1)].re).ln()),
            x,
        }
    }

    pub fn orthonormality_error(&self) -> f64 {
        let g = self.omega.adjoint() * self.omega;
        linalg::norm1(&(g - nalgebra::Matrix2::identity()))
    }

    /// Plucker coordinates of `rho * Omega`.
    pub fn wedge(&self) -> [C64; 6] {
        let s = self.log_rho.exp();
        linalg::wedge(&self.omega).map(|w| w * s)
    }
}

/// Integrated state: the frame and `log rho` flattened for the integrator.
#[derive(Debug, Clone, Copy)]
struct PolarVec {
    omega: Frame,
    log_rho: C64,
}

impl OdeState for PolarVec {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.omega += x.omega * c(a);
        self.log_rho += x.log_rho * a;
    }

    fn error_norm(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..8 {
            let scale = atol + rtol * y0.omega[i].norm().max(y1.omega[i].norm());
            worst = worst.max(err.omega[i].norm() / scale);
        }
        let scale = atol + rtol * y0.log_rho.norm().max(y1.log_rho.norm());
        worst.max(err.log_rho.norm() / scale)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    pub solver: Dopri5,
    /// Re-orthonormalize when `|Omega* Omega - I|` exceeds this.
    pub ortho_tol: f64,
    pub max_corrections: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            solver: Dopri5::with_tolerances(1e-6, 1e-8),
            ortho_tol: 1e-8,
            max_corrections: 1_000_000,
        }
    }
}

impl ShootingOptions {
    /// Same options with both tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        let mut o = *self;
        o.solver.atol /= factor;
        o.solver.rtol /= factor;
        o
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PolarStats {
    pub ode: OdeStats,
    pub corrections: usize,
}

/// Integrates the polar system for the wedge started at `(x_from, basis)`
/// to `x_to`. `trace_shift` is subtracted from the radial rate.
#[allow(clippy::too_many_arguments)]
pub fn polar_integrate<P: DensityProfile + ?Sized>(
    basis: &Frame,
    x_from: f64,
    x_to: f64,
    lambda: C64,
    trace_shift: C64,
    params: &PhysicalParams,
    profile: &P,
    opts: &ShootingOptions,
) -> Result<(PolarState, PolarStats)> {
    let start = PolarState::from_frame(basis, x_from);
    let y0 = PolarVec {
        omega: start.omega,
        log_rho: start.log_rho,
    };
    let rhs = |x: f64, y: &PolarVec| {
        let a = coefficient_matrix(profile.density(x), lambda, params);
        let ao = a * y.omega;
        let m = y.omega.adjoint() * ao;
        PolarVec {
            omega: ao - y.omega * m,
            log_rho: m.trace() - trace_shift,
        }
    };
    let mut corrections = 0usize;
    let mut overflow = false;
    let observer = |_x: f64, y: &mut PolarVec, _dy: &PolarVec| {
        let g = y.omega.adjoint() * y.omega;
        if linalg::norm1(&(g - nalgebra::Matrix2::identity())) <= opts.ortho_tol {
            return false;
        }
        let (q, r) = linalg::thin_qr(&y.omega);
        y.omega = q;
        y.log_rho += (r[(0, 0)] * r[(1, 1)]).ln();
        corrections += 1;
        if corrections > opts.max_corrections {
            overflow = true;
        }
        true
    };
    let (y, ode) = opts.solver.integrate(rhs, x_from, y0, x_to, observer)?;
    if overflow {
        return Err(EvansError::OrthonormalityLoss { corrections });
    }
    Ok((
        PolarState {
            omega: y.omega,
            log_rho: y.log_rho,
            x: x_to,
        },
        PolarStats { ode, corrections },
    ))
}

/// `((v+/4 + lambda) / (v+/4 + 1))^(1/4)`.
pub fn sqrt_vp_factor(lambda: C64, params: &PhysicalParams) -> C64 {
    let q = 0.25 * params.v_plus;
    ((c(q) + lambda) / c(q + 1.0)).powf(0.25)
}

/// Quartic-root ratio `(radicand(lambda) / radicand(1))^(1/4)` on `side`.
pub fn side_factor(side: Side, lambda: C64, params: &PhysicalParams) -> C64 {
    let num = kato::regularization_radicand(side, lambda, params);
    let den = kato::regularization_radicand(side, ONE, params);
    (num / den).powf(0.25)
}

/// Multipliers turning `D` into its renormalizations. Principal branches;
/// every radicand has non-negative real part on `Re lambda >= 0`, so these
/// are analytic there.
#[derive(Debug, Clone, Copy)]
pub struct Prefactors {
    pub minus: C64,
    pub plus: C64,
    pub sqrt_vp: C64,
}

impl Prefactors {
    pub fn at(lambda: C64, params: &PhysicalParams) -> Prefactors {
        Prefactors {
            minus: side_factor(Side::Minus, lambda, params),
            plus: side_factor(Side::Plus, lambda, params),
            sqrt_vp: sqrt_vp_factor(lambda, params),
        }
    }

    pub fn check(&self) -> C64 {
        self.minus * self.sqrt_vp * self.plus
    }

    pub fn hat(&self) -> C64 {
        self.minus
    }

    pub fn tilde(&self) -> C64 {
        self.minus * self.plus
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvansValue {
    pub lambda: C64,
    pub d_raw: C64,
    pub d_check: C64,
    pub d_hat: C64,
    pub d_tilde: C64,
    pub d_unit: C64,
}

impl EvansValue {
    pub fn conj(&self) -> EvansValue {
        EvansValue {
            lambda: self.lambda.conj(),
            d_raw: self.d_raw.conj(),
            d_check: self.d_check.conj(),
            d_hat: self.d_hat.conj(),
            d_tilde: self.d_tilde.conj(),
            d_unit: self.d_unit.conj(),
        }
    }

    /// Selects one of the five values by name: raw, check, hat, tilde, unit.
    pub fn component(&self, which: Normalization) -> C64 {
        match which {
            Normalization::Raw => self.d_raw,
            Normalization::Check => self.d_check,
            Normalization::Hat => self.d_hat,
            Normalization::Tilde => self.d_tilde,
            Normalization::Unit => self.d_unit,
        }
    }

    /// Every component scaled by `k`, except the unit value.
    pub fn scaled(&self, k: C64) -> EvansValue {
        EvansValue {
            d_raw: self.d_raw * k,
            d_check: self.d_check * k,
            d_hat: self.d_hat * k,
            d_tilde: self.d_tilde * k,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    Raw,
    Check,
    Hat,
    Tilde,
    Unit,
}

impl std::str::FromStr for Normalization {
    type Err = EvansError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "raw" | "d" => Normalization::Raw,
            "check" => Normalization::Check,
            "hat" => Normalization::Hat,
            "tilde" => Normalization::Tilde,
            "unit" => Normalization::Unit,
            other => return Err(EvansError::Domain(format!("unknown normalization {other:?}"))),
        })
    }
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Normalization::Raw => "raw",
            Normalization::Check => "check",
            Normalization::Hat => "hat",
            Normalization::Tilde => "tilde",
            Normalization::Unit => "unit",
        })
    }
}

/// Sum of the selected eigenvalues of `A_side(lambda)`; analytic in `lambda`
/// wherever the split is.
pub fn selected_trace(side: Side, lambda: C64, params: &PhysicalParams) -> Result<C64> {
    let a = evans_system::limit_matrix(side, lambda, params);
    let proj = evans_system::spectral_projector(&a, side, lambda)?;
    Ok((a * proj).trace())
}

/// Shoots both sides to `x = 0` and returns the two polar states.
pub fn shoot_both<P: DensityProfile + ?Sized>(
    lambda: C64,
    params: &PhysicalParams,
    profile: &P,
    plus: &Frame,
    minus: &Frame,
    opts: &ShootingOptions,
) -> Result<(PolarState, PolarState)> {
    let (lo, hi) = profile.domain();
    let tp = selected_trace(Side::Plus, lambda, params)?;
    let tm = selected_trace(Side::Minus, lambda, params)?;
    let (sp, _) = polar_integrate(plus, hi, 0.0, lambda, tp, params, profile, opts)?;
    let (sm, _) = polar_integrate(minus, lo, 0.0, lambda, tm, params, profile, opts)?;
    Ok((sp, sm))
}

/// Evans function at `lambda` from Kato frames on both sides.
pub fn evans_eval<P: DensityProfile + ?Sized>(
    lambda: C64,
    params: &PhysicalParams,
    profile: &P,
    plus: &KatoFrame,
    minus: &KatoFrame,
    opts: &ShootingOptions,
) -> Result<EvansValue> {
    let (sp, sm) = shoot_both(lambda, params, profile, &plus.basis, &minus.basis, opts)?;
    Ok(assemble_value(lambda, params, &sp, &sm))
}

/// Combines the two polar states at the matching point.
pub fn assemble_value(lambda: C64, params: &PhysicalParams, sp: &PolarState, sm: &PolarState) -> EvansValue {
    let det = linalg::det_frames(&sp.omega, &sm.omega);
    let log_rho = sp.log_rho + sm.log_rho;
    let d_raw = det * log_rho.exp();
    let d_unit = det * C64::from_polar(1.0, log_rho.im);
    let pf = Prefactors::at(lambda, params);
    EvansValue {
        lambda,
        d_raw,
        d_check: d_raw * pf.check(),
        d_hat: d_raw * pf.hat(),
        d_tilde: d_raw * pf.tilde(),
        d_unit,
    }
}

/// Convenience evaluation at a single point with frames anchored at
/// `anchor` on the real axis and carried straight to `lambda`.
pub fn evans_at<P: DensityProfile + ?Sized>(
    lambda: C64,
    params: &PhysicalParams,
    profile: &P,
    anchor: f64,
    opts: &ShootingOptions,
) -> Result<EvansValue> {
    let ko = kato::KatoOptions::default();
    let fp = kato::kato_anchored(Side::Plus, anchor, &[lambda], params, &ko)?[0];
    let fm = kato::kato_anchored(Side::Minus, anchor, &[lambda], params, &ko)?[0];
    evans_eval(lambda, params, profile, &fp, &fm, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kato::{kato_init, KatoOptions};
    use crate::profile::{compute_profile, Profile, ProfileOptions};

    /// Profile frozen at a constant density.
    struct Constant(f64, f64);

    impl DensityProfile for Constant {
        fn density(&self, _x: f64) -> f64 {
            self.0
        }
        fn domain(&self) -> (f64, f64) {
            (-self.1, self.1)
        }
    }

    fn params() -> PhysicalParams {
        PhysicalParams::new(5.0 / 3.0, 0.4, 0.9, 1.0, 1.0).unwrap()
    }

    fn profile(p: &PhysicalParams) -> Profile {
        compute_profile(p, &ProfileOptions::default()).unwrap()
    }

    #[test]
    fn constant_coefficient_slope() {
        let p = params();
        let l = C64::new(0.8, 0.3);
        let f = kato_init(Side::Plus, l, &p).unwrap();
        let konst = Constant(p.v_plus, 10.0);
        let opts = ShootingOptions::default().tightened(100.0);
        let (s, _) = polar_integrate(&f.basis, 5.0, 0.0, l, ONE * 0.0, &p, &konst, &opts).unwrap();
        let start = PolarState::from_frame(&f.basis, 5.0);
        let split =
            evans_system::spectral_split(&evans_system::limit_matrix(Side::Plus, l, &p), Side::Plus, l, 1e-10).unwrap();
        let slope = (s.log_rho - start.log_rho) / c(-5.0);
        let want = split.selected[0] + split.selected[1];
        assert!((slope - want).norm() < 1e-7, "{slope} {want}");
        // span unchanged: the old frame lies in the new span
        let proj = s.omega * s.omega.adjoint();
        assert!(linalg::norm1(&(proj * start.omega - start.omega)) < 1e-7);
        // and with the trace removed the radius is constant
        let (s2, _) = polar_integrate(&f.basis, 5.0, 0.0, l, want, &p, &konst, &opts).unwrap();
        assert!((s2.log_rho - start.log_rho).norm() < 1e-7);
    }

    #[test]
    fn zero_length_is_factorization() {
        let p = params();
        let f = kato_init(Side::Minus, ONE, &p).unwrap();
        let konst = Constant(1.0, 10.0);
        let (s, st) = polar_integrate(&f.basis, -3.0, -3.0, ONE, ONE, &p, &konst, &ShootingOptions::default()).unwrap();
        assert_eq!(st.ode.accepted, 0);
        let w = linalg::wedge(&f.basis);
        assert!((s.log_rho.re - linalg::wedge_norm(&w).ln()).abs() < 1e-12);
        let sw = s.wedge();
        for (a, b) in sw.iter().zip(w) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn real_on_real_axis_and_conjugate_symmetric() {
        let p = params();
        let prof = profile(&p);
        let opts = ShootingOptions::default();
        let v = evans_at(c(1.5), &p, &prof, 10.0, &opts).unwrap();
        assert!(v.d_raw.im.abs() < 1e-8 * v.d_raw.norm(), "{}", v.d_raw);
        assert!(v.d_raw.norm() > 0.0);
        let l = C64::new(0.6, 1.1);
        let a = evans_at(l, &p, &prof, 10.0, &opts).unwrap();
        let b = evans_at(l.conj(), &p, &prof, 10.0, &opts).unwrap();
        assert!((a.conj().d_raw - b.d_raw).norm() < 1e-8 * a.d_raw.norm());
    }

    #[test]
    fn check_equals_raw_at_one() {
        let p = params();
        let pf = Prefactors::at(ONE, &p);
        assert!((pf.check() - ONE).norm() < 1e-15);
        assert!((pf.hat() - ONE).norm() < 1e-15);
        assert!((pf.tilde() - ONE).norm() < 1e-15);
    }

    #[test]
    fn unit_value_bounded() {
        let p = params();
        let prof = profile(&p);
        for l in [c(0.5), C64::new(0.1, 2.0), C64::new(3.0, -1.0)] {
            let v = evans_at(l, &p, &prof, 10.0, &ShootingOptions::default()).unwrap();
            assert!(v.d_unit.norm() > 0.0 && v.d_unit.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn translation_factor_is_limit_trace_exponential() {
        let p = params();
        let prof = profile(&p);
        let moved = prof.translated(1.0);
        let opts = ShootingOptions::default().tightened(100.0);
        let ls = [c(0.7), C64::new(0.2, 1.5), C64::new(1.3, -0.6)];
        let ratios: Vec<C64> = ls
            .iter()
            .map(|&l| {
                let a = evans_at(l, &p, &prof, 10.0, &opts).unwrap();
                let b = evans_at(l, &p, &moved, 10.0, &opts).unwrap();
                // shifting by 1 conjugates each side by exp(trace of its limit eigenvalues)
                let t = selected_trace(Side::Plus, l, &p).unwrap() + selected_trace(Side::Minus, l, &p).unwrap();
                b.d_raw / a.d_raw * (-t).exp()
            })
            .collect();
        // constant in lambda up to integration error
        for r in &ratios[1..] {
            assert!((r - ratios[0]).norm() < 1e-4 * ratios[0].norm(), "{r} {}", ratios[0]);
        }
    }

    #[test]
    fn tolerance_halving_stable() {
        let p = params();
        let prof = profile(&p);
        let l = C64::new(0.4, 0.9);
        let a = evans_at(l, &p, &prof, 10.0, &ShootingOptions::default()).unwrap();
        let b = evans_at(l, &p, &prof, 10.0, &ShootingOptions::default().tightened(2.0)).unwrap();
        assert!((a.d_raw - b.d_raw).norm() < 1e-3 * a.d_raw.norm());
    }

    #[test]
    fn selected_trace_matches_eigenvalues() {
        let p = params();
        let l = C64::new(0.3, 0.7);
        for side in [Side::Plus, Side::Minus] {
            let a = evans_system::limit_matrix(side, l, &p);
            let s = evans_system::spectral_split(&a, side, l, 1e-10).unwrap();
            let t = selected_trace(side, l, &p).unwrap();
            assert!((t - s.selected[0] - s.selected[1]).norm() < 1e-10);
        }
    }

    #[test]
    fn continued_frames_give_continuous_values() {
        let p = params();
        let prof = profile(&p);
        let path: Vec<C64> = (0..=20).map(|k| C64::from_polar(2.0, 0.05 * k as f64)).collect();
        let ko = KatoOptions::default();
        let fp = kato::kato_along_contour(Side::Plus, &path, &p, &ko).unwrap();
        let fm = kato::kato_along_contour(Side::Minus, &path, &p, &ko).unwrap();
        let vals: Vec<C64> = (0..path.len())
            .map(|k| {
                evans_eval(path[k], &p, &prof, &fp[k], &fm[k], &ShootingOptions::default())
                    .unwrap()
                    .d_raw
            })
            .collect();
        for w in vals.windows(2) {
            assert!((w[1] / w[0]).arg().abs() < 0.2);
            assert!((w[1] / w[0]).norm() < 1.3 && (w[1] / w[0]).norm() > 0.7);
        }
    }
}
