//! Limiting Evans functions (strong shock `v+ -> 0`, rapidly varying
//! coefficients), the high-frequency spectral bounds, and the convergence
//! study of the finite-amplitude functions towards the strong-shock limit.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::contour::{build_semicircle, Contour};
use crate::engine::{self, EvalOptions, EvansModel};
use crate::error::{EvansError, Result};
use crate::evans_system;
use crate::kato::KatoFrame;
use crate::linalg::{self, c, Frame, C64, ONE, ZERO};
use crate::params::{PhysicalParams, Side};
use crate::profile::{LimitingProfile, ProfileOptions};
use crate::shooting::{self, EvansValue, Normalization, ShootingOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralBound {
    pub radius: f64,
    /// `max(1/mu, mu0 sigma) / 2` and `B1^2 sqrt(sigma / (mu mu0))`.
    pub terms: [f64; 2],
}

/// Radius `L` such that unstable eigenvalues satisfy `Re l + |Im l| < L`.
pub fn hf_radius(params: &PhysicalParams) -> SpectralBound {
    let t1 = 0.5 * (1.0 / params.mu).max(params.mu0 * params.sigma);
    let t2 = params.b1 * params.b1 * (params.sigma / (params.mu * params.mu0)).sqrt();
    SpectralBound {
        radius: t1 + t2,
        terms: [t1, t2],
    }
}

/// Bound `B1^2 / 4 sqrt(sigma / (mu mu0))` on the real part of unstable
/// eigenvalues.
pub fn re_lambda_bound(params: &PhysicalParams) -> f64 {
    0.25 * params.b1 * params.b1 * (params.sigma / (params.mu * params.mu0)).sqrt()
}

/// Closed-form limiting bases.
#[derive(Debug, Clone, Copy)]
pub struct StrongShockBasis {
    pub lambda: C64,
    /// `(l^{-1/4}, 0, 0, 0)` and `(0, 0, l^{-1/4}, -l^{1/4} / sqrt(sigma mu0))`.
    pub r_plus_0: Frame,
    /// Unstable directions of `A_-` as `lambda -> 0`.
    pub r_minus_0: Frame,
    /// `B1 > sqrt(mu0)`: the first minus vector is a non-decaying zero mode.
    pub zero_mode: bool,
}

impl StrongShockBasis {
    pub fn new(lambda: C64, params: &PhysicalParams) -> Result<Self> {
        let (r_minus_0, zero_mode) = minus_zero_basis(params);
        Ok(StrongShockBasis {
            lambda,
            r_plus_0: strong_shock_plus_basis(lambda, params)?,
            r_minus_0,
            zero_mode,
        })
    }
}

/// Limiting `+inf` basis, principal branches of `lambda^{+-1/4}`.
pub fn strong_shock_plus_basis(lambda: C64, params: &PhysicalParams) -> Result<Frame> {
    if lambda == ZERO {
        return Err(EvansError::Domain("strong-shock basis undefined at lambda = 0".into()));
    }
    let q = lambda.powf(0.25);
    let mut f = Frame::zeros();
    f[(0, 0)] = ONE / q;
    f[(2, 1)] = ONE / q;
    f[(3, 1)] = -q / c((params.sigma * params.mu0).sqrt());
    Ok(f)
}

/// Limits as `lambda -> 0` of the unstable directions of `A_-`.
/// Returns the frame and whether the zero-mode case applies (`B1^2 > mu0/mu`).
pub fn minus_zero_basis(params: &PhysicalParams) -> (Frame, bool) {
    let (mu, mu0, sigma, b) = (params.mu, params.mu0, params.sigma, params.b1);
    let sm = sigma * mu0;
    // nonzero eigenvalues at lambda = 0: mu a^2 - (1 + mu sm) a + sm - sigma b^2 = 0
    let disc = ((1.0 + mu * sm).powi(2) - 4.0 * mu * (sm - sigma * b * b)).sqrt();
    let fast = |a: f64| {
        [
            1.0,
            mu * a,
            mu0 * (1.0 - mu * a) / b,
            a * mu0 * (1.0 - mu * a) / (b * sm),
        ]
    };
    let a_hi = (1.0 + mu * sm + disc) / (2.0 * mu);
    let a_lo = (1.0 + mu * sm - disc) / (2.0 * mu);
    let zero_mode = b * b > mu0 / mu;
    let r1 = if zero_mode {
        // slow branch a ~ -lambda/m along the negative eigenvector of
        // [[1/mu, -b/mu0], [-b, 1]]
        let tr = 1.0 / mu + 1.0;
        let det = 1.0 / mu - b * b / mu0;
        let m = 0.5 * (tr - (tr * tr - 4.0 * det).sqrt());
        [1.0, 0.0, mu0 * (1.0 / mu - m) / b, 0.0]
    } else {
        fast(a_lo)
    };
    let r2 = fast(a_hi);
    let (r1, r2) = if b == 0.0 {
        // decoupled: velocity mode and field mode
        ([1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0])
    } else {
        (r1, r2)
    };
    let mut f = Frame::zeros();
    for i in 0..4 {
        f[(i, 0)] = c(r1[i]);
        f[(i, 1)] = c(r2[i]);
    }
    (f, zero_mode)
}

/// Strong-shock limiting Evans function: the limiting profile, the closed
/// form basis at `+inf` and the Kato frame `minus` of `A_-` at `lambda`.
/// `d_check` includes the `lambda^{1/2}` factor; `d_tilde` equals `d_hat`.
pub fn strong_shock_eval(
    lambda: C64,
    profile: &LimitingProfile,
    minus: &KatoFrame,
    opts: &ShootingOptions,
) -> Result<EvansValue> {
    let params = &profile.params;
    let plus = strong_shock_plus_basis(lambda, params)?;
    let (lo, hi) = crate::profile::DensityProfile::domain(profile);
    // the + limit matrix is nilpotent at v = 0: no radial shift on that side
    let (sp, _) = shooting::polar_integrate(&plus, hi, 0.0, lambda, ZERO, params, profile, opts)?;
    let tm = shooting::selected_trace(Side::Minus, lambda, params)?;
    let (sm, _) = shooting::polar_integrate(&minus.basis, lo, 0.0, lambda, tm, params, profile, opts)?;
    let det = linalg::det_frames(&sp.omega, &sm.omega);
    let log_rho = sp.log_rho + sm.log_rho;
    let d0 = det * log_rho.exp();
    let m = shooting::side_factor(Side::Minus, lambda, params);
    Ok(EvansValue {
        lambda,
        d_raw: d0,
        d_check: m * lambda.sqrt() * d0,
        d_hat: m * d0,
        d_tilde: m * d0,
        d_unit: det * C64::from_polar(1.0, log_rho.im),
    })
}

/// Convenience strong-shock evaluation with frames anchored at `anchor`.
pub fn strong_shock_at(
    lambda: C64,
    params: &PhysicalParams,
    anchor: f64,
    opts: &ShootingOptions,
) -> Result<EvansValue> {
    let model = EvansModel::strong_shock(params);
    let eo = EvalOptions {
        shooting: *opts,
        anchor: Some(anchor),
        ..Default::default()
    };
    engine::evaluate_point(&model, lambda, &eo)
}

/// `det[R+ | R-]` of the two Kato frames, with the finite-amplitude
/// renormalizations applied.
pub fn r_infinity_value(lambda: C64, params: &PhysicalParams, plus: &KatoFrame, minus: &KatoFrame) -> EvansValue {
    let d = linalg::det_frames(&plus.basis, &minus.basis);
    let norms = linalg::wedge_norm(&plus.wedge()) * linalg::wedge_norm(&minus.wedge());
    let pf = shooting::Prefactors::at(lambda, params);
    EvansValue {
        lambda,
        d_raw: d,
        d_check: d * pf.check(),
        d_hat: d * pf.hat(),
        d_tilde: d * pf.tilde(),
        d_unit: d / c(norms),
    }
}

/// `r -> inf` limiting Evans function at `lambda`, frames anchored at `anchor`.
pub fn r_infinity_eval(lambda: C64, params: &PhysicalParams, anchor: f64) -> Result<C64> {
    let model = EvansModel::RInfinity(*params);
    let eo = EvalOptions {
        anchor: Some(anchor),
        ..Default::default()
    };
    Ok(engine::evaluate_point(&model, lambda, &eo)?.d_raw)
}

/// Points where `A_+(lambda)` has a repeated eigenvalue, from the roots of
/// the discriminant of its characteristic polynomial (zero roots removed).
pub fn branch_points(params: &PhysicalParams) -> Result<Vec<C64>> {
    // disc(lambda) is a polynomial; sample on a circle and fit by DFT
    let n = 32usize;
    let radius = 1.0;
    let disc = |l: C64| -> Result<C64> {
        let a = evans_system::limit_matrix(Side::Plus, l, params);
        let ev = linalg::eigenvalues(&a).ok_or(EvansError::SplitFailure { lambda: l, gap: 0.0 })?;
        let mut d = ONE;
        for i in 0..4 {
            for j in i + 1..4 {
                d *= (ev[i] - ev[j]) * (ev[i] - ev[j]);
            }
        }
        Ok(d)
    };
    let samples: Vec<C64> = (0..n)
        .map(|k| disc(C64::from_polar(radius, std::f64::consts::TAU * k as f64 / n as f64)))
        .collect::<Result<_>>()?;
    let mut coef: Vec<C64> = (0..n)
        .map(|m| {
            let s: C64 = samples
                .iter()
                .enumerate()
                .map(|(k, v)| v * C64::from_polar(1.0, -std::f64::consts::TAU * (k * m) as f64 / n as f64))
                .sum();
            s / c(n as f64 * radius.powi(m as i32))
        })
        .collect();
    let big = coef.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let cut = 1e-9 * big;
    while coef.last().is_some_and(|z| z.norm() <= cut) {
        coef.pop();
    }
    let low = coef.iter().position(|z| z.norm() > cut).unwrap_or(0);
    let poly = &coef[low..];
    let deg = poly.len().saturating_sub(1);
    if deg == 0 {
        return Ok(Vec::new());
    }
    // companion matrix
    let lead = poly[deg];
    let mut comp = nalgebra::DMatrix::<C64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = ONE;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -poly[i] / lead;
    }
    let roots = nalgebra::Schur::new(comp)
        .eigenvalues()
        .ok_or_else(|| EvansError::Domain("companion eigenvalues failed".into()))?;
    Ok(roots.iter().copied().collect())
}

/// Per-`v+` maximal relative deviation of a renormalized Evans function from
/// its strong-shock limit along a contour.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub v_plus: f64,
    pub b1: f64,
    pub which: Normalization,
    pub max_rel_error: f64,
    /// Constant factor divided out (finite / limit at the anchor).
    pub factor: [f64; 2],
    pub samples: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct ConvergenceOptions {
    /// Number of points of the full semicircle.
    pub n_points: usize,
    /// Points with `|lambda|` below this are excluded.
    pub min_modulus: f64,
    /// Contour radius; `None` uses the high-frequency bound of the base
    /// parameters.
    pub radius: Option<f64>,
    pub eval: EvalOptions,
    pub profile: ProfileOptions,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions {
            n_points: 120,
            min_modulus: 1e-2,
            radius: None,
            eval: EvalOptions::default(),
            profile: ProfileOptions::default(),
        }
    }
}

/// Strong-shock contour values shared between several `v+`.
pub fn limit_values(base: &PhysicalParams, contour: &Contour, opts: &ConvergenceOptions) -> Result<Vec<EvansValue>> {
    let pts = contour.evaluation_points();
    engine::evaluate_path(&EvansModel::strong_shock(base), &pts, &opts.eval)
}

/// Relative deviation of `finite` from `limit` after dividing out the ratio
/// at the contour anchor (first point).
pub fn relative_error(
    finite: &[EvansValue],
    limit: &[EvansValue],
    which: Normalization,
    min_modulus: f64,
) -> (f64, C64) {
    let k = finite[0].component(which) / limit[0].component(which);
    let err = finite
        .iter()
        .zip(limit)
        .filter(|(f, _)| f.lambda.norm() >= min_modulus)
        .map(|(f, l)| {
            let d0 = l.component(which);
            (f.component(which) / k - d0).norm() / d0.norm()
        })
        .fold(0.0, f64::max);
    (err, k)
}

/// `max_j |(D(l_j) - D0(l_j)) / D0(l_j)|` over the contour for each `v+`,
/// `D` one of the check or hat renormalizations, after removing the
/// constant normalization factor at the anchor.
pub fn convergence_error(
    v_plus: &[f64],
    base: &PhysicalParams,
    which: Normalization,
    opts: &ConvergenceOptions,
) -> Result<Vec<ConvergenceRow>> {
    let radius = opts.radius.unwrap_or_else(|| hf_radius(base).radius);
    let contour = build_semicircle(radius, opts.n_points, 0.0)?;
    let pts = contour.evaluation_points();
    let limit = limit_values(base, &contour, opts)?;
    v_plus
        .iter()
        .map(|&vp| {
            let p = base.with_v_plus(vp)?;
            let model = EvansModel::finite(&p, &opts.profile)?;
            let finite = engine::evaluate_path(&model, &pts, &opts.eval)?;
            let (err, k) = relative_error(&finite, &limit, which, opts.min_modulus);
            Ok(ConvergenceRow {
                v_plus: vp,
                b1: base.b1,
                which,
                max_rel_error: err,
                factor: [k.re, k.im],
                samples: pts.iter().filter(|z| z.norm() >= opts.min_modulus).count(),
            })
        })
        .collect()
}

/// Writes rows as a table with one line per `v+` and one column per `B1`.
pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], out: &mut W) -> Result<()> {
    let mut b1s: Vec<f64> = Vec::new();
    let mut vps: Vec<f64> = Vec::new();
    for r in rows {
        if !b1s.contains(&r.b1) {
            b1s.push(r.b1);
        }
        if !vps.contains(&r.v_plus) {
            vps.push(r.v_plus);
        }
    }
    write!(out, "v_plus")?;
    for b in &b1s {
        write!(out, ",b1={b}")?;
    }
    writeln!(out)?;
    for vp in &vps {
        write!(out, "{vp:e}")?;
        for b in &b1s {
            match rows.iter().find(|r| r.v_plus == *vp && r.b1 == *b) {
                Some(r) => write!(out, ",{:.3e}", r.max_rel_error)?,
                None => write!(out, ",")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kato::{kato_init, KatoOptions};

    fn p(b1: f64, mu0: f64, sigma: f64) -> PhysicalParams {
        PhysicalParams::new(5.0 / 3.0, 0.1, b1, mu0, sigma).unwrap()
    }

    #[test]
    fn radius_examples() {
        assert_eq!(hf_radius(&p(2.0, 1.0, 1.0)).radius, 4.5);
        assert_eq!(hf_radius(&p(0.0, 1.0, 1.0)).radius, 0.5);
        assert_eq!(hf_radius(&p(1.0, 1.0, 4.0)).radius, 4.0);
    }

    #[test]
    fn re_bound_examples() {
        assert_eq!(re_lambda_bound(&p(0.0, 1.0, 1.0)), 0.0);
        assert_eq!(re_lambda_bound(&p(2.0, 1.0, 1.0)), 1.0);
        let a = re_lambda_bound(&p(1.3, 0.7, 0.5));
        let b = re_lambda_bound(&p(1.3, 0.7, 2.0));
        assert!((b / a - 2.0).abs() < 1e-14);
    }

    #[test]
    fn bounds_monotone() {
        let mut last = (0.0, 0.0);
        for k in 0..20 {
            let b = 0.2 * k as f64;
            let q = p(b, 0.8, 1.7);
            let now = (hf_radius(&q).radius, re_lambda_bound(&q));
            assert!(now.0 >= last.0 && now.1 >= last.1);
            last = now;
        }
    }

    #[test]
    fn plus_basis_at_one() {
        let f = strong_shock_plus_basis(ONE, &p(1.0, 1.0, 1.0)).unwrap();
        assert_eq!(f.column(0).into_owned(), linalg::Vec4::new(ONE, ZERO, ZERO, ZERO));
        assert_eq!(f.column(1).into_owned(), linalg::Vec4::new(ZERO, ZERO, ONE, -ONE));
        assert!(strong_shock_plus_basis(ZERO, &p(1.0, 1.0, 1.0)).is_err());
    }

    /// Closed-form limiting vectors lie in the unstable subspace of `A_-`
    /// continued to small `lambda`.
    #[test]
    fn minus_closed_forms_match_continued_subspace() {
        for (b1, zero_mode) in [(2.0, true), (0.5, false)] {
            let q = p(b1, 1.0, 1.3);
            let (f, zm) = minus_zero_basis(&q);
            assert_eq!(zm, zero_mode);
            let l = c(1e-7);
            let proj = evans_system::limit_projector(Side::Minus, l, &q).unwrap();
            for j in 0..2 {
                let v = f.column(j).into_owned();
                let r = (proj * v - v).norm() / v.norm();
                assert!(r < 1e-5, "b1 {b1} col {j}: {r:e}");
            }
            if zero_mode {
                let a0 = evans_system::limit_matrix(Side::Minus, ZERO, &q);
                assert!((a0 * f.column(0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn r_infinity_at_anchor_is_eigenvector_determinant() {
        let q = p(2.0, 1.0, 1.0);
        let l0 = c(3.0);
        let fp = kato_init(Side::Plus, l0, &q).unwrap();
        let fm = kato_init(Side::Minus, l0, &q).unwrap();
        let v = r_infinity_value(l0, &q, &fp, &fm);
        let mut m = linalg::Mat4::zeros();
        m.fixed_view_mut::<4, 2>(0, 0).copy_from(&fp.basis);
        m.fixed_view_mut::<4, 2>(0, 2).copy_from(&fm.basis);
        assert!((v.d_raw - m.determinant()).norm() < 1e-12);
        assert!(m.rank(1e-10) == 4);
        let z = r_infinity_eval(C64::new(0.3, 0.8), &q, 3.0).unwrap();
        let zc = r_infinity_eval(C64::new(0.3, -0.8), &q, 3.0).unwrap();
        assert!((z.conj() - zc).norm() < 1e-10 * z.norm());
    }

    #[test]
    fn strong_shock_real_and_conjugate() {
        let q = p(0.5, 1.0, 1.0);
        let opts = ShootingOptions::default();
        let a = strong_shock_at(c(0.7), &q, 4.0, &opts).unwrap();
        assert!(a.d_raw.im.abs() < 1e-8 * a.d_raw.norm());
        let l = C64::new(0.4, 1.2);
        let b = strong_shock_at(l, &q, 4.0, &opts).unwrap();
        let bc = strong_shock_at(l.conj(), &q, 4.0, &opts).unwrap();
        assert!((b.d_check.conj() - bc.d_check).norm() < 1e-8 * b.d_check.norm());
    }

    #[test]
    fn branch_points_are_double_eigenvalues() {
        let q = PhysicalParams::new(5.0 / 3.0, 0.2, 0.7, 1.0, 1.0).unwrap();
        let roots = branch_points(&q).unwrap();
        assert!(!roots.is_empty());
        for r in roots.iter().filter(|r| r.norm() < 0.9) {
            let a = evans_system::limit_matrix(Side::Plus, *r, &q);
            let ev = linalg::eigenvalues(&a).unwrap();
            let mut gap = f64::INFINITY;
            for i in 0..4 {
                for j in i + 1..4 {
                    gap = gap.min((ev[i] - ev[j]).norm());
                }
            }
            assert!(gap < 1e-3, "{r}: {gap}");
        }
    }

    #[test]
    fn convergence_csv_layout() {
        let rows = vec![
            ConvergenceRow {
                v_plus: 1e-2,
                b1: 2.0,
                which: Normalization::Check,
                max_rel_error: 2.5,
                factor: [1.0, 0.0],
                samples: 3,
            },
            ConvergenceRow {
                v_plus: 1e-2,
                b1: 0.8,
                which: Normalization::Check,
                max_rel_error: 0.5,
                factor: [1.0, 0.0],
                samples: 3,
            },
        ];
        let mut out = Vec::new();
        write_convergence_csv(&rows, &mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert_eq!(s, "v_plus,b1=2,b1=0.8\n1e-2,2.500e0,5.000e-1\n");
    }

    #[test]
    fn kato_minus_frames_shared_between_models() {
        // the - side of A does not depend on v+: the same frame serves both
        let a = PhysicalParams::new(5.0 / 3.0, 0.1, 1.0, 1.0, 1.0).unwrap();
        let b = a.with_v_plus(1e-4).unwrap();
        let fa =
            crate::kato::kato_along_contour(Side::Minus, &[c(2.0), C64::new(1.0, 1.0)], &a, &KatoOptions::default())
                .unwrap();
        let fb =
            crate::kato::kato_along_contour(Side::Minus, &[c(2.0), C64::new(1.0, 1.0)], &b, &KatoOptions::default())
                .unwrap();
        assert_eq!(fa[1].basis, fb[1].basis);
    }
}
