//! First-order form `W' = A(x, lambda) W` of the transverse eigenvalue
//! equations in the coordinates `(w, mu w', alpha, alpha' / (sigma mu0 v))`,
//! its limits at `x -> +-inf`, and their stable/unstable splitting.

use crate::error::{EvansError, Result};
use crate::linalg::{self, c, canonical_phase, Frame, Mat4, C64, ONE, ZERO};
use crate::params::{PhysicalParams, Side};
use crate::profile::DensityProfile;

/// Default lower bound on `min |Re alpha|` accepted by [`spectral_split`].
pub const SPLIT_TOL: f64 = 1e-10;

/// Coefficient matrix for density value `v`.
pub fn coefficient_matrix(v: f64, lambda: C64, p: &PhysicalParams) -> Mat4 {
    let mu = p.mu;
    let smu0 = p.sigma * p.mu0;
    let lv = lambda * v;
    Mat4::new(
        ZERO,
        c(1.0 / mu),
        ZERO,
        ZERO,
        lv,
        c(v / mu),
        ZERO,
        c(-p.sigma * p.b1 * v),
        ZERO,
        ZERO,
        ZERO,
        c(smu0 * v),
        ZERO,
        c(-p.b1 * v / mu),
        lv,
        c(smu0 * v * v),
    )
}

#[derive(Debug, Clone, Copy)]
pub struct EvansMatrix {
    pub entries: Mat4,
    pub x: f64,
    pub lambda: C64,
}

/// `A(x, lambda)` with the density taken from `profile` (clamped to the
/// endstates outside its domain).
pub fn assemble<P: DensityProfile + ?Sized>(x: f64, lambda: C64, params: &PhysicalParams, profile: &P) -> EvansMatrix {
    EvansMatrix {
        entries: coefficient_matrix(profile.density(x), lambda, params),
        x,
        lambda,
    }
}

/// `A_+-(lambda)`, the constant limit with `v = v+` or `v = 1`.
pub fn limit_matrix(side: Side, lambda: C64, params: &PhysicalParams) -> Mat4 {
    coefficient_matrix(params.endstate(side), lambda, params)
}

/// Eigen-data of one limit matrix: all eigenvalues sorted by real part, and
/// the two selected ones (stable for `+`, unstable for `-`) with eigenvectors.
#[derive(Debug, Clone, Copy)]
pub struct SplitEntry {
    pub side: Side,
    pub eigenvalues: [C64; 4],
    pub selected: [C64; 2],
    pub complement: [C64; 2],
    /// Columns span the selected invariant subspace; unit length, canonical phase.
    pub vectors: Frame,
    /// Smallest `|Re alpha|` over all four eigenvalues.
    pub gap: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct LimitDecomposition {
    pub lambda: C64,
    pub a_plus: Mat4,
    pub a_minus: Mat4,
    pub stable_plus: SplitEntry,
    pub unstable_minus: SplitEntry,
}

pub fn limit_decomposition(lambda: C64, params: &PhysicalParams, split_tol: f64) -> Result<LimitDecomposition> {
    let a_plus = limit_matrix(Side::Plus, lambda, params);
    let a_minus = limit_matrix(Side::Minus, lambda, params);
    Ok(LimitDecomposition {
        lambda,
        a_plus,
        a_minus,
        stable_plus: spectral_split(&a_plus, Side::Plus, lambda, split_tol)?,
        unstable_minus: spectral_split(&a_minus, Side::Minus, lambda, split_tol)?,
    })
}

/// Splits the spectrum of a limit matrix into the two stable (`Side::Plus`)
/// or two unstable (`Side::Minus`) eigenvalues and an eigenbasis for them.
///
/// `lambda` is only used for error reporting and for choosing a real basis
/// when `lambda` is real.
pub fn spectral_split(matrix: &Mat4, side: Side, lambda: C64, split_tol: f64) -> Result<SplitEntry> {
    let mut ev = linalg::eigenvalues(matrix).ok_or(EvansError::SplitFailure { lambda, gap: 0.0 })?;
    ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    let gap = ev.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min);
    let negatives = ev.iter().filter(|z| z.re < 0.0).count();
    if gap < split_tol || negatives != 2 {
        return Err(EvansError::SplitFailure { lambda, gap });
    }
    let (selected, complement) = match side {
        Side::Plus => ([ev[0], ev[1]], [ev[2], ev[3]]),
        Side::Minus => ([ev[2], ev[3]], [ev[0], ev[1]]),
    };
    let vectors = eigenbasis(matrix, side, &selected, lambda)?;
    Ok(SplitEntry {
        side,
        eigenvalues: ev,
        selected,
        complement,
        vectors,
        gap,
    })
}

fn eigenbasis(matrix: &Mat4, side: Side, selected: &[C64; 2], lambda: C64) -> Result<Frame> {
    let scale = linalg::norm1(matrix).max(1e-300);
    let id = Mat4::identity();
    let [a1, a2] = *selected;
    let mut cols = Vec::with_capacity(2);
    if (a1 - a2).norm() > 1e-7 * scale {
        for a in [a1, a2] {
            let ns = linalg::null_space(&(matrix - id * a), 1e-10);
            if let Some(v) = ns.first() {
                cols.push(*v);
            }
        }
    } else {
        cols = linalg::null_space(&(matrix - id * ((a1 + a2) * c(0.5))), 1e-7);
    }

    let mut frame = Frame::zeros();
    let usable = cols.len() >= 2 && {
        frame.set_column(0, &cols[0]);
        frame.set_column(1, &cols[1]);
        let (s1, s2) = linalg::frame_singular_values(&frame);
        s2 > 1e-8 * s1
    };
    if !usable {
        // defective or ill-conditioned pair: take a basis of the projector range
        frame = projector_range_basis(&spectral_projector(matrix, side, lambda)?);
    }

    // at real lambda use a real basis for a conjugate pair
    let real_lambda = lambda.im == 0.0;
    if real_lambda && a1.im != 0.0 && (a1 - a2.conj()).norm() <= 1e-10 * scale {
        let v = canonical_phase(&frame.column(0).into_owned());
        let re = v.map(|z| c(z.re));
        let im = v.map(|z| c(z.im));
        frame.set_column(0, &re);
        frame.set_column(1, &im);
    }
    for j in 0..2 {
        let v = canonical_phase(&frame.column(j).into_owned());
        frame.set_column(j, &v);
    }
    Ok(frame)
}

/// Two columns of a rank-2 projector spanning its range, picked greedily by norm.
pub fn projector_range_basis(proj: &Mat4) -> Frame {
    let norms: Vec<f64> = (0..4).map(|j| proj.column(j).norm()).collect();
    let first = (0..4)
        .max_by(|&i, &j| norms[i].partial_cmp(&norms[j]).unwrap())
        .unwrap();
    let u = proj.column(first).into_owned();
    let un = u / c(u.norm());
    let second = (0..4)
        .filter(|&j| j != first)
        .max_by(|&i, &j| {
            let ri = (proj.column(i) - un * un.dotc(&proj.column(i))).norm();
            let rj = (proj.column(j) - un * un.dotc(&proj.column(j))).norm();
            ri.partial_cmp(&rj).unwrap()
        })
        .unwrap();
    let mut f = Frame::zeros();
    f.set_column(0, &u);
    f.set_column(1, &proj.column(second).into_owned());
    f
}

/// Spectral projector onto the stable (`+`) or unstable (`-`) subspace of a
/// hyperbolic matrix, `(I -+ sign(A)) / 2`.
pub fn spectral_projector(matrix: &Mat4, side: Side, lambda: C64) -> Result<Mat4> {
    let s = linalg::matrix_sign(matrix).ok_or(EvansError::SplitFailure { lambda, gap: 0.0 })?;
    let id = Mat4::identity();
    Ok(match side {
        Side::Plus => (id - s) * c(0.5),
        Side::Minus => (id + s) * c(0.5),
    })
}

/// Projector for the limit matrix on `side` at `lambda`.
pub fn limit_projector(side: Side, lambda: C64, params: &PhysicalParams) -> Result<Mat4> {
    spectral_projector(&limit_matrix(side, lambda, params), side, lambda)
}

/// Closed-form characteristic polynomial `det(A_+ - alpha I)` for `mu = 1`:
/// `(a^2 - v a - l v)(a^2 - s m v^2 a - l s m v^2) - s B^2 v^2 a^2`.
pub fn char_poly_closed_form(alpha: C64, lambda: C64, v: f64, params: &PhysicalParams) -> C64 {
    let sm = params.sigma * params.mu0;
    let q1 = alpha * alpha - alpha * v - lambda * v;
    let q2 = alpha * alpha - alpha * (sm * v * v) - lambda * (sm * v * v);
    q1 * q2 - alpha * alpha * (params.sigma * params.b1 * params.b1 * v * v)
}

/// Balancing similarity `diag(v+^(1/2), 1, 1, 1)` used in the strong-shock
/// expansion at `+inf`.
pub fn balance(matrix: &Mat4, v_plus: f64) -> Mat4 {
    let t = v_plus.sqrt();
    let mut m = *matrix;
    for j in 0..4 {
        m[(0, j)] *= c(t);
    }
    for i in 0..4 {
        m[(i, 0)] /= c(t);
    }
    m * c(1.0 / t)
}

#[allow(dead_code)]
fn unit(i: usize) -> linalg::Vec4 {
    let mut e = linalg::Vec4::zeros();
    e[i] = ONE;
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{compute_profile, ProfileOptions};

    fn params(vp: f64, b1: f64) -> PhysicalParams {
        PhysicalParams::new(5.0 / 3.0, vp, b1, 1.0, 1.0).unwrap()
    }

    #[test]
    fn sparsity_and_lambda_zero_kernel() {
        let p = params(0.3, 1.3);
        let a = coefficient_matrix(0.6, C64::new(0.7, -0.4), &p);
        assert_eq!(a[(0, 0)], ZERO);
        assert_eq!(a[(0, 1)], c(1.0));
        for (i, j) in [(0, 2), (0, 3), (2, 0), (2, 1), (3, 0)] {
            assert_eq!(a[(i, j)], ZERO, "({i},{j})");
        }
        let a0 = coefficient_matrix(0.6, ZERO, &p);
        assert!((a0 * unit(0)).norm() == 0.0);
        assert!((a0 * unit(2)).norm() == 0.0);
    }

    #[test]
    fn clamped_assembly_matches_limit() {
        let p = params(0.4, 0.9);
        let prof = compute_profile(&p, &ProfileOptions::default()).unwrap();
        let l = C64::new(1.2, 0.3);
        let a = assemble(prof.l_plus + 10.0, l, &p, &prof).entries;
        assert_eq!(a, limit_matrix(Side::Plus, l, &p));
        let a = assemble(-prof.l_minus - 10.0, l, &p, &prof).entries;
        assert_eq!(a, limit_matrix(Side::Minus, l, &p));
    }

    #[test]
    fn decoupled_when_b1_zero() {
        let p = params(0.5, 0.0);
        let a = limit_matrix(Side::Minus, ONE, &p);
        assert_eq!(a[(1, 3)], ZERO);
        assert_eq!(a[(3, 1)], ZERO);
    }

    #[test]
    fn split_counts_and_quadratic_roots() {
        let p = params(0.5, 0.0);
        let a = limit_matrix(Side::Plus, ONE, &p);
        let e = spectral_split(&a, Side::Plus, ONE, SPLIT_TOL).unwrap();
        assert_eq!(e.eigenvalues.iter().filter(|z| z.re < 0.0).count(), 2);
        // roots of a^2 - v a - l v and a^2 - s m v^2 a - l s m v^2 with v = 1/2, l = 1
        let v = 0.5f64;
        let mut expect = vec![
            0.5 * (v + (v * v + 4.0 * v).sqrt()),
            0.5 * (v - (v * v + 4.0 * v).sqrt()),
            0.5 * (v * v + (v.powi(4) + 4.0 * v * v).sqrt()),
            0.5 * (v * v - (v.powi(4) + 4.0 * v * v).sqrt()),
        ];
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in e.eigenvalues.iter().zip(expect) {
            assert!((got - c(want)).norm() < 1e-12, "{got} {want}");
        }
        // eigenvectors are eigenvectors
        for j in 0..2 {
            let v = e.vectors.column(j).into_owned();
            let r = a * v - v * e.selected[j];
            assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn char_poly_identity() {
        let p = params(0.37, 1.7);
        let l = C64::new(0.3, 2.1);
        for alpha in [C64::new(0.2, -0.4), c(3.0), C64::new(-1.1, 0.9)] {
            let a = limit_matrix(Side::Plus, l, &p);
            let det = (a - Mat4::identity() * alpha).lu().determinant();
            let closed = char_poly_closed_form(alpha, l, 0.37, &p);
            assert!((det - closed).norm() <= 1e-12 * closed.norm().max(1.0));
        }
    }

    #[test]
    fn conjugation_symmetry() {
        let p = params(0.2, 2.0);
        let l = C64::new(0.8, 1.9);
        for side in [Side::Plus, Side::Minus] {
            assert_eq!(
                limit_matrix(side, l.conj(), &p),
                limit_matrix(side, l, &p).map(|z| z.conj())
            );
        }
    }

    #[test]
    fn projector_matches_eigenvectors() {
        let p = params(0.1, 0.7);
        let l = C64::new(0.4, 0.9);
        for side in [Side::Plus, Side::Minus] {
            let a = limit_matrix(side, l, &p);
            let e = spectral_split(&a, side, l, SPLIT_TOL).unwrap();
            let proj = spectral_projector(&a, side, l).unwrap();
            assert!(linalg::norm1(&(proj * proj - proj)) < 1e-10);
            assert!(linalg::norm1(&(proj * e.vectors - e.vectors)) < 1e-10);
            assert!((proj.trace() - c(2.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn split_fails_at_origin() {
        let p = params(0.3, 0.4);
        let a = limit_matrix(Side::Minus, ZERO, &p);
        assert!(matches!(
            spectral_split(&a, Side::Minus, ZERO, SPLIT_TOL),
            Err(EvansError::SplitFailure { .. })
        ));
    }

    #[test]
    fn double_eigenvalue_pair_still_splits() {
        // B1 = 0, v = 1, sigma mu0 = 1: the two quadratics coincide
        let p = PhysicalParams::new(5.0 / 3.0, 0.5, 0.0, 1.0, 1.0).unwrap();
        let a = limit_matrix(Side::Minus, ONE, &p);
        let e = spectral_split(&a, Side::Minus, ONE, SPLIT_TOL).unwrap();
        let (s1, s2) = linalg::frame_singular_values(&e.vectors);
        assert!(s2 > 1e-6 * s1);
        let proj = spectral_projector(&a, Side::Minus, ONE).unwrap();
        assert!(linalg::norm1(&(proj * e.vectors - e.vectors)) < 1e-10);
    }

    #[test]
    fn balancing_is_similarity() {
        let p = params(0.01, 2.0);
        let a = limit_matrix(Side::Plus, c(2.0), &p);
        let b = balance(&a, 0.01) * c(0.01f64.sqrt());
        let ea = spectral_split(&a, Side::Plus, c(2.0), SPLIT_TOL).unwrap();
        let eb = linalg::eigenvalues(&b).unwrap();
        for x in ea.eigenvalues {
            assert!(eb.iter().any(|y| (x - y).norm() < 1e-10));
        }
    }
}
