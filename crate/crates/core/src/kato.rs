//! Analytic continuation of stable/unstable bases in `lambda` by Kato's ODE
//! `R' = Pi' R`, and the quartic-root regularized exterior products.

use nalgebra::{Const, DimMin, SMatrix};

use crate::error::{EvansError, Result};
use crate::evans_system::{self, limit_matrix};
use crate::linalg::{self, c, Frame, Mat, Mat4, C64, ONE, ZERO};
use crate::params::{PhysicalParams, Side};

/// Default anchor on the positive real axis.
pub const DEFAULT_ANCHOR: f64 = 10.0;

#[derive(Debug, Clone, Copy)]
pub struct KatoOptions {
    /// Projector change above which a step is refused.
    pub max_change: f64,
    /// Segments are subdivided until each substep changes the projector by
    /// at most this much.
    pub target_change: f64,
    /// Maximal bisection depth.
    pub max_depth: u32,
    /// Step-doubling extrapolation of each substep.
    pub extrapolate: bool,
}

impl Default for KatoOptions {
    fn default() -> Self {
        KatoOptions {
            max_change: 0.5,
            target_change: 0.05,
            max_depth: 12,
            extrapolate: true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KatoFrame {
    pub lambda: C64,
    pub side: Side,
    pub basis: Frame,
}

impl KatoFrame {
    pub fn wedge(&self) -> [C64; 6] {
        linalg::wedge(&self.basis)
    }

    pub fn conj(&self) -> KatoFrame {
        KatoFrame {
            lambda: self.lambda.conj(),
            side: self.side,
            basis: self.basis.map(|z| z.conj()),
        }
    }

    /// `|Pi R - R| / |R|` with the spectral projector at `self.lambda`.
    pub fn projection_residual(&self, params: &PhysicalParams) -> Result<f64> {
        let p = evans_system::limit_projector(self.side, self.lambda, params)?;
        Ok(linalg::norm1(&(p * self.basis - self.basis)) / linalg::norm1(&self.basis))
    }
}

/// Truncated `(I - D^2)^{-1/2}` applied after projection: transports the range
/// of `q` onto the range of `p` by the direct rotation between them.
fn transport<const N: usize, const K: usize>(p: &Mat<N>, q: &Mat<N>, r: &SMatrix<C64, N, K>) -> SMatrix<C64, N, K> {
    let d = p - q;
    let d2r = d * (d * r);
    let d4r = d * (d * d2r);
    p * (r + d2r * c(0.5) + d4r * c(0.375))
}

/// One step of the projector scheme from `pi_from` to `pi_to`; with
/// `pi_mid` also given, the result is extrapolated from one full and two
/// half steps.
pub fn kato_update<const N: usize, const K: usize>(
    pi_from: &Mat<N>,
    pi_mid: Option<&Mat<N>>,
    pi_to: &Mat<N>,
    r: &SMatrix<C64, N, K>,
) -> SMatrix<C64, N, K> {
    let full = transport(pi_to, pi_from, r);
    match pi_mid {
        None => full,
        Some(m) => {
            let half = transport(pi_to, m, &transport(m, pi_from, r));
            let ext = (half * c(4.0) - full) * c(1.0 / 3.0);
            pi_to * ext
        }
    }
}

/// Continues `r0` (in the range of `projector(path[0])`) along the polyline
/// `path`, returning the frame at every vertex.
pub fn kato_continue<const N: usize, const K: usize, F>(
    path: &[C64],
    r0: SMatrix<C64, N, K>,
    mut projector: F,
    opts: &KatoOptions,
) -> Result<Vec<SMatrix<C64, N, K>>>
where
    F: FnMut(C64) -> Result<Mat<N>>,
    Const<N>: DimMin<Const<N>, Output = Const<N>>,
{
    let mut out = Vec::with_capacity(path.len());
    if path.is_empty() {
        return Ok(out);
    }
    let mut r = r0;
    let mut pi = projector(path[0])?;
    out.push(r);
    for w in path.windows(2) {
        let (next_r, next_pi) = segment(w[0], w[1], r, pi, &mut projector, opts, 0)?;
        r = next_r;
        pi = next_pi;
        out.push(r);
    }
    Ok(out)
}

fn segment<const N: usize, const K: usize, F>(
    a: C64,
    b: C64,
    r: SMatrix<C64, N, K>,
    pi_a: Mat<N>,
    projector: &mut F,
    opts: &KatoOptions,
    depth: u32,
) -> Result<(SMatrix<C64, N, K>, Mat<N>)>
where
    F: FnMut(C64) -> Result<Mat<N>>,
{
    if a == b {
        return Ok((r, pi_a));
    }
    let pi_b = projector(b)?;
    let change = linalg::norm1(&(pi_b - pi_a));
    if change > opts.target_change || change > opts.max_change {
        if depth >= opts.max_depth {
            if change > opts.max_change {
                return Err(EvansError::StepTooLarge { from: a, to: b, change });
            }
        } else {
            let m = (a + b) * c(0.5);
            let (rm, pi_m) = segment(a, m, r, pi_a, projector, opts, depth + 1)?;
            return segment(m, b, rm, pi_m, projector, opts, depth + 1);
        }
    }
    let next = if opts.extrapolate {
        let pi_m = projector((a + b) * c(0.5))?;
        kato_update(&pi_a, Some(&pi_m), &pi_b, &r)
    } else {
        kato_update(&pi_a, None, &pi_b, &r)
    };
    Ok((next, pi_b))
}

/// Kato continuation of a frame of `A_side` along `path`. Kato's ODE is
/// invariant under constant similarities, so every path segment is solved
/// in coordinates balanced at its start; near the origin the projectors in
/// the original coordinates can have norms in the thousands.
fn balanced_continue(
    side: Side,
    path: &[C64],
    r0: Frame,
    params: &PhysicalParams,
    opts: &KatoOptions,
) -> Result<Vec<Frame>> {
    let mut out = Vec::with_capacity(path.len());
    if path.is_empty() {
        return Ok(out);
    }
    let mut r = r0;
    out.push(r);
    for w in path.windows(2) {
        let t = linalg::balancing_scale(&limit_matrix(side, w[0], params));
        let scaled = r.map_with_location(|i, _, z| z / c(t[i]));
        let next = kato_continue(
            w,
            scaled,
            |l| evans_system::spectral_projector(&linalg::scale_similar(&limit_matrix(side, l, params), &t), side, l),
            opts,
        )?[1];
        r = next.map_with_location(|i, _, z| z * c(t[i]));
        out.push(r);
    }
    Ok(out)
}

/// Eigenvector basis of the selected subspace of `A_+-(lambda0)`.
pub fn kato_init(side: Side, lambda0: C64, params: &PhysicalParams) -> Result<KatoFrame> {
    if !(lambda0.re > 0.0) {
        return Err(EvansError::Domain(format!(
            "Kato anchor must have positive real part, got {lambda0}"
        )));
    }
    let a = limit_matrix(side, lambda0, params);
    let split = evans_system::spectral_split(&a, side, lambda0, evans_system::SPLIT_TOL)?;
    // project once so that Pi R = R holds to rounding
    let p = evans_system::spectral_projector(&a, side, lambda0)?;
    Ok(KatoFrame {
        lambda: lambda0,
        side,
        basis: p * split.vectors,
    })
}

/// Single continuation step from `frame.lambda` to `lambda_next`; fails with
/// `StepTooLarge` instead of subdividing.
pub fn kato_step(frame: &KatoFrame, lambda_next: C64, params: &PhysicalParams) -> Result<KatoFrame> {
    let opts = KatoOptions {
        target_change: KatoOptions::default().max_change,
        max_depth: 0,
        ..Default::default()
    };
    let side = frame.side;
    let out = balanced_continue(side, &[frame.lambda, lambda_next], frame.basis, params, &opts)?;
    Ok(KatoFrame {
        lambda: lambda_next,
        side,
        basis: out[1],
    })
}

/// Frames at every point of `contour`, initialized at its first point.
pub fn kato_along_contour(
    side: Side,
    contour: &[C64],
    params: &PhysicalParams,
    opts: &KatoOptions,
) -> Result<Vec<KatoFrame>> {
    let Some(&first) = contour.first() else {
        return Ok(Vec::new());
    };
    let init = kato_init(side, first, params)?;
    continue_frame(&init, contour, params, opts)
}

/// Continues an existing frame along `path`; `path[0]` must equal
/// `frame.lambda`.
pub fn continue_frame(
    frame: &KatoFrame,
    path: &[C64],
    params: &PhysicalParams,
    opts: &KatoOptions,
) -> Result<Vec<KatoFrame>> {
    let side = frame.side;
    let bases = balanced_continue(side, path, frame.basis, params, opts)?;
    Ok(path
        .iter()
        .zip(bases)
        .map(|(&lambda, basis)| KatoFrame { lambda, side, basis })
        .collect())
}

/// Frames along `contour`, anchored at the real point `anchor` and brought
/// to `contour[0]` along the straight segment. Two contours sharing an
/// anchor yield frames of one global analytic solution.
pub fn kato_anchored(
    side: Side,
    anchor: f64,
    contour: &[C64],
    params: &PhysicalParams,
    opts: &KatoOptions,
) -> Result<Vec<KatoFrame>> {
    let Some(&first) = contour.first() else {
        return Ok(Vec::new());
    };
    let init = kato_init(side, c(anchor), params)?;
    let start = continue_frame(&init, &[c(anchor), first], params, opts)?[1];
    continue_frame(&start, contour, params, opts)
}

/// Projector onto the invariant subspace of the eigenvalues `selected`
/// (complement `others`) as a polynomial in `m`:
/// `Pi = p(m) g(m)` with `p` vanishing on `others` and `g` interpolating
/// `1/p` on `selected` (Hermite when the pair is close).
pub fn group_projector(m: &Mat4, selected: [C64; 2], others: [C64; 2]) -> Mat4 {
    let id = Mat4::identity();
    let p = |z: C64| (z - others[0]) * (z - others[1]);
    let dp = |z: C64| (z - others[0]) + (z - others[1]);
    let [a1, a2] = selected;
    let u = ONE / p(a1);
    let scale = a1.norm().max(a2.norm()).max(1.0);
    let w = if (a2 - a1).norm() > 1e-6 * scale {
        (ONE / p(a2) - u) / (a2 - a1)
    } else {
        -dp(a1) / (p(a1) * p(a1))
    };
    let pm = (m - id * others[0]) * (m - id * others[1]);
    let gm = id * u + (m - id * a1) * w;
    pm * gm
}

/// Tracks an eigenvalue pair of `A_side(lambda)` by nearest matching and
/// returns the projector together with the matched pair. Valid beyond the
/// region where the pair is singled out by the sign of the real part.
pub fn tracked_projector(
    side: Side,
    lambda: C64,
    previous: [C64; 2],
    params: &PhysicalParams,
) -> Result<(Mat4, [C64; 2])> {
    let a = limit_matrix(side, lambda, params);
    let ev = linalg::eigenvalues(&a).ok_or(EvansError::SplitFailure { lambda, gap: 0.0 })?;
    let mut best = (f64::INFINITY, 0usize, 1usize);
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            let d = (ev[i] - previous[0]).norm() + (ev[j] - previous[1]).norm();
            let tie = d == best.0 && ev[i].im < ev[best.1].im;
            if d < best.0 || tie {
                best = (d, i, j);
            }
        }
    }
    let sel = [ev[best.1], ev[best.2]];
    let others: Vec<C64> = (0..4).filter(|&k| k != best.1 && k != best.2).map(|k| ev[k]).collect();
    let oth = [others[0], others[1]];
    let min_sep = sel
        .iter()
        .flat_map(|s| oth.iter().map(move |o| (s - o).norm()))
        .fold(f64::INFINITY, f64::min);
    if min_sep < 1e-10 * linalg::norm1(&a).max(1.0) {
        return Err(EvansError::SplitFailure { lambda, gap: min_sep });
    }
    Ok((group_projector(&a, sel, oth), sel))
}

/// Continuation along an arbitrary path with the eigenvalue pair tracked by
/// continuity instead of by sign of real part. The path is resampled so that
/// consecutive points are at most `max_step` apart.
pub fn kato_tracked(
    frame: &KatoFrame,
    path: &[C64],
    params: &PhysicalParams,
    max_step: f64,
    opts: &KatoOptions,
) -> Result<Vec<KatoFrame>> {
    let side = frame.side;
    let a0 = limit_matrix(side, frame.lambda, params);
    let split = evans_system::spectral_split(&a0, side, frame.lambda, 0.0)?;
    let mut pair = split.selected;
    let mut out = vec![*frame];
    let mut r = frame.basis;
    let mut pi = group_projector(&a0, split.selected, split.complement);
    for w in path.windows(2) {
        let n = ((w[1] - w[0]).norm() / max_step).ceil().max(1.0) as usize;
        for k in 1..=n {
            let from = w[0] + (w[1] - w[0]) * c((k - 1) as f64 / n as f64);
            let to = w[0] + (w[1] - w[0]) * c(k as f64 / n as f64);
            // the pair is tracked on the fine grid so bisection stays consistent
            let (pi_to, pair_to) = tracked_projector(side, to, pair, params)?;
            let mid = (from + to) * c(0.5);
            let (pi_mid, _) = tracked_projector(side, mid, pair, params)?;
            let change = linalg::norm1(&(pi_to - pi));
            if change > opts.max_change {
                return Err(EvansError::StepTooLarge { from, to, change });
            }
            r = if opts.extrapolate {
                kato_update(&pi, Some(&pi_mid), &pi_to, &r)
            } else {
                kato_update(&pi, None, &pi_to, &r)
            };
            pi = pi_to;
            pair = pair_to;
        }
        out.push(KatoFrame {
            lambda: w[1],
            side,
            basis: r,
        });
    }
    Ok(out)
}

/// Coefficient `c = (mu / v + 1 / (sigma mu0 v^2)) / 2` at the endstate.
pub fn diffusion_coefficient(side: Side, params: &PhysicalParams) -> f64 {
    let v = params.endstate(side);
    0.5 * (params.mu / v + 1.0 / (params.sigma * params.mu0 * v * v))
}

/// Radicand `(1 - B1 / sqrt(mu0 v))^2 + 4 lambda c` of the quartic-root
/// regularization on `side`.
pub fn regularization_radicand(side: Side, lambda: C64, params: &PhysicalParams) -> C64 {
    let v = params.endstate(side);
    let d = 1.0 - params.b1 / (params.mu0 * v).sqrt();
    c(d * d) + lambda * c(4.0 * diffusion_coefficient(side, params))
}

/// Continuous branch of `z^p` along a sequence of arguments, starting from
/// the principal branch; refuses argument jumps of pi or more.
#[derive(Debug, Clone, Copy)]
pub struct ContinuedPower {
    exponent: f64,
    arg: f64,
    started: bool,
}

impl ContinuedPower {
    pub fn new(exponent: f64) -> Self {
        ContinuedPower {
            exponent,
            arg: 0.0,
            started: false,
        }
    }

    pub fn quartic() -> Self {
        ContinuedPower::new(0.25)
    }

    /// Continuous argument of the latest input.
    pub fn arg(&self) -> f64 {
        self.arg
    }

    pub fn next(&mut self, z: C64) -> Result<C64> {
        use std::f64::consts::{PI, TAU};
        let a = z.arg();
        if !self.started {
            self.arg = a;
            self.started = true;
        } else {
            let d = (a - self.arg + PI).rem_euclid(TAU) - PI;
            if d.abs() >= PI - 1e-12 {
                return Err(EvansError::Domain("branch jump of pi along continuation".into()));
            }
            self.arg += d;
        }
        Ok(C64::from_polar(z.norm().powf(self.exponent), self.arg * self.exponent))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RegularizedProduct {
    pub lambda: C64,
    pub wedge: [C64; 6],
    pub prefactor: C64,
    pub regularized: [C64; 6],
}

/// `R1 ^ R2` times `(radicand(lambda) / radicand(1))^(1/4)`, the root on the
/// principal branch.
pub fn regularized_product(frame: &KatoFrame, params: &PhysicalParams) -> RegularizedProduct {
    let num = regularization_radicand(frame.side, frame.lambda, params);
    let den = regularization_radicand(frame.side, ONE, params);
    let prefactor = (num / den).powf(0.25);
    regularized_with(frame, prefactor)
}

/// Regularized products along a contour with the quartic root continued.
pub fn regularized_along(frames: &[KatoFrame], params: &PhysicalParams) -> Result<Vec<RegularizedProduct>> {
    let mut root = ContinuedPower::quartic();
    let mut out = Vec::with_capacity(frames.len());
    for f in frames {
        let den = regularization_radicand(f.side, ONE, params);
        let z = regularization_radicand(f.side, f.lambda, params) / den;
        out.push(regularized_with(f, root.next(z)?));
    }
    Ok(out)
}

fn regularized_with(frame: &KatoFrame, prefactor: C64) -> RegularizedProduct {
    let wedge = frame.wedge();
    let mut regularized = [ZERO; 6];
    for (r, w) in regularized.iter_mut().zip(wedge) {
        *r = w * prefactor;
    }
    RegularizedProduct {
        lambda: frame.lambda,
        wedge,
        prefactor,
        regularized,
    }
}
