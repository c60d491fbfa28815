//! Small dense complex linear algebra used throughout: matrix sign function,
//! eigenvalues, null spaces and thin QR of 4x2 frames.

use nalgebra::{Const, DMatrix, DimMin, SMatrix, SVector, Schur};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat<const N: usize> = SMatrix<C64, N, N>;
pub type Mat4 = SMatrix<C64, 4, 4>;
/// A 4x2 complex frame (two column vectors).
pub type Frame = SMatrix<C64, 4, 2>;
pub type Vec4 = SVector<C64, 4>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Max-column-sum norm.
pub fn norm1<const R: usize, const K: usize>(m: &SMatrix<C64, R, K>) -> f64 {
    (0..K)
        .map(|j| (0..R).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix sign function by the scaled Newton iteration
/// `S <- (g S + (g S)^-1) / 2`. Returns `None` if an iterate is singular or
/// the iteration fails to settle (eigenvalues on the imaginary axis).
pub fn matrix_sign<const N: usize>(m: &Mat<N>) -> Option<Mat<N>>
where
    Const<N>: DimMin<Const<N>, Output = Const<N>>,
{
    let mut s = *m;
    let mut scaling = true;
    for _ in 0..100 {
        let inv = s.lu().try_inverse()?;
        let g = if scaling {
            let det = s.lu().determinant().norm();
            if det > 0.0 && det.is_finite() {
                det.powf(-1.0 / N as f64)
            } else {
                1.0
            }
        } else {
            1.0
        };
        let next = (s * c(g) + inv * c(1.0 / g)) * c(0.5);
        let diff = norm1(&(next - s));
        let size = norm1(&next);
        if !size.is_finite() {
            return None;
        }
        s = next;
        if diff <= 1e-2 * size {
            scaling = false;
        }
        if diff <= 1e-14 * size {
            return Some(s);
        }
    }
    None
}

/// Diagonal scaling `t` such that `diag(t)^-1 m diag(t)` has comparable
/// off-diagonal row and column norms (Osborne iteration). Entries are powers
/// of two so that scaling is exact.
pub fn balancing_scale<const N: usize>(m: &Mat<N>) -> [f64; N] {
    let mut t = [1.0; N];
    for _ in 0..40 {
        let mut done = true;
        for i in 0..N {
            let (mut row, mut col) = (0.0, 0.0);
            for j in (0..N).filter(|&j| j != i) {
                row += m[(i, j)].norm() * t[j] / t[i];
                col += m[(j, i)].norm() * t[i] / t[j];
            }
            if row > 0.0 && col > 0.0 {
                let f = (row / col).sqrt();
                if !(0.95..=1.05).contains(&f) {
                    done = false;
                }
                t[i] *= f;
            }
        }
        if done {
            break;
        }
    }
    t.map(|x| x.log2().round().exp2())
}

/// `diag(t)^-1 m diag(t)`.
pub fn scale_similar<const N: usize>(m: &Mat<N>, t: &[f64; N]) -> Mat<N> {
    let mut out = *m;
    for i in 0..N {
        for j in 0..N {
            out[(i, j)] *= c(t[j] / t[i]);
        }
    }
    out
}

/// Eigenvalues through the complex Schur form.
pub fn eigenvalues<const N: usize>(m: &Mat<N>) -> Option<[C64; N]> {
    let dm = DMatrix::from_iterator(N, N, m.iter().copied());
    let ev = Schur::new(dm).eigenvalues()?;
    let mut out = [ZERO; N];
    for (o, e) in out.iter_mut().zip(ev.iter()) {
        *o = *e;
    }
    Some(out)
}

/// Basis of the numerical null space of `m` by Gaussian elimination with
/// full pivoting. Pivots below `rel_tol * max|m|` count as zero.
pub fn null_space<const N: usize>(m: &Mat<N>, rel_tol: f64) -> Vec<SVector<C64, N>> {
    let mut a = *m;
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return (0..N)
            .map(|i| {
                let mut e = SVector::<C64, N>::zeros();
                e[i] = ONE;
                e
            })
            .collect();
    }
    let mut cols: Vec<usize> = (0..N).collect();
    let mut rank = 0;
    for k in 0..N {
        // full pivot search in the trailing block
        let mut best = (k, k, 0.0);
        for i in k..N {
            for j in k..N {
                let v = a[(i, j)].norm();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        if best.2 <= rel_tol * scale {
            break;
        }
        a.swap_rows(k, best.0);
        a.swap_columns(k, best.1);
        cols.swap(k, best.1);
        let p = a[(k, k)];
        for j in k..N {
            a[(k, j)] /= p;
        }
        for i in 0..N {
            if i != k {
                let f = a[(i, k)];
                if f != ZERO {
                    for j in k..N {
                        let t = a[(k, j)];
                        a[(i, j)] -= f * t;
                    }
                }
            }
        }
        rank += 1;
    }
    // reduced form: [I F; 0 0] in permuted columns; null vectors [-F e_j; e_j]
    let mut basis = Vec::new();
    for free in rank..N {
        let mut v = SVector::<C64, N>::zeros();
        v[cols[free]] = ONE;
        for piv in 0..rank {
            v[cols[piv]] = -a[(piv, free)];
        }
        basis.push(v.normalize());
    }
    basis
}

/// Rotates `v` so that its first coordinate exceeding `1e-12 |v|` is real
/// positive, then normalizes to unit length.
pub fn canonical_phase<const N: usize>(v: &SVector<C64, N>) -> SVector<C64, N> {
    let n = v.norm();
    if n == 0.0 {
        return *v;
    }
    let pivot = v.iter().find(|z| z.norm() > 1e-12 * n).copied().unwrap_or(ONE);
    let phase = pivot.conj() / pivot.norm();
    v * (phase / c(n))
}

/// Thin QR of a 4x2 frame by twice-iterated Gram-Schmidt. Returns the
/// orthonormal factor and the upper-triangular 2x2 factor.
pub fn thin_qr(frame: &Frame) -> (Frame, SMatrix<C64, 2, 2>) {
    let mut q = Frame::zeros();
    let mut r = SMatrix::<C64, 2, 2>::zeros();
    let a0 = frame.column(0).into_owned();
    let n0 = a0.norm();
    let q0 = a0 / c(n0);
    r[(0, 0)] = c(n0);
    let mut a1 = frame.column(1).into_owned();
    let mut r01 = ZERO;
    for _ in 0..2 {
        let proj = q0.dotc(&a1);
        a1 -= q0 * proj;
        r01 += proj;
    }
    let n1 = a1.norm();
    r[(0, 1)] = r01;
    r[(1, 1)] = c(n1);
    q.set_column(0, &q0);
    q.set_column(1, &(a1 / c(n1)));
    (q, r)
}

/// Singular values of a 4x2 frame, largest first.
pub fn frame_singular_values(frame: &Frame) -> (f64, f64) {
    let g = frame.adjoint() * frame;
    let a = g[(0, 0)].re;
    let d = g[(1, 1)].re;
    let b = g[(0, 1)].norm();
    let tr = 0.5 * (a + d);
    let disc = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let l1 = (tr + disc).max(0.0);
    let l2 = (tr - disc).max(0.0);
    (l1.sqrt(), l2.sqrt())
}

/// Plucker coordinates of `u ^ w` in the basis `e_i ^ e_j`, `i < j`,
/// ordered (12, 13, 14, 23, 24, 34).
pub fn wedge(frame: &Frame) -> [C64; 6] {
    let u = frame.column(0);
    let w = frame.column(1);
    let p = |i: usize, j: usize| u[i] * w[j] - u[j] * w[i];
    [p(0, 1), p(0, 2), p(0, 3), p(1, 2), p(1, 3), p(2, 3)]
}

pub fn wedge_norm(w: &[C64; 6]) -> f64 {
    w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `det[a | b]` for two 4x2 frames.
pub fn det_frames(a: &Frame, b: &Frame) -> C64 {
    let mut m = Mat4::zeros();
    m.fixed_view_mut::<4, 2>(0, 0).copy_from(a);
    m.fixed_view_mut::<4, 2>(0, 2).copy_from(b);
    m.lu().determinant()
}
