//! Contours, argument tracking with a posteriori refinement, winding numbers,
//! and multi-sheet loops for functions with fractional-power branch points.
//!
//! A semicircle is stored as its upper half, from `Lambda` along the arc to
//! `i Lambda` and down the imaginary axis to `0` (or around a small quarter
//! circle to `eps`). The lower half is its mirror image; values there follow
//! from conjugation symmetry.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{self, EvalOptions, EvansModel};
use crate::error::{EvansError, Result};
use crate::kato::KatoFrame;
use crate::linalg::{c, C64, ZERO};
use crate::shooting::{EvansValue, Normalization};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ContourKind {
    Semicircle { offset: f64 },
    Circle { center: [f64; 2], radius: f64, sheets: u32 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Contour {
    /// Upper half for semicircles, the full loop otherwise.
    pub points: Vec<C64>,
    pub radius: f64,
    pub kind: ContourKind,
    /// The lower half is implied by conjugation.
    pub half: bool,
}

impl Contour {
    /// Points that are actually evaluated (the origin is skipped).
    pub fn evaluation_points(&self) -> Vec<C64> {
        self.points.iter().copied().filter(|z| *z != ZERO).collect()
    }

    /// The closed loop, counterclockwise, ending where it starts.
    pub fn full_points(&self) -> Vec<C64> {
        if !self.half {
            return self.points.clone();
        }
        let mut out = self.points.clone();
        out.extend(self.points.iter().rev().skip(1).map(|z| z.conj()));
        out
    }
}

/// Upper half of `d(B(0, radius) & {Re >= 0})` with `n_points` points on the
/// full contour. Arc points are evenly spaced; imaginary-axis points are
/// spaced quadratically towards the origin. With `offset > 0` the axis ends
/// at `i offset` and a quarter circle of radius `offset` leads to `offset`.
pub fn build_semicircle(radius: f64, n_points: usize, offset: f64) -> Result<Contour> {
    if !(radius > offset && offset >= 0.0) {
        return Err(EvansError::Domain(format!(
            "semicircle needs radius > offset >= 0, got {radius}, {offset}"
        )));
    }
    let detour = if offset > 0.0 { 4 } else { 0 };
    let min_points = 8 + 2 * detour;
    if n_points < min_points {
        return Err(EvansError::Domain(format!(
            "semicircle needs at least {min_points} points"
        )));
    }
    let m = n_points / 2;
    let h = radius / 20.0;
    let w_arc = FRAC_PI_2 * radius / (radius + h);
    let w_axis = ((radius + h) / (offset + h)).ln();
    let avail = m - detour;
    let n_arc = ((avail as f64 * w_arc / (w_arc + w_axis)).round() as usize).clamp(2, avail - 2);
    let n_axis = avail - n_arc;

    let mut pts = Vec::with_capacity(m + 1);
    for k in 0..=n_arc {
        pts.push(C64::from_polar(radius, FRAC_PI_2 * k as f64 / n_arc as f64));
    }
    // exact endpoints
    pts[0] = c(radius);
    pts[n_arc] = C64::new(0.0, radius);
    for k in (0..n_axis).rev() {
        let s = k as f64 / n_axis as f64;
        pts.push(C64::new(0.0, offset + (radius - offset) * s * s));
    }
    if offset > 0.0 {
        for k in 1..=detour {
            let t = FRAC_PI_2 * (1.0 - k as f64 / detour as f64);
            pts.push(C64::from_polar(offset, t));
        }
        let last = pts.len() - 1;
        pts[last] = c(offset);
    }
    Ok(Contour {
        points: pts,
        radius,
        kind: ContourKind::Semicircle { offset },
        half: true,
    })
}

/// `sheets` traversals of a circle, `n_per_sheet` points each, closed.
pub fn build_circle(center: C64, radius: f64, n_per_sheet: usize, sheets: u32) -> Contour {
    let n = n_per_sheet * sheets as usize;
    let points = (0..=n)
        .map(|k| center + C64::from_polar(radius, TAU * sheets as f64 * k as f64 / n as f64))
        .collect();
    Contour {
        points,
        radius,
        kind: ContourKind::Circle {
            center: [center.re, center.im],
            radius,
            sheets,
        },
        half: false,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WindingOptions {
    /// Largest accepted argument change between neighbouring samples.
    pub max_arg_step: f64,
    /// Maximal number of inserted points.
    pub refine_limit: usize,
    /// Values of smaller modulus count as zeros on the contour.
    pub zero_guard: f64,
}

impl Default for WindingOptions {
    fn default() -> Self {
        WindingOptions {
            max_arg_step: 0.2,
            refine_limit: 1 << 10,
            zero_guard: 1e-280,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContourResult {
    /// Closed loop of samples (first point repeated at the end).
    pub points: Vec<C64>,
    pub values: Vec<C64>,
    /// Full Evans values when the samples come from a model.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evans: Vec<EvansValue>,
    pub arg_track: Vec<f64>,
    pub winding: i64,
    pub max_arg_step: f64,
    pub refinements: usize,
    pub conjugate_completed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
}

fn step_arg(a: C64, b: C64) -> f64 {
    (b / a).arg()
}

fn check_values(points: &[C64], values: &[C64], guard: f64) -> Result<()> {
    for (z, v) in points.iter().zip(values) {
        if !(v.norm() > guard) || !v.re.is_finite() || !v.im.is_finite() {
            return Err(EvansError::ZeroOnContour { lambda: *z });
        }
    }
    Ok(())
}

/// Continuous argument along `values`, starting from the principal value.
pub fn unwind(values: &[C64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let Some(first) = values.first() else {
        return out;
    };
    let mut acc = first.arg();
    out.push(acc);
    for w in values.windows(2) {
        acc += step_arg(w[0], w[1]);
        out.push(acc);
    }
    out
}

fn finish(
    points: Vec<C64>,
    values: Vec<C64>,
    evans: Vec<EvansValue>,
    refinements: usize,
    conjugate_completed: bool,
    normalization: Option<Normalization>,
) -> ContourResult {
    let arg_track = unwind(&values);
    let total = arg_track.last().unwrap() - arg_track[0];
    let max_arg_step = arg_track.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    ContourResult {
        points,
        values,
        evans,
        arg_track,
        winding: (total / TAU).round() as i64,
        max_arg_step,
        refinements,
        conjugate_completed,
        normalization,
    }
}

fn midpoint(a: C64, b: C64) -> C64 {
    let m = (a + b) * c(0.5);
    // keep arc midpoints on the arc
    let (ra, rb) = (a.norm(), b.norm());
    if (ra - rb).abs() <= 1e-12 * ra.max(rb) && ra > 0.0 && m.norm() > 0.0 {
        m * c(ra / m.norm())
    } else {
        m
    }
}

/// Winding number of `eval` around the closed polyline `points` (the loop is
/// closed implicitly if the last point differs from the first). `eval` maps
/// a batch of points to values; midpoints are inserted until every argument
/// step is below the threshold.
pub fn winding_number<F>(points: &[C64], mut eval: F, opts: &WindingOptions) -> Result<ContourResult>
where
    F: FnMut(&[C64]) -> Result<Vec<C64>>,
{
    let mut pts: Vec<C64> = points.to_vec();
    if pts.first() != pts.last() {
        pts.push(pts[0]);
    }
    let n0 = pts.len() - 1;
    let mut vals = eval(&pts[..n0])?;
    vals.push(vals[0]);
    check_values(&pts, &vals, opts.zero_guard)?;
    let mut inserted = 0usize;
    loop {
        let bad: Vec<usize> = (0..pts.len() - 1)
            .filter(|&k| step_arg(vals[k], vals[k + 1]).abs() >= opts.max_arg_step)
            .collect();
        if bad.is_empty() {
            break;
        }
        if inserted + bad.len() > opts.refine_limit {
            return Err(EvansError::RefinementExhausted {
                insertions: inserted,
                max_step: bad
                    .iter()
                    .map(|&k| step_arg(vals[k], vals[k + 1]).abs())
                    .fold(0.0, f64::max),
            });
        }
        let mids: Vec<C64> = bad.iter().map(|&k| midpoint(pts[k], pts[k + 1])).collect();
        let new_vals = eval(&mids)?;
        check_values(&mids, &new_vals, opts.zero_guard)?;
        for (j, &k) in bad.iter().enumerate().rev() {
            pts.insert(k + 1, mids[j]);
            vals.insert(k + 1, new_vals[j]);
        }
        inserted += bad.len();
    }
    Ok(finish(pts, vals, Vec::new(), inserted, false, None))
}

/// Multi-sheet winding: `contour` must be a circle built with `sheets`
/// traversals. The evaluator sees the whole ordered path each time (so it
/// can carry branch state); the sampling is doubled until every argument
/// step is below the threshold.
pub fn riemann_winding<F>(
    center: C64,
    radius: f64,
    sheets: u32,
    n_per_sheet: usize,
    mut eval: F,
    opts: &WindingOptions,
) -> Result<ContourResult>
where
    F: FnMut(&[C64]) -> Result<Vec<C64>>,
{
    let mut n = n_per_sheet.max(4);
    let mut doublings = 0usize;
    loop {
        let contour = build_circle(center, radius, n, sheets);
        let vals = eval(&contour.points)?;
        check_values(&contour.points, &vals, opts.zero_guard)?;
        let worst = vals.windows(2).map(|w| step_arg(w[0], w[1]).abs()).fold(0.0, f64::max);
        if worst < opts.max_arg_step {
            let extra = contour.points.len() - (n_per_sheet * sheets as usize + 1);
            return Ok(finish(contour.points, vals, Vec::new(), extra, false, None));
        }
        if n * 2 > n_per_sheet * opts.refine_limit.max(1) || doublings > 10 {
            return Err(EvansError::RefinementExhausted {
                insertions: n * sheets as usize,
                max_step: worst,
            });
        }
        n *= 2;
        doublings += 1;
    }
}

struct Sample {
    lambda: C64,
    plus: Option<KatoFrame>,
    minus: KatoFrame,
    value: EvansValue,
}

/// Winding number of one Evans-function variant around a semicircle (upper
/// half evaluated, lower half by conjugation) or around a closed loop in the
/// right half plane. Refinement points get their Kato frames by continuation
/// from the preceding sample.
pub fn evans_winding(
    model: &EvansModel,
    contour: &Contour,
    which: Normalization,
    eval_opts: &EvalOptions,
    opts: &WindingOptions,
) -> Result<ContourResult> {
    let pts = contour.evaluation_points();
    let frames = engine::path_frames(model, &pts, eval_opts)?;
    let values = engine::eval_frames(model, &pts, &frames, eval_opts)?;
    let mut samples: Vec<Sample> = pts
        .iter()
        .enumerate()
        .map(|(k, &lambda)| Sample {
            lambda,
            plus: frames.plus.as_ref().map(|f| f[k]),
            minus: frames.minus[k],
            value: values[k],
        })
        .collect();
    let pick = |s: &Sample| s.value.component(which);
    for s in &samples {
        check_values(&[s.lambda], &[pick(s)], opts.zero_guard)?;
    }
    // closing the half contour across the real axis near the origin
    let wrap_open = contour.half && samples.last().is_some_and(|s| s.lambda.im != 0.0);

    let mut inserted = 0usize;
    loop {
        // (index of the left neighbour, new point); usize::MAX marks the wrap
        let mut jobs: Vec<(usize, C64)> = Vec::new();
        let n = samples.len();
        let last = if contour.half { n - 1 } else { n };
        for k in 0..last {
            let (a, b) = (&samples[k], &samples[(k + 1) % n]);
            if step_arg(pick(a), pick(b)).abs() >= opts.max_arg_step {
                jobs.push((k, midpoint(a.lambda, b.lambda)));
            }
        }
        if wrap_open {
            let s = &samples[n - 1];
            if step_arg(pick(s), pick(s).conj()).abs() >= opts.max_arg_step {
                jobs.push((n - 1, s.lambda * c(0.5)));
            }
        }
        if jobs.is_empty() {
            break;
        }
        if inserted + jobs.len() > opts.refine_limit {
            let worst = (0..last)
                .map(|k| step_arg(pick(&samples[k]), pick(&samples[(k + 1) % n])).abs())
                .fold(0.0, f64::max);
            return Err(EvansError::RefinementExhausted {
                insertions: inserted,
                max_step: worst,
            });
        }
        // frames sequentially, shooting in parallel
        let prepared: Vec<(usize, C64, Option<KatoFrame>, KatoFrame)> = jobs
            .iter()
            .map(|&(k, z)| {
                let s = &samples[k];
                let (p, m) = engine::extend_frames(model, s.plus.as_ref(), &s.minus, z, &eval_opts.kato)?;
                Ok((k, z, p, m))
            })
            .collect::<Result<_>>()?;
        let new_vals: Vec<EvansValue> = prepared
            .par_iter()
            .map(|(_, z, p, m)| model.eval_with(*z, p.as_ref(), m, &eval_opts.shooting))
            .collect::<Result<_>>()?;
        for ((k, z, p, m), v) in prepared.into_iter().zip(new_vals).rev() {
            let s = Sample {
                lambda: z,
                plus: p,
                minus: m,
                value: v,
            };
            check_values(&[z], &[pick(&s)], opts.zero_guard)?;
            samples.insert(k + 1, s);
        }
        inserted += jobs.len();
    }

    let mut points: Vec<C64> = samples.iter().map(|s| s.lambda).collect();
    let mut evans: Vec<EvansValue> = samples.iter().map(|s| s.value).collect();
    if contour.half {
        let mirrored: Vec<EvansValue> = evans.iter().rev().map(|v| v.conj()).collect();
        let skip = usize::from(!wrap_open);
        points.extend(mirrored.iter().skip(skip).map(|v| v.lambda));
        evans.extend(mirrored.into_iter().skip(skip));
    } else {
        points.push(points[0]);
        evans.push(evans[0]);
    }
    let values = evans.iter().map(|v| v.component(which)).collect();
    Ok(finish(points, values, evans, inserted, contour.half, Some(which)))
}

impl ContourResult {
    /// Divides all values by the value at the first sample (the real anchor
    /// of a semicircle).
    pub fn normalize_anchor(&mut self) {
        let Some(&v0) = self.values.first() else {
            return;
        };
        for v in &mut self.values {
            *v /= v0;
        }
        if let Some(e0) = self.evans.first().copied() {
            for e in &mut self.evans {
                e.d_raw /= e0.d_raw;
                e.d_check /= e0.d_check;
                e.d_hat /= e0.d_hat;
                e.d_tilde /= e0.d_tilde;
                e.d_unit /= e0.d_unit;
            }
        }
        self.arg_track = unwind(&self.values);
    }

    /// `lambda_re,lambda_im,d_re,d_im,arg_unwound`, one line per sample.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "lambda_re,lambda_im,d_re,d_im,arg_unwound")?;
        for ((z, v), a) in self.points.iter().zip(&self.values).zip(&self.arg_track) {
            writeln!(out, "{:e},{:e},{:e},{:e},{:e}", z.re, z.im, v.re, v.im, a)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Total argument change divided by `2 pi` before rounding.
    pub fn raw_winding(&self) -> f64 {
        (self.arg_track.last().unwrap_or(&0.0) - self.arg_track.first().unwrap_or(&0.0)) / TAU
    }
}

/// Winding number of a function given in closed form along a contour's full
/// loop (used for prefactors in consistency checks).
pub fn closed_form_winding<F: Fn(C64) -> C64>(contour: &Contour, f: F, opts: &WindingOptions) -> Result<ContourResult> {
    let pts: Vec<C64> = contour.full_points().into_iter().filter(|z| *z != ZERO).collect();
    winding_number(&pts, |zs| Ok(zs.iter().map(|&z| f(z)).collect()), opts)
}

#[allow(dead_code)]
fn angle_of(z: C64) -> f64 {
    z.arg().rem_euclid(TAU) - PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kato::ContinuedPower;
    use proptest::prelude::*;

    #[test]
    fn semicircle_shape() {
        let k = build_semicircle(4.5, 120, 0.0).unwrap();
        assert_eq!(k.points.len(), 61);
        assert_eq!(k.points[0], c(4.5));
        assert_eq!(*k.points.last().unwrap(), ZERO);
        assert!(k.points.iter().all(|z| z.im >= 0.0 && z.re >= -1e-15));
        let full = k.full_points();
        assert_eq!(full.len() - 1, 120);
        assert_eq!(full.iter().filter(|z| **z == ZERO).count(), 1);
        let max_arc_gap = k
            .points
            .windows(2)
            .filter(|w| (w[0].norm() - 4.5).abs() < 1e-12 && (w[1].norm() - 4.5).abs() < 1e-12)
            .map(|w| (w[1] - w[0]).norm())
            .fold(0.0, f64::max);
        assert!(max_arc_gap < TAU * 4.5 / 60.0);
        // spacing shrinks towards the origin on the axis
        let axis: Vec<f64> = k.points.iter().filter(|z| z.re.abs() < 1e-15).map(|z| z.im).collect();
        let gaps: Vec<f64> = axis.windows(2).map(|w| w[0] - w[1]).collect();
        assert!(gaps.windows(2).all(|g| g[1] <= g[0] + 1e-12));
    }

    #[test]
    fn offset_detour() {
        let k = build_semicircle(2.0, 120, 0.01).unwrap();
        assert_eq!(*k.points.last().unwrap(), c(0.01));
        assert!(k.points.iter().all(|z| z.norm() >= 0.01 - 1e-15));
        assert!(build_semicircle(1.0, 120, 1.0).is_err());
    }

    #[test]
    fn constant_and_identity() {
        let circ = build_circle(ZERO, 1.0, 20, 1);
        let o = WindingOptions::default();
        let r = winding_number(&circ.points, |z| Ok(vec![C64::new(2.0, 1.0); z.len()]), &o).unwrap();
        assert_eq!(r.winding, 0);
        let r = winding_number(&circ.points, |z| Ok(z.to_vec()), &o).unwrap();
        assert_eq!(r.winding, 1);
        assert!(r.max_arg_step < 0.2);
        assert!(r.refinements > 0);
    }

    #[test]
    fn zero_on_contour() {
        let circ = build_circle(c(1.0), 1.0, 8, 1);
        let root = circ.points[3];
        let r = winding_number(
            &circ.points,
            |z| Ok(z.iter().map(|w| w - root).collect()),
            &WindingOptions::default(),
        );
        assert!(matches!(r, Err(EvansError::ZeroOnContour { .. })));
    }

    #[test]
    fn sqrt_double_loop() {
        let r = riemann_winding(
            ZERO,
            1.0,
            2,
            60,
            |zs| {
                let mut root = ContinuedPower::new(0.5);
                zs.iter().map(|&z| root.next(z)).collect()
            },
            &WindingOptions::default(),
        )
        .unwrap();
        assert_eq!(r.winding, 1);
    }

    #[test]
    fn refinement_exhausted() {
        let circ = build_circle(ZERO, 1.0, 8, 1);
        let o = WindingOptions {
            refine_limit: 4,
            ..Default::default()
        };
        let r = winding_number(&circ.points, |z| Ok(z.iter().map(|w| w.powi(3)).collect()), &o);
        assert!(matches!(r, Err(EvansError::RefinementExhausted { .. })));
    }

    #[test]
    fn csv_export_header() {
        let circ = build_circle(ZERO, 1.0, 60, 1);
        let r = winding_number(&circ.points, |z| Ok(z.to_vec()), &WindingOptions::default()).unwrap();
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(s.starts_with("lambda_re,lambda_im,d_re,d_im,arg_unwound\n"));
        assert_eq!(s.lines().count(), r.points.len() + 1);
    }

    fn poly_value(roots: &[C64], z: C64) -> C64 {
        roots.iter().fold(C64::new(1.0, 0.0), |acc, r| acc * (z - r))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn additivity(
            a in proptest::collection::vec((-1.5f64..1.5, -1.5f64..1.5), 0..4),
            b in proptest::collection::vec((-1.5f64..1.5, -1.5f64..1.5), 0..4),
        ) {
            let ra: Vec<C64> = a.iter().map(|&(x, y)| C64::new(x, y)).collect();
            let rb: Vec<C64> = b.iter().map(|&(x, y)| C64::new(x, y)).collect();
            // keep roots off the unit circle
            prop_assume!(ra.iter().chain(&rb).all(|r| (r.norm() - 1.0).abs() > 0.05));
            let circ = build_circle(ZERO, 1.0, 60, 1);
            let o = WindingOptions::default();
            let wa = winding_number(&circ.points, |z| Ok(z.iter().map(|&w| poly_value(&ra, w)).collect()), &o).unwrap().winding;
            let wb = winding_number(&circ.points, |z| Ok(z.iter().map(|&w| poly_value(&rb, w)).collect()), &o).unwrap().winding;
            let wab = winding_number(&circ.points, |z| Ok(z.iter().map(|&w| poly_value(&ra, w) * poly_value(&rb, w)).collect()), &o).unwrap().winding;
            prop_assert_eq!(wab, wa + wb);
            let inside = ra.iter().filter(|r| r.norm() < 1.0).count() as i64;
            prop_assert_eq!(wa, inside);
        }
    }
}
