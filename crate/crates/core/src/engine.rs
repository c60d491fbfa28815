//! Evaluation of Evans functions along lists of spectral points: Kato frames
//! are continued sequentially from a real anchor, shooting then runs in
//! parallel.

use rayon::prelude::*;

use crate::error::{EvansError, Result};
use crate::kato::{self, KatoFrame, KatoOptions};
use crate::limits;
use crate::linalg::{c, C64};
use crate::params::{PhysicalParams, Side};
use crate::profile::{compute_profile, LimitingProfile, Profile, ProfileOptions};
use crate::shooting::{self, EvansValue, ShootingOptions};

/// Which Evans function is evaluated.
#[derive(Debug, Clone)]
pub enum EvansModel {
    /// Finite-amplitude profile.
    Finite(Profile),
    /// Strong-shock limit `v+ -> 0`: limiting profile and closed-form basis
    /// at `+inf`. `params.v_plus` is ignored.
    StrongShock(LimitingProfile),
    /// Rapidly varying coefficients: determinant of the Kato frames.
    RInfinity(PhysicalParams),
}

impl EvansModel {
    pub fn finite(params: &PhysicalParams, opts: &ProfileOptions) -> Result<EvansModel> {
        Ok(EvansModel::Finite(compute_profile(params, opts)?))
    }

    pub fn strong_shock(params: &PhysicalParams) -> EvansModel {
        EvansModel::StrongShock(LimitingProfile::with_defaults(params))
    }

    pub fn params(&self) -> &PhysicalParams {
        match self {
            EvansModel::Finite(p) => &p.params,
            EvansModel::StrongShock(p) => &p.params,
            EvansModel::RInfinity(p) => p,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EvansModel::Finite(_) => "finite",
            EvansModel::StrongShock(_) => "strong-shock",
            EvansModel::RInfinity(_) => "r-infinity",
        }
    }

    fn needs_plus_frames(&self) -> bool {
        !matches!(self, EvansModel::StrongShock(_))
    }

    /// Value at one point from frames already continued to it.
    pub fn eval_with(
        &self,
        lambda: C64,
        plus: Option<&KatoFrame>,
        minus: &KatoFrame,
        opts: &ShootingOptions,
    ) -> Result<EvansValue> {
        match self {
            EvansModel::Finite(profile) => {
                let plus = plus.ok_or_else(|| EvansError::Domain("missing + frame".into()))?;
                shooting::evans_eval(lambda, &profile.params, profile, plus, minus, opts)
            }
            EvansModel::StrongShock(profile) => limits::strong_shock_eval(lambda, profile, minus, opts),
            EvansModel::RInfinity(params) => {
                let plus = plus.ok_or_else(|| EvansError::Domain("missing + frame".into()))?;
                Ok(limits::r_infinity_value(lambda, params, plus, minus))
            }
        }
    }
}

/// Kato frames for every point of `points`, anchored at the real point
/// `anchor` and continued along the polyline.
pub fn frames_along(
    side: Side,
    anchor: f64,
    points: &[C64],
    params: &PhysicalParams,
    opts: &KatoOptions,
) -> Result<Vec<KatoFrame>> {
    kato::kato_anchored(side, anchor, points, params, opts)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EvalOptions {
    pub shooting: ShootingOptions,
    pub kato: KatoOptions,
    /// Real anchor of the Kato frames; `None` uses the first point if it is
    /// real and positive, else the default anchor.
    pub anchor: Option<f64>,
}

impl EvalOptions {
    pub fn anchor_for(&self, points: &[C64]) -> f64 {
        self.anchor.unwrap_or_else(|| match points.first() {
            Some(z) if z.im == 0.0 && z.re > 0.0 => z.re,
            _ => kato::DEFAULT_ANCHOR,
        })
    }
}

/// Frames on both sides for `points` (the `+` side omitted when the model
/// does not use it).
pub struct PathFrames {
    pub anchor: f64,
    pub plus: Option<Vec<KatoFrame>>,
    pub minus: Vec<KatoFrame>,
}

pub fn path_frames(model: &EvansModel, points: &[C64], opts: &EvalOptions) -> Result<PathFrames> {
    let anchor = opts.anchor_for(points);
    let params = model.params();
    let plus = if model.needs_plus_frames() {
        Some(frames_along(Side::Plus, anchor, points, params, &opts.kato)?)
    } else {
        None
    };
    let minus = frames_along(Side::Minus, anchor, points, params, &opts.kato)?;
    Ok(PathFrames { anchor, plus, minus })
}

/// Values at `points` given their frames, shot in parallel.
pub fn eval_frames(
    model: &EvansModel,
    points: &[C64],
    frames: &PathFrames,
    opts: &EvalOptions,
) -> Result<Vec<EvansValue>> {
    points
        .par_iter()
        .enumerate()
        .map(|(k, &l)| {
            let plus = frames.plus.as_ref().map(|f| &f[k]);
            model.eval_with(l, plus, &frames.minus[k], &opts.shooting)
        })
        .collect()
}

/// Evans values along the polyline `points`.
pub fn evaluate_path(model: &EvansModel, points: &[C64], opts: &EvalOptions) -> Result<Vec<EvansValue>> {
    let frames = path_frames(model, points, opts)?;
    eval_frames(model, points, &frames, opts)
}

/// Value at a single point, frames carried straight from the anchor.
pub fn evaluate_point(model: &EvansModel, lambda: C64, opts: &EvalOptions) -> Result<EvansValue> {
    let mut o = *opts;
    o.anchor = Some(opts.anchor.unwrap_or(kato::DEFAULT_ANCHOR));
    Ok(evaluate_path(model, &[lambda], &o)?[0])
}

/// Frames at a point reached from `from` by a straight segment.
pub fn extend_frames(
    model: &EvansModel,
    plus: Option<&KatoFrame>,
    minus: &KatoFrame,
    to: C64,
    opts: &KatoOptions,
) -> Result<(Option<KatoFrame>, KatoFrame)> {
    let params = model.params();
    let step = |f: &KatoFrame| -> Result<KatoFrame> { Ok(kato::continue_frame(f, &[f.lambda, to], params, opts)?[1]) };
    let p = match plus {
        Some(f) => Some(step(f)?),
        None => None,
    };
    Ok((p, step(minus)?))
}

/// Real point used by default for single evaluations.
pub fn default_anchor() -> C64 {
    c(kato::DEFAULT_ANCHOR)
}
