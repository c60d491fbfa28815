//! Limit of rapidly varying coefficients: the Evans function reduces to the
//! determinant of the Kato frames, so no shooting is needed.

use mhd_evans::contour::{build_semicircle, evans_winding, WindingOptions};
use mhd_evans::engine::{EvalOptions, EvansModel};
use mhd_evans::limits::r_infinity_eval;
use mhd_evans::linalg::C64;
use mhd_evans::shooting::Normalization;
use mhd_evans::PhysicalParams;

fn main() -> mhd_evans::Result<()> {
    for (b1, radius) in [(2.0, 4.5), (0.5, 1.0)] {
        for v_plus in [1e-1, 1e-6] {
            let params = PhysicalParams::new(5.0 / 3.0, v_plus, b1, 1.0, 1.0)?;
            let contour = build_semicircle(radius, 120, 0.0)?;
            let res = evans_winding(
                &EvansModel::RInfinity(params),
                &contour,
                Normalization::Raw,
                &EvalOptions::default(),
                &WindingOptions::default(),
            )?;
            let d = r_infinity_eval(C64::new(0.0, 0.5), &params, radius)?;
            println!("B1 = {b1}, v+ = {v_plus:e}: winding {}, D(0.5i) = {d:.4e}", res.winding);
        }
    }
    Ok(())
}
