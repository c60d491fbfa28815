//! The strong-shock limit: limiting Evans function below and above the
//! bifurcation at B1 = sqrt(mu0), where it starts to vanish like sqrt(lambda).

use mhd_evans::engine::{evaluate_point, EvalOptions, EvansModel};
use mhd_evans::limits::StrongShockBasis;
use mhd_evans::linalg::C64;
use mhd_evans::PhysicalParams;

fn main() -> mhd_evans::Result<()> {
    let opts = EvalOptions::default();
    for b1 in [0.5, 2.0] {
        let params = PhysicalParams::new(5.0 / 3.0, 0.5, b1, 1.0, 1.0)?;
        let basis = StrongShockBasis::new(C64::new(1.0, 0.0), &params)?;
        println!("B1 = {b1}: zero mode at -inf: {}", basis.zero_mode);
        let model = EvansModel::strong_shock(&params);
        let at_one = evaluate_point(&model, C64::new(1.0, 0.0), &opts)?.d_check.norm();
        for l in [1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5] {
            let d = evaluate_point(&model, C64::new(l, 0.0), &opts)?.d_check;
            println!("  |D0({l:e})| / |D0(1)| = {:.4e}", d.norm() / at_one);
        }
    }
    Ok(())
}
