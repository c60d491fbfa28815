//! Evaluates every Evans-function variant at a few spectral points.

use mhd_evans::engine::{evaluate_path, EvalOptions, EvansModel};
use mhd_evans::linalg::C64;
use mhd_evans::{PhysicalParams, ProfileOptions};

fn main() -> mhd_evans::Result<()> {
    let params = PhysicalParams::new(5.0 / 3.0, 0.5, 1.0, 1.0, 1.0)?;
    let model = EvansModel::finite(&params, &ProfileOptions::default())?;
    // frames are carried along the path in order, so list nearby points
    let path = [
        C64::new(2.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(1.0, 1.0),
        C64::new(0.0, 1.0),
        C64::new(0.0, 0.1),
    ];
    let values = evaluate_path(&model, &path, &EvalOptions::default())?;
    println!("{:>12} {:>24} {:>24} {:>10}", "lambda", "D", "D check", "arg D unit");
    for v in &values {
        println!(
            "{:>12} {:>24} {:>24} {:>10.4}",
            format!("{:.2}", v.lambda),
            format!("{:.4e}", v.d_raw),
            format!("{:.4e}", v.d_check),
            v.d_unit.arg()
        );
    }
    Ok(())
}
