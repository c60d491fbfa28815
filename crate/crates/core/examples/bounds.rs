//! High-frequency radius and real-part bound over a few field strengths.

use mhd_evans::limits::{branch_points, hf_radius, re_lambda_bound};
use mhd_evans::PhysicalParams;

fn main() -> mhd_evans::Result<()> {
    println!("{:>6} {:>10} {:>10}", "B1", "radius", "Re bound");
    for b1 in [0.0, 0.5, 1.0, 2.0, 3.8] {
        let p = PhysicalParams::new(5.0 / 3.0, 0.5, b1, 1.0, 1.0)?;
        println!("{b1:>6} {:>10.4} {:>10.4}", hf_radius(&p).radius, re_lambda_bound(&p));
    }
    let p = PhysicalParams::new(5.0 / 3.0, 1e-4, 0.8, 0.8, 0.8)?;
    println!("branch points of A+ for v+ = 1e-4, B1 = 0.8:");
    for z in branch_points(&p)? {
        println!("  {z:.6e}");
    }
    Ok(())
}
