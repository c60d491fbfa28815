//! Relative error of the renormalized Evans function against its strong-shock
//! limit, for a few v+ and B1 (sigma = mu0 = 0.8).

use mhd_evans::limits::{convergence_error, write_convergence_csv, ConvergenceOptions};
use mhd_evans::shooting::Normalization;
use mhd_evans::PhysicalParams;

fn main() -> mhd_evans::Result<()> {
    let opts = ConvergenceOptions::default();
    let mut rows = Vec::new();
    for b1 in [0.8, 2.0, 3.8] {
        let base = PhysicalParams::new(5.0 / 3.0, 0.5, b1, 0.8, 0.8)?;
        rows.extend(convergence_error(
            &[1e-2, 1e-4, 1e-6],
            &base,
            Normalization::Check,
            &opts,
        )?);
    }
    write_convergence_csv(&rows, &mut std::io::stdout())?;
    Ok(())
}
