//! Winding number of the Evans function around the high-frequency
//! semicircle, and the contour written as CSV.

use mhd_evans::contour::{build_semicircle, evans_winding, WindingOptions};
use mhd_evans::engine::{EvalOptions, EvansModel};
use mhd_evans::limits::hf_radius;
use mhd_evans::shooting::Normalization;
use mhd_evans::{classify_shock, PhysicalParams, ProfileOptions};

fn main() -> mhd_evans::Result<()> {
    let params = PhysicalParams::new(5.0 / 3.0, 1e-2, 2.0, 1.0, 1.0)?;
    let radius = hf_radius(&params).radius.max(1.05);
    let contour = build_semicircle(radius, 120, 0.0)?;
    let model = EvansModel::finite(&params, &ProfileOptions::default())?;

    let t = std::time::Instant::now();
    let mut res = evans_winding(
        &model,
        &contour,
        Normalization::Check,
        &EvalOptions::default(),
        &WindingOptions::default(),
    )?;
    println!(
        "{} shock, radius {radius}: winding {} ({} samples, {} refinements, max arg step {:.3}) in {:.2?}",
        classify_shock(&params, 1e-12),
        res.winding,
        res.points.len(),
        res.refinements,
        res.max_arg_step,
        t.elapsed()
    );

    res.normalize_anchor();
    let path = std::env::temp_dir().join("mhd_evans_contour.csv");
    let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
    res.write_csv(&mut out)?;
    println!("contour written to {}", path.display());
    Ok(())
}
