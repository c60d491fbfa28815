//! Runs a small parameter sweep, then reruns it to show that finished
//! tuples are skipped.
//!
//! cargo run --release --example sweep -- [--desk]

use mhd_evans::sweep::{run_sweep, SweepAxes, SweepSpec};

fn main() -> mhd_evans::Result<()> {
    let axes = if std::env::args().any(|a| a == "--desk") {
        SweepAxes::desk_grid()
    } else {
        SweepAxes {
            gamma: vec![1.4, 5.0 / 3.0],
            v_plus: vec![0.1, 0.5],
            b1: vec![0.5, 2.0],
            mu0: vec![1.0],
            sigma: vec![1.0],
        }
    };
    let out = std::env::temp_dir().join("mhd_evans_sweep.jsonl");
    let _ = std::fs::remove_file(&out);
    let spec = SweepSpec::new(axes, &out);

    let first = run_sweep(&spec)?;
    println!("{}", serde_json::to_string_pretty(&first)?);
    let again = run_sweep(&spec)?;
    println!("rerun: {} resumed, {} computed", again.resumed, again.computed);
    println!("records in {}", out.display());
    Ok(())
}
