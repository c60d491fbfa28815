//! Computes a shock profile, prints a few samples and writes it to JSON.
//!
//! cargo run --example profile -- [v_plus] [gamma]

use mhd_evans::{compute_profile, PhysicalParams, ProfileOptions};

fn main() -> mhd_evans::Result<()> {
    let mut args = std::env::args().skip(1);
    let v_plus: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.1);
    let gamma: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(5.0 / 3.0);

    let params = PhysicalParams::new(gamma, v_plus, 0.0, 1.0, 1.0)?;
    let profile = compute_profile(&params, &ProfileOptions::default())?;
    println!(
        "a = {:.6e}, domain [-{}, {}], endpoint error {:.2e}, {} samples",
        params.a,
        profile.l_minus,
        profile.l_plus,
        profile.endpoint_error,
        profile.grid.len()
    );
    for x in [-10.0, -2.0, 0.0, 2.0, 10.0] {
        println!(
            "v({x:>5}) = {:.8}   v' = {:+.3e}",
            profile.value(x),
            profile.derivative(x)
        );
    }
    let path = std::env::temp_dir().join("mhd_evans_profile.json");
    profile.save(&path)?;
    println!("saved to {}", path.display());
    Ok(())
}
