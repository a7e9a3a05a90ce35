//! Photon transfer through the lossy bus by two sequential swaps.
//!
//! ```bash
//! cargo run --release --example transfer_efficiency
//! ```

use darkmode::dynamics::transfer_efficiency;
use std::f64::consts::TAU;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = TAU * 160e3;
    for k_khz in [0.0, 60.0, 600.0, 2000.0] {
        let r = transfer_efficiency(g, TAU * k_khz * 1e3, 3e-6)?;
        println!("κ_b/2π = {k_khz:>6} kHz  t1 = {:7.1} ns  t2 = {:7.1} ns  η = {:.4}", r.t1 * 1e9, r.t2 * 1e9, r.eta);
    }
    Ok(())
}
