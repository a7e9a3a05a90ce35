//! Bright/bus amplitude decay in the three damping regimes.
//!
//! ```bash
//! cargo run --release --example damping_regimes
//! ```

use darkmode::dynamics::{bright_bus_eigenvalues, classify_regime, critical_kappa, langevin_solve, t_swap, TimeGrid};
use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = TAU * 160e3;
    println!("t_swap = {:.1} ns, critical κ_b/2π = {:.1} kHz", t_swap(g) * 1e9, critical_kappa(g) / TAU / 1e3);

    let grid = TimeGrid::with_steps(0.0, 6e-6, 12)?;
    let bright = [C64::from(FRAC_1_SQRT_2), C64::from(0.0), C64::from(FRAC_1_SQRT_2)];
    for k_khz in [160.0, 600.0, 905.0, 2000.0] {
        let kappa = TAU * k_khz * 1e3;
        let (l1, l2) = bright_bus_eigenvalues(g, kappa);
        println!(
            "\nκ_b/2π = {k_khz} kHz: {} (slowest decay {:.1} kHz)",
            classify_regime(g, kappa)?,
            -l1.re.max(l2.re) / 1e3
        );
        let tr = langevin_solve(g, 0.0, kappa, bright, &grid);
        for (t, (b, bus)) in tr.times.iter().zip(tr.bright().iter().zip(&tr.b)) {
            println!("  t = {:>4.1} µs  |a_b|² = {:.3e}  |b|² = {:.3e}", t * 1e6, b.norm_sqr(), bus.norm_sqr());
        }
    }
    Ok(())
}
