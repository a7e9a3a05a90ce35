//! Dual-rail variant: a single photon leaks through the bus into a mixture of
//! a Bell state and vacuum, and two copies distill a dual-rail Bell pair.
//!
//! ```bash
//! cargo run --release --example dual_rail
//! ```

use darkmode::dynamics::SystemParams;
use darkmode::protocol::dual_rail_dmm;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let r = dual_rail_dmm(&SystemParams::lossless_cavities(), None)?;
    println!("evolved for {:.2} µs", r.t_used * 1e6);
    println!("distance to ½(|Φ₋⟩⟨Φ₋| + |00⟩⟨00|) = {:.2e}", r.steady_distance);
    println!("distillation: p = {:.6}, F = {:.9}", r.p_distill, r.distilled_fidelity);
    Ok(())
}
