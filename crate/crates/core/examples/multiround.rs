//! Repeat-until-success rate of the heralded link.
//!
//! ```bash
//! cargo run --release --example multiround
//! ```

use darkmode::protocol::{exact_success_probability, multiround_stats};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = multiround_stats(1.0 / 2.6, 8.85e-6, 0.0)?;
    println!("p = 1/2.6, cycle 8.85 µs: {:.2} attempts, wait {:.2} µs, rate {:.2} kHz", s.mean_attempts, s.mean_wait * 1e6, s.rate / 1e3);
    for alpha in [1.0, 1.414, 2.0] {
        let p = exact_success_probability(alpha);
        let s = multiround_stats(p, 8.85e-6, 0.0)?;
        println!("α = {alpha}: p = {p:.4}, rate {:.2} kHz", s.rate / 1e3);
    }
    Ok(())
}
