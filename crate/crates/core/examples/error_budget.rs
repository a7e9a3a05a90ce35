//! Analytic error budget and its optimum cat amplitude.
//!
//! ```bash
//! cargo run --release --example error_budget
//! ```

use darkmode::errorbudget::{optimum_alpha, predicted_infidelity, predicted_infidelity_with, BudgetParams};
use std::f64::consts::TAU;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = BudgetParams::default();
    let b = predicted_infidelity(1.414, &params);
    println!("α = 1.414: p_loss = {:.4}, p_decode = {:.4}, F_DMM = {:.4}, total = {:.4}", b.p_loss, b.p_decode, b.f_dmm, b.total);
    println!(
        "side terms: harmonics ε = {:.2e}, single pass = {:.2e}, Purcell κ/2π = {:.0} Hz (infidelity {:.2e})",
        b.eps_harmonics,
        b.eps_spl,
        b.kappa_purcell / TAU,
        b.f_purcell
    );
    let opt = optimum_alpha(&params, 0.5, 2.5)?;
    println!("optimum α = {:.3}, total = {:.4}", opt.alpha, opt.total);

    // bright leak falling from 1.5% toward 1% at large α
    let leak = |a: f64| 0.01 + 0.005 * (-(a * a)).exp();
    for a in [0.8, 1.2, 1.6, 2.0] {
        println!("  α = {a}: constant leak {:.4}, falling leak {:.4}", predicted_infidelity(a, &params).total, predicted_infidelity_with(a, &params, leak).total);
    }
    Ok(())
}
