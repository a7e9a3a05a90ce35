//! Success probability and Bell fidelity against the cat amplitude, next to
//! the analytic error budget.
//!
//! ```bash
//! cargo run --release --example alpha_sweep
//! ```

use darkmode::dynamics::SystemParams;
use darkmode::errorbudget::{predicted_infidelity, BudgetParams};
use darkmode::protocol::{run_dmm, success_probability, DmmOptions, NoiseFlags, VacuumCheckModel};
use rayon::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = SystemParams::default();
    let noise = NoiseFlags { cavity_loss: true, kerr: false, p_decode: 0.017 };
    let model = VacuumCheckModel::reference();
    let alphas = [1.0, 1.2, 1.414, 1.6, 1.8, 2.0];
    let runs: Vec<_> = alphas.par_iter().map(|&a| run_dmm(&params, a, &model, &noise, &DmmOptions::default())).collect();
    let budget = BudgetParams::default();
    println!("alpha  p_pass  p_formula  F_sim   F_budget");
    for (a, r) in alphas.iter().zip(runs) {
        let r = r?;
        let b = predicted_infidelity(*a, &budget);
        println!("{a:5.3}  {:.4}  {:.4}     {:.4}  {:.4}", r.p_pass, success_probability(*a), r.bell_fidelity, b.fidelity());
    }
    Ok(())
}
