//! Herald a Bell pair with the dark-mode measurement and read it out the way
//! the experiment does: decode cavity 2 along X, Y, Z and fit the logical
//! basis of cavity 1.
//!
//! ```bash
//! cargo run --release --example heralded_bell_pair
//! ```

use darkmode::dynamics::SystemParams;
use darkmode::protocol::{run_dmm, DmmOptions, NoiseFlags, VacuumCheckModel};
use darkmode::tomography::{logical_two_qubit, measure_correlations, optimize_basis, singlet_fidelity, BasisTarget};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = SystemParams::default();
    let alpha = 1.414;

    let ideal = run_dmm(
        &SystemParams::lossless_cavities(),
        alpha,
        &VacuumCheckModel::ideal(),
        &NoiseFlags::ideal(),
        &DmmOptions::default(),
    )?;
    println!("ideal: p_pass = {:.4}, F = {:.8}", ideal.p_pass, ideal.bell_fidelity);

    let p_decode = 0.017;
    let noise = NoiseFlags { cavity_loss: true, kerr: true, p_decode };
    let out = run_dmm(&params, alpha, &VacuumCheckModel::reference(), &noise, &DmmOptions::default())?;
    println!(
        "noisy: p_pass = {:.4}, outcomes gg/ge/eg/ee = {:.3?}, F = {:.4}, leakage = {:.4}",
        out.p_pass, out.outcome_probs, out.bell_fidelity, out.leakage
    );

    let fit = optimize_basis(&out.rho_pass, out.basis_used, p_decode, BasisTarget::Cavity1)?;
    println!(
        "fitted cavity-1 basis: α = {:.4}, θ_K = {:.4}, θ_r = {:.4}, F = {:.4}",
        fit.basis1.alpha.norm(),
        fit.basis1.theta_k,
        fit.basis1.theta_r,
        fit.fidelity
    );

    let corr = measure_correlations(&out.rho_pass, &fit.basis1, &fit.basis2, p_decode)?;
    let names = ["I", "X", "Y", "Z"];
    for (i, a) in names.iter().enumerate() {
        let row: Vec<String> = (0..4).map(|j| format!("{}{}={:+.3}", a, names[j], corr.get(i, j))).collect();
        println!("  {}", row.join("  "));
    }
    let rec = logical_two_qubit(&corr);
    println!("Pauli-bar reconstruction: F = {:.4}", singlet_fidelity(&rec.rho));
    Ok(())
}
