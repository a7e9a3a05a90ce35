//! Teleport the four cardinal states from transmon 2 into cavity 1 through a
//! heralded Bell pair.
//!
//! ```bash
//! cargo run --release --example teleportation
//! ```

use darkmode::codes::LogicalBasis;
use darkmode::dynamics::SystemParams;
use darkmode::protocol::{run_dmm, teleport_cardinal, DmmOptions, NoiseFlags, TeleportKnobs, VacuumCheckModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alpha = 1.414;
    let params = SystemParams::default();
    let basis = LogicalBasis::plain(alpha)?;

    for (label, noise, model, knobs) in [
        ("ideal", NoiseFlags::ideal(), VacuumCheckModel::ideal(), TeleportKnobs::ideal()),
        (
            "error model",
            NoiseFlags { cavity_loss: true, kerr: false, p_decode: 0.017 },
            VacuumCheckModel::reference(),
            TeleportKnobs::reference(),
        ),
    ] {
        let p = if label == "ideal" { SystemParams::lossless_cavities() } else { params };
        let pair = run_dmm(&p, alpha, &model, &noise, &DmmOptions::default())?;
        let (results, avg) = teleport_cardinal(&pair.rho_pass, &basis, &basis, &p, &knobs)?;
        println!("{label}: F_QST = {avg:.4}");
        for (name, r) in ["|0⟩", "|1⟩", "|+⟩", "|+i⟩"].iter().zip(&results) {
            println!("  {name:5} F = {:.4}  P(m1,m2) = {:.4?}", r.f_qst, r.outcome_probs);
        }
    }
    Ok(())
}
