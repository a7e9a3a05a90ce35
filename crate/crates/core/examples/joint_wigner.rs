//! Joint Wigner function of the heralded pair and the four-map
//! symmetrization that cancels transmon readout bias.
//!
//! ```bash
//! cargo run --release --example joint_wigner
//! ```

use darkmode::codes::ideal_dark_state;
use darkmode::hilbert::{make_space, QuantumState};
use darkmode::tomography::{joint_wigner, raw_joint_maps, symmetrize, ParityReadout};
use num_complex::Complex64 as C64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = 12;
    let v = ideal_dark_state(1.414, d, d);
    let space = make_space(&[d, d], &["a1", "a2"])?;
    let pair = QuantumState::density(&space, &v * v.adjoint())?;
    let biased = ParityReadout { p_e_given_g: [0.04, 0.02], p_g_given_e: [0.08, 0.05] };

    for (b, g) in [(0.0, 0.0), (1.0, -1.0), (1.0, 1.0), (0.5, 0.3)] {
        let (beta, gamma) = (C64::from(b), C64::new(g, 0.0));
        let exact = joint_wigner(&pair, beta, gamma)?;
        let [gg, ge, eg, ee] = raw_joint_maps(&pair, beta, gamma, &biased)?;
        println!(
            "β = {b:+.1}, γ = {g:+.1}: W = {exact:+.4}, symmetrized biased readout = {:+.4}",
            symmetrize(gg, ge, eg, ee)
        );
    }
    Ok(())
}
