//! The heralding protocol, its measurement models and the protocols built on it.

mod dmm;
mod dual_rail;
mod stats;
mod teleport;
mod vacuum;

pub use dmm::{
    apply_decode_error, apply_kerr_phase, bell_fidelity, bell_fidelity_with_decode, coherent_pass_probability,
    decoded_block, default_cavity_dim, kerr_absorbing_basis, run_dmm, DmmOptions, DmmOutcome, Engine, NoiseFlags,
    ProtocolTiming, DEFAULT_P_DECODE, MAX_ALPHA,
};
pub use dual_rail::{dual_rail_dmm, DualRailResult};
pub use stats::{exact_success_probability, multiround_stats, success_probability, MultiroundStats};
pub use teleport::{avg_qst_fidelity, teleport, teleport_cardinal, TeleportKnobs, TeleportResult, CARDINAL_WEIGHTS};
pub use vacuum::{dmm_false_positive, vacuum_check, CheckOutcome, VacuumBranch, VacuumCheckModel};
