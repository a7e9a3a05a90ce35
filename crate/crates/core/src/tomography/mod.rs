//! Wigner maps, shot sampling, state reconstruction and logical-basis fitting.

mod logical;
mod mle;
mod wigner;

pub use logical::{
    conditional_decomposition, logical_two_qubit, measure_correlations, optimize_basis, pauli_correlations,
    singlet_fidelity, Axis, BasisFit, BasisTarget, ConditionedBranch, PauliCorrelations,
};
pub use mle::{mle_density, ReconstructionResult, MAX_ITER};
pub use wigner::{
    displaced_parity, displacement_block, joint_parity_moments, joint_wigner, raw_joint_maps, read_wigner_csv,
    sample_counts, sample_wigner, symmetrize, symmetrize_maps, symmetrize_single, wigner_map, write_wigner_csv,
    GridSpec, ParityReadout, WignerGrid, CSV_HEADER, CSV_HEADER_COUNTS,
};
