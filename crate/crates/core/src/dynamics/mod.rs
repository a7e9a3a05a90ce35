//! Hamiltonians, open-system evolution and the classical mode equations.

mod channels;
mod lindblad;
mod linear;
mod params;

pub use channels::{amplitude_damping, amplitude_damping_kraus};
pub use lindblad::{lindblad_evolve, LindbladSolver, Trajectory};
pub use linear::{
    bright_bus_eigenvalues, langevin_solve, settle_time, transfer_efficiency, LangevinTrajectory, LinearModes,
    TransferResult,
};
pub use params::{SystemParams, TimeGrid};

use crate::error::{DmmError, DmmResult};
use crate::hilbert::{self, HilbertSpace, Operator};
use crate::linalg::ZERO;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::{PI, SQRT_2};

/// `H_c = g₁ a₁ b† + g₂ a₂ b† + h.c.` on a (cavity 1, bus, cavity 2) space.
pub fn coupling_hamiltonian(space: &HilbertSpace, g1: f64, g2: f64) -> DmmResult<Operator> {
    if space.n_modes() != 3 {
        return Err(DmmError::dim("coupling Hamiltonian needs modes (cavity 1, bus, cavity 2)"));
    }
    let (a1, _) = hilbert::ladder(space, 0)?;
    let (_, bd) = hilbert::ladder(space, 1)?;
    let (a2, _) = hilbert::ladder(space, 2)?;
    let t1 = bd.compose(&a1)?;
    let t2 = bd.compose(&a2)?;
    let fwd = t1.combine(C64::from(g1), &t2, C64::from(g2))?;
    fwd.add(&fwd.adjoint())?.into_hermitian()
}

/// `H_K = (K₁/2) a₁†a₁†a₁a₁ + (K₂/2) a₂†a₂†a₂a₂` on the first and last modes.
pub fn kerr_hamiltonian(space: &HilbertSpace, k1: f64, k2: f64) -> DmmResult<Operator> {
    if space.n_modes() < 2 {
        return Err(DmmError::dim("Kerr Hamiltonian needs two cavity modes"));
    }
    let local = |dim: usize, k: f64| {
        DMatrix::from_fn(dim, dim, |i, j| if i == j { C64::from(0.5 * k * (i * i.saturating_sub(1)) as f64) } else { ZERO })
    };
    let last = space.n_modes() - 1;
    let h1 = hilbert::embed_local(space, 0, &local(space.dims()[0], k1))?;
    let h2 = hilbert::embed_local(space, last, &local(space.dims()[last], k2))?;
    h1.add(&h2)?.into_hermitian()
}

/// Bright-mode swap time `π/(2√2 g)`.
pub fn t_swap(g: f64) -> f64 {
    PI / (2.0 * SQRT_2 * g)
}

/// Critical bus decay rate `4√2 g`.
pub fn critical_kappa(g: f64) -> f64 {
    4.0 * SQRT_2 * g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Underdamped,
    Critical,
    Overdamped,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Underdamped => "underdamped",
            Self::Critical => "critical",
            Self::Overdamped => "overdamped",
        })
    }
}

/// Damping regime of the bright/bus pair; within ±1% of `4√2 g` counts as critical.
pub fn classify_regime(g: f64, kappa_b: f64) -> DmmResult<Regime> {
    if !(g > 0.0) {
        return Err(DmmError::config(format!("coupling g = {g} must be positive")));
    }
    let r = kappa_b / critical_kappa(g);
    Ok(if (r - 1.0).abs() <= 0.01 {
        Regime::Critical
    } else if r < 1.0 {
        Regime::Underdamped
    } else {
        Regime::Overdamped
    })
}
