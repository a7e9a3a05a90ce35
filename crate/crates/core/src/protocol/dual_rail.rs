use crate::dynamics::{self, settle_time, LindbladSolver, SystemParams};
use crate::error::{DmmError, DmmResult};
use crate::hilbert::{self, QuantumState};
use crate::linalg::{self, ONE, ZERO};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone)]
pub struct DualRailResult {
    /// Two-cavity state (single-photon truncation) after the bus has emptied.
    pub rho_steady: QuantumState,
    /// Evolution time used (s).
    pub t_used: f64,
    /// Trace distance of `rho_steady` to `½(|Φ₋⟩⟨Φ₋| + |00⟩⟨00|)`.
    pub steady_distance: f64,
    /// Probability that both joint parities of the two copies are odd.
    pub p_distill: f64,
    /// Fidelity of the distilled state to `(|1001⟩ + |0110⟩)/√2`.
    pub distilled_fidelity: f64,
}

/// `½(|Φ₋⟩⟨Φ₋| + |00⟩⟨00|)` with `|Φ₋⟩ = (|10⟩ − |01⟩)/√2`, on two qubit-sized modes.
pub fn dual_rail_steady_state() -> DMatrix<C64> {
    let s = C64::from(FRAC_1_SQRT_2);
    let phi = DVector::from_vec(vec![ZERO, -s, s, ZERO]);
    let mut r = &phi * phi.adjoint() * C64::from(0.5);
    r[(0, 0)] += C64::from(0.5);
    r
}

/// Send `|1, 0⟩` through the lossy bus and distill two copies by joint-parity heralding.
///
/// The evolution time is `t` when given. Otherwise it is the longer of
/// `20/κ_b` and the time for the bright amplitude to fall below `10⁻⁴`.
pub fn dual_rail_dmm(params: &SystemParams, t: Option<f64>) -> DmmResult<DualRailResult> {
    params.validate()?;
    if params.kappa_b <= 0.0 {
        return Err(DmmError::numerical("protocol", "dual-rail steady state needs bus loss"));
    }
    let g = params.g1.min(params.g2);
    let t_min = 20.0 / params.kappa_b;
    let t_used = match t {
        Some(t) if t < t_min => {
            return Err(DmmError::numerical("protocol", format!("evolution time {t:.3e} s is shorter than 20/κ_b")));
        }
        Some(t) => t,
        None => t_min.max(settle_time(g, params.kappa_b, 1e-4)?),
    };

    let space = hilbert::make_space(&[2, 2, 2], &["a1", "b", "a2"])?;
    let h = dynamics::coupling_hamiltonian(&space, params.g1, params.g2)?;
    let lb = hilbert::ladder(&space, 1)?.0.scale(C64::from(params.kappa_b.sqrt()));
    let solver = LindbladSolver::new(&h, &[lb])?.with_max_rate(params.max_rate());
    let rho0 = QuantumState::fock(&space, &[1, 0, 0])?.to_density();
    let rho = solver.evolve(&rho0, t_used, t_used)?;
    let full = QuantumState::density_unchecked(&space, rho)?;
    let rho_steady = hilbert::partial_trace(&full, &[0, 2])?;
    let r = rho_steady.to_density();
    let steady_distance = linalg::trace_distance(&r, &dual_rail_steady_state());

    // copies on modes (1, 2) and (3, 4); parities of pairs (1, 3) and (2, 4)
    let two = linalg::kron(&r, &r);
    let odd = |i: usize| {
        let (n1, n2, n3, n4) = ((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1);
        (n1 + n3) % 2 == 1 && (n2 + n4) % 2 == 1
    };
    let mut kept = DMatrix::<C64>::zeros(16, 16);
    for i in (0..16).filter(|&i| odd(i)) {
        for j in (0..16).filter(|&j| odd(j)) {
            kept[(i, j)] = two[(i, j)];
        }
    }
    let p_distill = linalg::trace(&kept).re;
    let mut target = DVector::<C64>::zeros(16);
    target[0b1001] = ONE * FRAC_1_SQRT_2;
    target[0b0110] = ONE * FRAC_1_SQRT_2;
    let distilled_fidelity = if p_distill > 0.0 { (target.adjoint() * &kept * &target)[(0, 0)].re / p_distill } else { 0.0 };
    Ok(DualRailResult { rho_steady, t_used, steady_distance, p_distill, distilled_fidelity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn steady_state_and_distillation() {
        let r = dual_rail_dmm(&SystemParams::default(), None).unwrap();
        assert!(r.steady_distance < 1e-3, "distance {}", r.steady_distance);
        assert_abs_diff_eq!(r.p_distill, 0.125, epsilon = 1e-3);
        assert!(r.distilled_fidelity > 1.0 - 1e-6, "F = {}", r.distilled_fidelity);
        assert!(r.t_used >= 20.0 / SystemParams::default().kappa_b);
    }

    #[test]
    fn lossless_bus_is_flagged() {
        let p = SystemParams { kappa_b: 0.0, ..SystemParams::default() };
        assert!(matches!(dual_rail_dmm(&p, None), Err(DmmError::Numerical { .. })));
        assert!(dual_rail_dmm(&SystemParams::default(), Some(1e-7)).is_err());
    }

    #[test]
    fn target_state_is_a_density_matrix() {
        let r = dual_rail_steady_state();
        assert_abs_diff_eq!(linalg::trace(&r).re, 1.0, epsilon = 1e-15);
        assert!(linalg::herm_eig(&r).0[0] > -1e-15);
    }
}
