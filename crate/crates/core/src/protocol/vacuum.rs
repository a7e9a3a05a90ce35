use crate::error::{DmmError, DmmResult};
use crate::hilbert::QuantumState;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Ancilla readout of one vacuum check: `G` means "not vacuum".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckOutcome {
    G,
    E,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::G => "g",
            Self::E => "e",
        })
    }
}

/// Classical confusion applied to the ideal projective vacuum checks.
///
/// For each module `i`: `p_g_given_vacuum[i]` is the false-pass probability
/// and `p_e_given_occupied[i]` the false-fail probability. When both cavities
/// are empty, the joint false pass `gg` is `correlation_factor · q₁q₂` and the
/// single-module marginals are kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VacuumCheckModel {
    pub p_g_given_vacuum: [f64; 2],
    pub p_e_given_occupied: [f64; 2],
    pub correlation_factor: f64,
}

impl Default for VacuumCheckModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl VacuumCheckModel {
    pub fn ideal() -> Self {
        Self { p_g_given_vacuum: [0.0; 2], p_e_given_occupied: [0.0; 2], correlation_factor: 1.0 }
    }

    /// Model matching measured single-module false passes `q`, a joint bright
    /// pass `p_gg_bright` and a dark pass `p_gg_dark` for `|α, −α⟩`.
    ///
    /// The correlation factor is `p_gg_bright/(q₁q₂)` and a common false-fail
    /// probability is solved so that the dark pass rate is reproduced.
    pub fn calibrated(q: [f64; 2], p_gg_bright: f64, p_gg_dark: f64, alpha: f64) -> DmmResult<Self> {
        let c = if q[0] * q[1] > 0.0 { p_gg_bright / (q[0] * q[1]) } else { 1.0 };
        let p0 = (-alpha * alpha).exp();
        let pocc = 1.0 - p0;
        // p(gg|dark) = pocc²x² + pocc·p0·(q₁+q₂)·x + p0²·c·q₁q₂ with x = 1 − f
        let a = pocc * pocc;
        let b = pocc * p0 * (q[0] + q[1]);
        let cc = p0 * p0 * c * q[0] * q[1] - p_gg_dark;
        let disc = b * b - 4.0 * a * cc;
        if disc < 0.0 {
            return Err(DmmError::config("dark pass rate cannot be matched"));
        }
        let x = (-b + disc.sqrt()) / (2.0 * a);
        if !(0.0..=1.0).contains(&x) {
            return Err(DmmError::config(format!("dark pass rate {p_gg_dark} exceeds what α = {alpha} allows")));
        }
        let m = Self { p_g_given_vacuum: q, p_e_given_occupied: [1.0 - x; 2], correlation_factor: c };
        m.validate()?;
        Ok(m)
    }

    /// Reference calibration: singles 7%/5%, joint bright pass 1.5%, dark pass 70% at α = √2.
    pub fn reference() -> Self {
        Self::calibrated([0.07, 0.05], 0.015, 0.70, 2f64.sqrt()).expect("reference calibration is consistent")
    }

    pub fn validate(&self) -> DmmResult<()> {
        let probs = self.p_g_given_vacuum.iter().chain(&self.p_e_given_occupied);
        if probs.clone().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(DmmError::config("vacuum-check probabilities must lie in [0, 1]"));
        }
        let [q1, q2] = self.p_g_given_vacuum;
        let gg = self.correlation_factor * q1 * q2;
        if self.correlation_factor < 0.0 || gg > q1.min(q2) + 1e-15 || 1.0 - q1 - q2 + gg < -1e-15 {
            return Err(DmmError::config("correlation factor gives negative joint probabilities"));
        }
        Ok(())
    }

    /// `P(o₁, o₂ | s₁, s₂)` where `s = true` means the cavity is occupied.
    pub fn likelihood(&self, o: (CheckOutcome, CheckOutcome), occupied: (bool, bool)) -> f64 {
        let [q1, q2] = self.p_g_given_vacuum;
        let single = |i: usize, o: CheckOutcome, occ: bool| -> f64 {
            let pg = if occ { 1.0 - self.p_e_given_occupied[i] } else { self.p_g_given_vacuum[i] };
            if o == CheckOutcome::G {
                pg
            } else {
                1.0 - pg
            }
        };
        if !occupied.0 && !occupied.1 {
            let gg = self.correlation_factor * q1 * q2;
            return match o {
                (CheckOutcome::G, CheckOutcome::G) => gg,
                (CheckOutcome::G, CheckOutcome::E) => q1 - gg,
                (CheckOutcome::E, CheckOutcome::G) => q2 - gg,
                (CheckOutcome::E, CheckOutcome::E) => 1.0 - q1 - q2 + gg,
            };
        }
        single(0, o.0, occupied.0) * single(1, o.1, occupied.1)
    }
}

/// One outcome of the joint vacuum check.
#[derive(Debug, Clone)]
pub struct VacuumBranch {
    pub outcome: (CheckOutcome, CheckOutcome),
    pub probability: f64,
    /// Un-normalized conditioned state; its trace is `probability`.
    pub state: QuantumState,
}

/// Cavity-vacuum mask over the flattened basis, first and last modes are the cavities.
fn vacuum_masks(state: &QuantumState) -> Vec<(bool, bool)> {
    let space = state.space();
    let last = space.n_modes() - 1;
    (0..space.total_dim())
        .map(|i| {
            let occ = space.occupations(i);
            (occ[0] > 0, occ[last] > 0)
        })
        .collect()
}

/// Apply the joint vacuum check to a state whose first and last modes are the cavities.
///
/// The conditioned states are `Σ_s P(o|s) Π_s ρ Π_s` over the four
/// vacuum/occupied patterns `s`, returned for `gg, ge, eg, ee` in that order.
pub fn vacuum_check(state: &QuantumState, model: &VacuumCheckModel) -> DmmResult<Vec<VacuumBranch>> {
    model.validate()?;
    if state.space().n_modes() < 2 {
        return Err(DmmError::dim("vacuum check needs two cavity modes"));
    }
    let rho = state.to_density();
    let masks = vacuum_masks(state);
    let n = rho.nrows();
    let outcomes = [
        (CheckOutcome::G, CheckOutcome::G),
        (CheckOutcome::G, CheckOutcome::E),
        (CheckOutcome::E, CheckOutcome::G),
        (CheckOutcome::E, CheckOutcome::E),
    ];
    let mut out = Vec::with_capacity(4);
    for o in outcomes {
        let w: Vec<f64> = masks.iter().map(|&s| model.likelihood(o, s)).collect();
        let mut r = DMatrix::<C64>::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                if masks[i] == masks[j] && w[i] != 0.0 {
                    r[(i, j)] = rho[(i, j)] * w[i];
                }
            }
        }
        let p = (0..n).map(|i| r[(i, i)].re).sum::<f64>();
        out.push(VacuumBranch {
            outcome: o,
            probability: p,
            state: QuantumState::density_unchecked(state.space(), r)?,
        });
    }
    Ok(out)
}

/// `F_DMM = p(gg|bright) / (p(gg|bright) + p(gg|dark))`.
pub fn dmm_false_positive(p_gg_bright: f64, p_gg_dark: f64) -> f64 {
    let s = p_gg_bright + p_gg_dark;
    if s == 0.0 {
        0.0
    } else {
        p_gg_bright / s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coherent_state, make_space};
    use approx::assert_abs_diff_eq;

    #[test]
    fn ideal_check_on_vacuum_never_passes() {
        let s = make_space(&[4, 2, 4], &["a1", "b", "a2"]).unwrap();
        let vac = QuantumState::fock(&s, &[0, 0, 0]).unwrap();
        let br = vacuum_check(&vac, &VacuumCheckModel::ideal()).unwrap();
        assert_eq!(br[0].probability, 0.0);
        assert_abs_diff_eq!(br[3].probability, 1.0);
    }

    #[test]
    fn ideal_check_on_dark_coherent_state() {
        let s = make_space(&[16, 2, 16], &["a1", "b", "a2"]).unwrap();
        let a = C64::from(2f64.sqrt());
        let st = coherent_state(&s, &[a, C64::from(0.0), -a]).unwrap();
        let br = vacuum_check(&st, &VacuumCheckModel::ideal()).unwrap();
        let expect = (1.0 - (-2f64).exp()).powi(2);
        assert_abs_diff_eq!(br[0].probability, expect, epsilon = 1e-6);
        assert_abs_diff_eq!(br[0].probability, 0.7477, epsilon = 1e-4);
        let total: f64 = br.iter().map(|b| b.probability).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn reference_model_reproduces_calibration() {
        let m = VacuumCheckModel::reference();
        let s = make_space(&[16, 2, 16], &["a1", "b", "a2"]).unwrap();
        let a = C64::from(2f64.sqrt());
        let dark = coherent_state(&s, &[a, C64::from(0.0), -a]).unwrap();
        let vac = QuantumState::fock(&s, &[0, 0, 0]).unwrap();
        let pd = vacuum_check(&dark, &m).unwrap()[0].probability;
        let pb = vacuum_check(&vac, &m).unwrap()[0].probability;
        assert_abs_diff_eq!(pd, 0.70, epsilon = 1e-6);
        assert_abs_diff_eq!(pb, 0.015, epsilon = 1e-12);
        assert_abs_diff_eq!(dmm_false_positive(pb, pd), 0.021, epsilon = 5e-4);
        assert_abs_diff_eq!(m.correlation_factor, 0.015 / 0.0035, epsilon = 1e-12);
    }

    #[test]
    fn false_positive_formula() {
        assert_abs_diff_eq!(dmm_false_positive(0.015, 0.70), 0.021, epsilon = 5e-4);
        assert_eq!(dmm_false_positive(0.0, 0.4), 0.0);
        assert_abs_diff_eq!(dmm_false_positive(0.3, 0.3), 0.5);
    }

    #[test]
    fn inconsistent_models_are_rejected() {
        let m = VacuumCheckModel { correlation_factor: 50.0, p_g_given_vacuum: [0.1, 0.1], ..VacuumCheckModel::ideal() };
        assert!(m.validate().is_err());
        assert!(VacuumCheckModel::calibrated([0.07, 0.05], 0.015, 0.99, 1.0).is_err());
    }
}
