use super::mle::ReconstructionResult;
use crate::codes::{self, LogicalBasis};
use crate::error::{DmmError, DmmResult};
use crate::hilbert::QuantumState;
use crate::linalg::{self, ZERO};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::protocol::bell_fidelity_with_decode;
use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64 as C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// Position in the `[I, X, Y, Z]` ordering.
    pub fn pauli_index(self) -> usize {
        match self {
            Axis::X => 1,
            Axis::Y => 2,
            Axis::Z => 3,
        }
    }

    /// `(+1, −1)` eigenvectors in the `(|+⟩_L, |−⟩_L)` ordering.
    pub fn eigenvectors(self) -> [Vector2<C64>; 2] {
        let s = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        match self {
            Axis::X => [Vector2::new(C64::from(1.0), ZERO), Vector2::new(ZERO, C64::from(1.0))],
            Axis::Y => [codes::logical_plus_i(), Vector2::new(s, linalg::I * s)],
            Axis::Z => [codes::logical_zero(), codes::logical_one()],
        }
    }
}

/// One decode outcome of cavity 2.
#[derive(Debug, Clone)]
pub struct ConditionedBranch {
    /// `+1` or `−1`.
    pub sign: i8,
    pub probability: f64,
    /// Normalized cavity-1 density matrix.
    pub rho1: DMatrix<C64>,
}

/// Decode cavity 2 along `axis` with POVM `(1−p)Π_± + (p/2)Π_code`.
/// Weight outside the code space gives no outcome, so the two
/// probabilities sum to at most one.
pub fn conditional_decomposition(
    rho12: &QuantumState,
    basis2: &LogicalBasis,
    axis: Axis,
    p_decode: f64,
) -> DmmResult<[ConditionedBranch; 2]> {
    if rho12.space().n_modes() != 2 {
        return Err(DmmError::dim("conditional decomposition needs a two-cavity state"));
    }
    if !(0.0..=1.0).contains(&p_decode) {
        return Err(DmmError::config(format!("decode error {p_decode} outside [0, 1]")));
    }
    let [d1, d2] = [rho12.space().dims()[0], rho12.space().dims()[1]];
    let rho = rho12.normalized()?.to_density();
    let cw2 = codes::modified_codewords(basis2, d2)?;
    let code = cw2.projector();
    let vecs = axis.eigenvectors();
    let branch = |k: usize| -> ConditionedBranch {
        let v = cw2.encode(&vecs[k]);
        let e = &v * v.adjoint() * C64::from(1.0 - p_decode) + &code * C64::from(0.5 * p_decode);
        let mut r1 = DMatrix::<C64>::zeros(d1, d1);
        for a in 0..d1 {
            for b in 0..d1 {
                let mut acc = ZERO;
                for x in 0..d2 {
                    for y in 0..d2 {
                        acc += rho[(a * d2 + x, b * d2 + y)] * e[(y, x)];
                    }
                }
                r1[(a, b)] = acc;
            }
        }
        let p = linalg::trace(&r1).re;
        let rho1 = if p > 0.0 { r1 / C64::from(p) } else { r1 };
        ConditionedBranch { sign: if k == 0 { 1 } else { -1 }, probability: p, rho1 }
    };
    Ok([branch(0), branch(1)])
}

/// `⟨σᵢ ⊗ σⱼ⟩` for `i, j ∈ {I, X, Y, Z}`; row is cavity 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliCorrelations {
    pub values: [[f64; 4]; 4],
}

impl PauliCorrelations {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Code-space weight `⟨II⟩`; below one signals leakage.
    pub fn identity(&self) -> f64 {
        self.values[0][0]
    }

    /// Correlations of `|Ψ₋⟩`: `⟨II⟩ = 1`, `⟨XX⟩ = ⟨YY⟩ = ⟨ZZ⟩ = −1`.
    pub fn singlet() -> Self {
        let mut values = [[0.0; 4]; 4];
        values[0][0] = 1.0;
        for k in 1..4 {
            values[k][k] = -1.0;
        }
        Self { values }
    }

    /// All entries except `⟨II⟩` multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = *self;
        for (i, row) in out.values.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                if i + j > 0 {
                    *v *= s;
                }
            }
        }
        out
    }

    /// Exact correlations `Tr[ρ_L σᵢ⊗σⱼ]` of a logical 4×4 block.
    pub fn from_block(block: &DMatrix<C64>) -> Self {
        let p = codes::logical_pauli_matrices();
        let mut values = [[0.0; 4]; 4];
        for (i, si) in p.iter().enumerate() {
            for (j, sj) in p.iter().enumerate() {
                values[i][j] = linalg::trace(&(block * pauli_pair(si, sj))).re;
            }
        }
        Self { values }
    }
}

fn to_dense(m: &Matrix2<C64>) -> DMatrix<C64> {
    DMatrix::from_iterator(2, 2, m.iter().cloned())
}

fn pauli_pair(a: &Matrix2<C64>, b: &Matrix2<C64>) -> DMatrix<C64> {
    linalg::kron(&to_dense(a), &to_dense(b))
}

/// Joint Pauli expectations from the three decode axes of cavity 2.
///
/// `⟨σᵢσⱼ⟩ = p₊Tr(ρ₊σᵢ) − p₋Tr(ρ₋σᵢ)` for `j ≠ I`; the `j = I` column uses the
/// sum and is averaged over the three axes.
pub fn pauli_correlations(branches: &[[ConditionedBranch; 2]; 3], basis1: &LogicalBasis) -> DmmResult<PauliCorrelations> {
    let d1 = branches[0][0].rho1.nrows();
    let paulis = codes::logical_paulis(basis1, d1)?;
    let ops: Vec<DMatrix<C64>> = paulis.as_array().iter().map(|o| o.to_dense()).collect();
    let mut values = [[0.0; 4]; 4];
    for (axis, pair) in Axis::ALL.iter().zip(branches) {
        let j = axis.pauli_index();
        for (i, op) in ops.iter().enumerate() {
            let plus = pair[0].probability * linalg::trace(&(&pair[0].rho1 * op)).re;
            let minus = pair[1].probability * linalg::trace(&(&pair[1].rho1 * op)).re;
            values[i][j] = plus - minus;
            values[i][0] += (plus + minus) / 3.0;
        }
    }
    Ok(PauliCorrelations { values })
}

/// Decode along all three axes and return the correlations.
pub fn measure_correlations(
    rho12: &QuantumState,
    basis1: &LogicalBasis,
    basis2: &LogicalBasis,
    p_decode: f64,
) -> DmmResult<PauliCorrelations> {
    let b = [
        conditional_decomposition(rho12, basis2, Axis::X, p_decode)?,
        conditional_decomposition(rho12, basis2, Axis::Y, p_decode)?,
        conditional_decomposition(rho12, basis2, Axis::Z, p_decode)?,
    ];
    pauli_correlations(&b, basis1)
}

/// Linear inversion `ρ = ¼ Σ ⟨σᵢσⱼ⟩ σᵢ⊗σⱼ` followed by the closest PSD matrix.
/// The trace is left free; `residual` is the Frobenius size of the projection step.
pub fn logical_two_qubit(corr: &PauliCorrelations) -> ReconstructionResult {
    let p = codes::logical_pauli_matrices();
    let mut raw = DMatrix::<C64>::zeros(4, 4);
    for (i, si) in p.iter().enumerate() {
        for (j, sj) in p.iter().enumerate() {
            raw += pauli_pair(si, sj) * C64::from(0.25 * corr.values[i][j]);
        }
    }
    let raw = linalg::hermitian_part(&raw);
    let rho = linalg::project_psd(&raw);
    let residual = (&rho - &raw).norm();
    ReconstructionResult { rho, converged: true, residual, iterations: 1 }
}

/// `⟨Ψ₋|ρ|Ψ₋⟩` of a logical 4×4 matrix.
pub fn singlet_fidelity(rho: &DMatrix<C64>) -> f64 {
    let v = codes::psi_minus();
    (v.adjoint() * rho * &v)[(0, 0)].re
}

/// Which logical bases [`optimize_basis`] may change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTarget {
    Cavity1,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisFit {
    pub basis1: LogicalBasis,
    pub basis2: LogicalBasis,
    pub fidelity: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn to_params(b: &LogicalBasis) -> [f64; 3] {
    // the phase of α is folded into θ_r, which rotates the code
    [b.alpha.norm(), b.theta_k, b.theta_r + b.alpha.arg()]
}

fn from_params(x: &[f64]) -> Option<LogicalBasis> {
    if x[0] <= 0.05 {
        return None;
    }
    LogicalBasis::new(C64::from(x[0]), x[1], x[2]).ok()
}

/// Maximize the Bell fidelity over `(α_basis, θ_K, θ_r)` by a Nelder–Mead
/// search from `initial`. Stagnation at the iteration cap is reported through
/// `converged`.
pub fn optimize_basis(
    rho12: &QuantumState,
    initial: (LogicalBasis, LogicalBasis),
    p_decode: f64,
    target: BasisTarget,
) -> DmmResult<BasisFit> {
    let x1 = to_params(&initial.0);
    let x2 = to_params(&initial.1);
    let mut x0 = x1.to_vec();
    if target == BasisTarget::Both {
        x0.extend_from_slice(&x2);
    }
    let fixed2 = from_params(&x2).ok_or_else(|| DmmError::config("invalid initial basis"))?;
    let bases = |x: &[f64]| -> Option<(LogicalBasis, LogicalBasis)> {
        let b1 = from_params(&x[..3])?;
        let b2 = if x.len() == 6 { from_params(&x[3..])? } else { fixed2 };
        Some((b1, b2))
    };
    let mut failure = None;
    let objective = |x: &[f64]| -> f64 {
        match bases(x) {
            Some((b1, b2)) => match bell_fidelity_with_decode(rho12, &b1, &b2, p_decode) {
                Ok(f) => -f,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::INFINITY
                }
            },
            None => f64::INFINITY,
        }
    };
    let step = vec![0.05; x0.len()];
    let opts = NelderMeadOptions { xtol: 1e-7, ftol: 1e-13, ..NelderMeadOptions::new(step) };
    let min = nelder_mead(objective, &x0, &opts);
    if let Some(e) = failure {
        return Err(e);
    }
    let (basis1, basis2) = bases(&min.x).ok_or_else(|| DmmError::numerical("tomography", "basis search left the valid region"))?;
    if !min.converged {
        log::warn!("basis optimization stopped after {} iterations without converging", min.iterations);
    }
    Ok(BasisFit { basis1, basis2, fidelity: -min.f, converged: min.converged, iterations: min.iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::make_space;
    use crate::protocol::apply_kerr_phase;
    use approx::assert_abs_diff_eq;

    fn ideal(alpha: f64, d: usize) -> QuantumState {
        let v = codes::ideal_dark_state(alpha, d, d);
        let s = make_space(&[d, d], &["a1", "a2"]).unwrap();
        QuantumState::density(&s, &v * v.adjoint()).unwrap()
    }

    #[test]
    fn singlet_correlations() {
        let a = 2f64.sqrt();
        let b = LogicalBasis::plain(a).unwrap();
        let c = measure_correlations(&ideal(a, 14), &b, &b, 0.0).unwrap();
        let s = PauliCorrelations::singlet();
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(c.get(i, j), s.get(i, j), epsilon = 1e-9);
            }
        }
        let half = measure_correlations(&ideal(a, 14), &b, &b, 0.5).unwrap();
        assert_abs_diff_eq!(half.get(3, 3), -0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(half.get(0, 0), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn anticorrelated_branches_for_z() {
        let a = 2f64.sqrt();
        let b = LogicalBasis::plain(a).unwrap();
        let br = conditional_decomposition(&ideal(a, 14), &b, Axis::Z, 0.0).unwrap();
        let cw = codes::modified_codewords(&b, 14).unwrap();
        let one = cw.encode(&codes::logical_one());
        // cavity 2 in |0⟩ leaves cavity 1 in |1⟩
        assert_abs_diff_eq!((one.adjoint() * &br[0].rho1 * &one)[(0, 0)].re, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(br[0].probability, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn product_state_gives_identical_branches() {
        let d = 10;
        let b = LogicalBasis::plain(1.2).unwrap();
        let cw = codes::modified_codewords(&b, d).unwrap();
        let v = linalg::kron_vec(&cw.plus, &cw.encode(&codes::logical_zero()));
        let s = make_space(&[d, d], &["a1", "a2"]).unwrap();
        let st = QuantumState::density(&s, &v * v.adjoint()).unwrap();
        for axis in Axis::ALL {
            let br = conditional_decomposition(&st, &b, axis, 0.1).unwrap();
            if br[0].probability > 1e-9 && br[1].probability > 1e-9 {
                assert!(linalg::max_abs(&(&br[0].rho1 - &br[1].rho1)) < 1e-9);
            }
        }
    }

    #[test]
    fn two_qubit_inversion() {
        let r = logical_two_qubit(&PauliCorrelations::singlet());
        let v = codes::psi_minus();
        assert!(linalg::max_abs(&(&r.rho - &v * v.adjoint())) < 1e-9);
        let scaled = logical_two_qubit(&PauliCorrelations::singlet().scaled(0.9));
        assert_abs_diff_eq!(singlet_fidelity(&scaled.rho), 0.925, epsilon = 1e-12);
        let mut bad = PauliCorrelations::singlet().scaled(1.2);
        bad.values[0][0] = 1.0;
        let r = logical_two_qubit(&bad);
        assert!(r.residual > 1e-3 && r.converged);
        assert!(linalg::herm_eig(&r.rho).0[0] > -1e-12);
    }

    #[test]
    fn block_correlations_round_trip() {
        let r = logical_two_qubit(&PauliCorrelations::singlet().scaled(0.7));
        let c = PauliCorrelations::from_block(&r.rho);
        assert_abs_diff_eq!(c.get(2, 2), -0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(c.get(1, 3), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn optimizer_keeps_ideal_basis() {
        let a = 1.414;
        let b = LogicalBasis::plain(a).unwrap();
        let start = LogicalBasis::new(C64::from(a + 0.02), 0.01, -0.01).unwrap();
        let fit = optimize_basis(&ideal(a, 14), (start, b), 0.0, BasisTarget::Cavity1).unwrap();
        assert!(fit.fidelity > 1.0 - 1e-6);
        assert_abs_diff_eq!(fit.basis1.alpha.re, a, epsilon = 1e-3);
        assert_abs_diff_eq!(fit.basis1.theta_k, 0.0, epsilon = 1e-3);
        assert_abs_diff_eq!(fit.basis1.theta_r, 0.0, epsilon = 1e-3);
    }

    #[test]
    fn optimizer_recovers_kerr_phase() {
        let a = 1.414;
        let theta = 0.3;
        // K t = −θ on cavity 1 only
        let st = apply_kerr_phase(&ideal(a, 14), -theta, 0.0, 1.0).unwrap();
        let b = LogicalBasis::plain(a).unwrap();
        let fit = optimize_basis(&st, (b, b), 0.0, BasisTarget::Cavity1).unwrap();
        assert_abs_diff_eq!(fit.basis1.theta_k, theta, epsilon = 1e-3);
        assert!(fit.fidelity > 1.0 - 1e-6);
    }
}
