//! Cat-code codewords, the vacuum-free modified basis and logical Paulis.
//!
//! Convention: `|±⟩_L` are the eigenstates of `X_L`. In the ordered basis
//! `(|+⟩_L, |−⟩_L)` the Paulis are
//!
//! ```text
//! X_L = [[1, 0], [0, -1]]   Z_L = [[0, 1], [1, 0]]   Y_L = [[0, i], [-i, 0]]
//! ```
//!
//! so `|0⟩_L = (|+⟩_L + |−⟩_L)/√2`, `|+i⟩_L = (|+⟩_L − i|−⟩_L)/√2`, and the
//! algebra is right-handed (`X_L Y_L = i Z_L`).

use crate::error::{DmmError, DmmResult};
use crate::hilbert::{self, HilbertSpace, Operator, QuantumState};
use crate::linalg::{self, I, ONE, ZERO};
use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

/// Wrap an angle to `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// Parameters `(α_basis, θ_K, θ_r)` of the modified logical basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogicalBasis {
    pub alpha: C64,
    pub theta_k: f64,
    pub theta_r: f64,
}

impl LogicalBasis {
    pub fn new(alpha: C64, theta_k: f64, theta_r: f64) -> DmmResult<Self> {
        if alpha.norm() <= 0.0 || !alpha.norm().is_finite() {
            return Err(DmmError::config(format!("basis amplitude {alpha} must be non-zero and finite")));
        }
        Ok(Self { alpha, theta_k: wrap_angle(theta_k), theta_r: wrap_angle(theta_r) })
    }

    /// Plain basis with no Kerr or rotation correction.
    pub fn plain(alpha: f64) -> DmmResult<Self> {
        Self::new(C64::from(alpha), 0.0, 0.0)
    }
}

/// The two codewords of one cavity, as Fock vectors of length `dim`.
#[derive(Debug, Clone)]
pub struct Codewords {
    pub plus: DVector<C64>,
    pub minus: DVector<C64>,
}

impl Codewords {
    pub fn dim(&self) -> usize {
        self.plus.len()
    }

    /// The `dim × 2` isometry `[|+⟩_L, |−⟩_L]`.
    pub fn isometry(&self) -> DMatrix<C64> {
        let mut v = DMatrix::zeros(self.dim(), 2);
        v.set_column(0, &self.plus);
        v.set_column(1, &self.minus);
        v
    }

    /// Projector onto the code space.
    pub fn projector(&self) -> DMatrix<C64> {
        let v = self.isometry();
        &v * v.adjoint()
    }

    /// Fock vector of a logical state `c₊|+⟩_L + c₋|−⟩_L`.
    pub fn encode(&self, c: &Vector2<C64>) -> DVector<C64> {
        &self.plus * c[0] + &self.minus * c[1]
    }
}

/// `e^{iθ_r n} e^{(i/2)θ_K n(n−1)}` as a diagonal of length `dim`.
pub fn basis_phases(dim: usize, theta_k: f64, theta_r: f64) -> DVector<C64> {
    DVector::from_fn(dim, |n, _| {
        let n = n as f64;
        C64::from_polar(1.0, theta_r * n + 0.5 * theta_k * n * (n - 1.0))
    })
}

/// Codewords of the modified basis:
/// `|+⟩_L ∝ U Π_0̄(|α⟩ + |−α⟩)` and `|−⟩_L ∝ U(|α⟩ − |−α⟩)`.
pub fn modified_codewords(basis: &LogicalBasis, dim: usize) -> DmmResult<Codewords> {
    let tail = hilbert::tail_weight(basis.alpha, dim);
    if tail > hilbert::TAIL_ERROR {
        return Err(DmmError::Truncation { mode: 0, tail, limit: hilbert::TAIL_ERROR });
    }
    let a = hilbert::coherent_vector(dim, basis.alpha);
    let b = hilbert::coherent_vector(dim, -basis.alpha);
    let u = basis_phases(dim, basis.theta_k, basis.theta_r);
    let mut plus = (&a + &b).component_mul(&u);
    plus[0] = ZERO;
    let minus = (&a - &b).component_mul(&u);
    let plus = &plus / C64::from(plus.norm());
    let minus = &minus / C64::from(minus.norm());
    Ok(Codewords { plus, minus })
}

/// Standard cat codewords `(|α⟩ ± |−α⟩)/√N±` without the vacuum removal.
pub fn cat_codewords(alpha: C64, dim: usize) -> Codewords {
    Codewords { plus: hilbert::cat_vector(dim, alpha, 0.0), minus: hilbert::cat_vector(dim, alpha, PI) }
}

pub fn pauli_x() -> Matrix2<C64> {
    Matrix2::new(ONE, ZERO, ZERO, -ONE)
}

pub fn pauli_y() -> Matrix2<C64> {
    Matrix2::new(ZERO, I, -I, ZERO)
}

pub fn pauli_z() -> Matrix2<C64> {
    Matrix2::new(ZERO, ONE, ONE, ZERO)
}

/// `[I, X, Y, Z]` in the `(|+⟩_L, |−⟩_L)` ordering.
pub fn logical_pauli_matrices() -> [Matrix2<C64>; 4] {
    [Matrix2::identity(), pauli_x(), pauli_y(), pauli_z()]
}

/// Logical cardinal states `|0⟩, |1⟩, |+⟩, |+i⟩` as `(c₊, c₋)` coefficients.
pub fn logical_zero() -> Vector2<C64> {
    Vector2::new(ONE, ONE) * C64::from(FRAC_1_SQRT_2)
}

pub fn logical_one() -> Vector2<C64> {
    Vector2::new(ONE, -ONE) * C64::from(FRAC_1_SQRT_2)
}

pub fn logical_plus() -> Vector2<C64> {
    Vector2::new(ONE, ZERO)
}

pub fn logical_plus_i() -> Vector2<C64> {
    Vector2::new(ONE, -I) * C64::from(FRAC_1_SQRT_2)
}

/// Logical Paulis `{I_L, X_L, Y_L, Z_L}` as single-mode operators.
#[derive(Debug, Clone)]
pub struct LogicalPaulis {
    pub i: Operator,
    pub x: Operator,
    pub y: Operator,
    pub z: Operator,
}

impl LogicalPaulis {
    pub fn as_array(&self) -> [&Operator; 4] {
        [&self.i, &self.x, &self.y, &self.z]
    }
}

pub fn logical_paulis(basis: &LogicalBasis, dim: usize) -> DmmResult<LogicalPaulis> {
    let cw = modified_codewords(basis, dim)?;
    let space = hilbert::make_space(&[dim], &["cavity"])?;
    let v = cw.isometry();
    let lift = |p: Matrix2<C64>| -> DmmResult<Operator> {
        let m = &v * DMatrix::from_iterator(2, 2, p.iter().cloned()) * v.adjoint();
        Operator::from_dense(&space, m)?.into_hermitian()
    };
    let [pi, px, py, pz] = logical_pauli_matrices();
    Ok(LogicalPaulis { i: lift(pi)?, x: lift(px)?, y: lift(py)?, z: lift(pz)? })
}

/// `(a_b, a_d) = ((a₁ + a₂)/√2, (a₁ − a₂)/√2)`.
pub fn dark_bright_amplitudes(a1: C64, a2: C64) -> (C64, C64) {
    ((a1 + a2) * FRAC_1_SQRT_2, (a1 - a2) * FRAC_1_SQRT_2)
}

/// Inverse of [`dark_bright_amplitudes`].
pub fn cavity_amplitudes(ab: C64, ad: C64) -> (C64, C64) {
    ((ab + ad) * FRAC_1_SQRT_2, (ab - ad) * FRAC_1_SQRT_2)
}

/// `(|α⟩ + i|−α⟩)₁ ⊗ |0⟩_b ⊗ (|α⟩ − i|−α⟩)₂` on a (cavity 1, bus, cavity 2) space.
pub fn initial_dmm_state(alpha: f64, space: &HilbertSpace) -> DmmResult<QuantumState> {
    if space.n_modes() != 3 {
        return Err(DmmError::dim("the protocol space has three modes (cavity 1, bus, cavity 2)"));
    }
    let a = C64::from(alpha);
    for &m in &[0usize, 2] {
        let tail = hilbert::tail_weight(a, space.dims()[m]);
        if tail > hilbert::TAIL_ERROR {
            return Err(DmmError::Truncation { mode: m, tail, limit: hilbert::TAIL_ERROR });
        }
    }
    let d = space.dims();
    QuantumState::product(
        space,
        &[
            hilbert::cat_vector(d[0], a, FRAC_PI_2),
            hilbert::fock_vector(d[1], 0),
            hilbert::cat_vector(d[2], a, -FRAC_PI_2),
        ],
    )
}

/// Two-cavity vector `Π_0̄0̄(|α, −α⟩ − |−α, α⟩)`, normalized.
pub fn ideal_dark_state(alpha: f64, d1: usize, d2: usize) -> DVector<C64> {
    let a = C64::from(alpha);
    let mut v = linalg::kron_vec(&hilbert::coherent_vector(d1, a), &hilbert::coherent_vector(d2, -a))
        - linalg::kron_vec(&hilbert::coherent_vector(d1, -a), &hilbert::coherent_vector(d2, a));
    for k in 0..d2 {
        v[k] = ZERO;
    }
    for j in 0..d1 {
        v[j * d2] = ZERO;
    }
    let n = v.norm();
    v / C64::from(n)
}

/// `|Ψ₋⟩ = (|+−⟩ − |−+⟩)/√2` in the logical product basis `(++, +−, −+, −−)`.
pub fn psi_minus() -> DVector<C64> {
    DVector::from_vec(vec![ZERO, ONE, -ONE, ZERO]) * C64::from(FRAC_1_SQRT_2)
}

/// Compress a two-cavity density matrix into the 4×4 logical block
/// `(V₁ ⊗ V₂)† ρ (V₁ ⊗ V₂)`. The trace of the result is the code-space weight.
pub fn logical_block(rho12: &DMatrix<C64>, cw1: &Codewords, cw2: &Codewords) -> DmmResult<DMatrix<C64>> {
    let n = cw1.dim() * cw2.dim();
    if rho12.shape() != (n, n) {
        return Err(DmmError::dim(format!("two-cavity density {:?} but codewords need {n}", rho12.shape())));
    }
    let v = linalg::kron(&cw1.isometry(), &cw2.isometry());
    Ok(v.adjoint() * rho12 * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const DIM: usize = 20;

    #[test]
    fn wrap_angle_range() {
        assert_abs_diff_eq!(wrap_angle(PI), PI);
        assert_abs_diff_eq!(wrap_angle(-PI), PI);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI + 0.1), -PI + 0.1, epsilon = 1e-12);
        assert!(LogicalBasis::new(ZERO, 0.0, 0.0).is_err());
    }

    #[test]
    fn plain_codewords_match_cat_code() {
        let b = LogicalBasis::plain(2f64.sqrt()).unwrap();
        let cw = modified_codewords(&b, DIM).unwrap();
        assert_eq!(cw.plus[0], ZERO);
        let odd = hilbert::cat_vector(DIM, C64::from(2f64.sqrt()), PI);
        assert_abs_diff_eq!((&cw.minus - odd).norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn small_alpha_codewords_approach_fock_states() {
        let b = LogicalBasis::plain(0.3).unwrap();
        let cw = modified_codewords(&b, DIM).unwrap();
        assert!(cw.plus[2].norm_sqr() > 0.99);
        assert!(cw.minus[1].norm_sqr() > 0.99);
    }

    #[test]
    fn pauli_algebra_is_right_handed() {
        let [id, x, y, z] = logical_pauli_matrices();
        assert_abs_diff_eq!((x * y - z * I).norm(), 0.0);
        assert_abs_diff_eq!((y * z - x * I).norm(), 0.0);
        assert_abs_diff_eq!((z * x - y * I).norm(), 0.0);
        for p in [x, y, z] {
            assert_abs_diff_eq!((p * p - id).norm(), 0.0);
        }
        // cardinal states are +1 eigenvectors
        assert_abs_diff_eq!((z * logical_zero() - logical_zero()).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((z * logical_one() + logical_one()).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((y * logical_plus_i() - logical_plus_i()).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn logical_paulis_on_code_space() {
        let b = LogicalBasis::new(C64::from(1.3), 0.4, -0.2).unwrap();
        let p = logical_paulis(&b, DIM).unwrap();
        let il = p.i.to_dense();
        assert_abs_diff_eq!(linalg::trace(&il).re, 2.0, epsilon = 1e-10);
        let x2 = p.x.compose(&p.x).unwrap().to_dense();
        assert_abs_diff_eq!(linalg::max_abs(&(x2 - &il)), 0.0, epsilon = 1e-10);
        let xy = p.x.compose(&p.y).unwrap().to_dense();
        assert_abs_diff_eq!(linalg::max_abs(&(xy - p.z.to_dense() * I)), 0.0, epsilon = 1e-10);
        let cw = modified_codewords(&b, DIM).unwrap();
        let plus = QuantumState::pure(p.z.space(), cw.plus.clone()).unwrap();
        assert_abs_diff_eq!(p.z.expectation(&plus).unwrap().norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.x.expectation(&plus).unwrap().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dark_bright_transform() {
        let a = C64::new(1.2, -0.3);
        let (ab, ad) = dark_bright_amplitudes(a, a);
        assert_abs_diff_eq!((ab - a * 2f64.sqrt()).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ad.norm(), 0.0);
        let (ab, ad) = dark_bright_amplitudes(a, -a);
        assert_abs_diff_eq!(ab.norm(), 0.0);
        assert_abs_diff_eq!((ad - a * 2f64.sqrt()).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn initial_state_is_normalized_with_vacuum_bus() {
        let s = hilbert::make_space(&[12, 4, 12], &["a1", "b", "a2"]).unwrap();
        let st = initial_dmm_state(2f64.sqrt(), &s).unwrap();
        assert_abs_diff_eq!(st.trace(), 1.0, epsilon = 1e-12);
        let bus = hilbert::partial_trace(&st, &[1]).unwrap().to_density();
        assert_abs_diff_eq!(bus[(0, 0)].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn even_parity_target_is_not_an_exact_bell_state() {
        // Π_0̄0̄(|α,α⟩ + |−α,−α⟩) has the wrong ± weights for Φ₊
        let a = C64::from(1.0);
        let mut v = linalg::kron_vec(&hilbert::coherent_vector(DIM, a), &hilbert::coherent_vector(DIM, a))
            + linalg::kron_vec(&hilbert::coherent_vector(DIM, -a), &hilbert::coherent_vector(DIM, -a));
        for k in 0..DIM {
            v[k] = ZERO;
            v[k * DIM] = ZERO;
        }
        let v = &v / C64::from(v.norm());
        let cw = modified_codewords(&LogicalBasis::plain(1.0).unwrap(), DIM).unwrap();
        let rho = logical_block(&(&v * v.adjoint()), &cw, &cw).unwrap();
        let phi_plus = DVector::from_vec(vec![ONE, ZERO, ZERO, ONE]) * C64::from(FRAC_1_SQRT_2);
        let f = phi_plus.dotc(&(&rho * &phi_plus)).re;
        assert!(f < 1.0 - 1e-4, "fidelity {f}");
    }

    proptest! {
        #[test]
        fn codeword_invariants(alpha in 0.3..2.0f64) {
            let cw = modified_codewords(&LogicalBasis::plain(alpha).unwrap(), DIM).unwrap();
            prop_assert!(cw.plus.dotc(&cw.minus).norm() < 1e-10);
            prop_assert!((cw.plus.norm() - 1.0).abs() < 1e-12);
            prop_assert_eq!(cw.plus[0], ZERO);
            for n in 0..DIM {
                if n % 2 == 0 { prop_assert!(cw.minus[n].norm() < 1e-12); }
                else { prop_assert!(cw.plus[n].norm() < 1e-12); }
            }
        }

        #[test]
        fn heralded_dark_state_is_singlet(alpha in 0.3..2.0f64) {
            let v = ideal_dark_state(alpha, DIM, DIM);
            let cw = modified_codewords(&LogicalBasis::plain(alpha).unwrap(), DIM).unwrap();
            let rho = logical_block(&(&v * v.adjoint()), &cw, &cw).unwrap();
            let psi = psi_minus();
            prop_assert!((psi.dotc(&(&rho * &psi)).re - 1.0).abs() < 1e-10);
        }

        #[test]
        fn dark_bright_round_trip(r1 in -3.0..3.0f64, i1 in -3.0..3.0f64, r2 in -3.0..3.0f64, i2 in -3.0..3.0f64) {
            let (a1, a2) = (C64::new(r1, i1), C64::new(r2, i2));
            let (ab, ad) = dark_bright_amplitudes(a1, a2);
            let (b1, b2) = cavity_amplitudes(ab, ad);
            prop_assert!((b1 - a1).norm() < 1e-12 && (b2 - a2).norm() < 1e-12);
        }
    }
}
