use crate::codes::{self, LogicalBasis};
use crate::dynamics::{amplitude_damping, SystemParams};
use crate::error::{DmmError, DmmResult};
use crate::hilbert::QuantumState;
use crate::linalg::{self, ONE, ZERO};
use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Weights `(1, 1, 2, 2)/6` of the inputs `|0⟩, |1⟩, |+⟩, |+i⟩` in the average.
pub const CARDINAL_WEIGHTS: [f64; 4] = [1.0 / 6.0, 1.0 / 6.0, 2.0 / 6.0, 2.0 / 6.0];

/// Error sources of the Bell measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeleportKnobs {
    /// Depolarizing strength of the cavity-2 logical decode.
    pub p_decode: f64,
    /// Flip probability of the ancilla readout.
    pub p_m1: f64,
    /// Time cavity 1 idles while the Bell measurement runs (s).
    pub t_idle_cav1: f64,
    /// Conditional-phase wait `π/|χ|`; `None` derives it from `chi_a2t2`.
    pub t_cnot: Option<f64>,
    /// Apply cavity `T1` decay during the idle and the wait.
    pub cavity_loss: bool,
}

impl TeleportKnobs {
    pub fn ideal() -> Self {
        Self { p_decode: 0.0, p_m1: 0.0, t_idle_cav1: 0.0, t_cnot: None, cavity_loss: false }
    }

    /// Decode error 1.7%, perfect ancilla readout, 4 µs idle of cavity 1.
    pub fn reference() -> Self {
        Self { p_decode: 0.017, p_m1: 0.0, t_idle_cav1: 4e-6, t_cnot: None, cavity_loss: true }
    }
}

#[derive(Debug, Clone)]
pub struct TeleportResult {
    /// `P(m₁, m₂)` indexed by `2 m₁ + m₂`.
    pub outcome_probs: [f64; 4],
    /// Normalized cavity-1 states before the Pauli correction.
    pub conditioned_states: Vec<DMatrix<C64>>,
    /// Fidelity of each corrected conditioned state to the encoded input.
    pub per_outcome_fidelity: [f64; 4],
    /// `Σ P(m) F(m)` for this input.
    pub f_qst: f64,
}

/// `(f₀ + f₁ + 2f₊ + 2f₊ᵢ)/6`.
pub fn avg_qst_fidelity(f0: f64, f1: f64, fplus: f64, fplus_i: f64) -> f64 {
    CARDINAL_WEIGHTS[0] * f0 + CARDINAL_WEIGHTS[1] * f1 + CARDINAL_WEIGHTS[2] * fplus + CARDINAL_WEIGHTS[3] * fplus_i
}

/// Software Pauli correction for outcome `(m₁, m₂)`: `I, X, Z, Y` for `00, 01, 10, 11`.
fn correction(m1: usize, m2: usize) -> Matrix2<C64> {
    match (m1, m2) {
        (0, 0) => Matrix2::identity(),
        (0, 1) => codes::pauli_x(),
        (1, 0) => codes::pauli_z(),
        _ => codes::pauli_y(),
    }
}

fn outer(v: &DVector<C64>) -> DMatrix<C64> {
    v * v.adjoint()
}

/// Teleport the transmon qubit `c₀|g⟩ + c₁|e⟩` onto cavity 1 through the
/// heralded pair `ρ₁₂`.
///
/// The Bell measurement is a conditional parity on cavity 2
/// (`|g⟩⟨g| ⊗ 1 + |e⟩⟨e| ⊗ e^{iπn}`), an ancilla X readout (`m₁ = 0` for
/// `(|g⟩ − |e⟩)/√2`) and a logical-Z decode of cavity 2 (`m₂ = 0` for `|1⟩_L`).
/// Cavity-2 weight outside the code space gives a random `m₂`.
pub fn teleport(
    rho12: &QuantumState,
    basis1: &LogicalBasis,
    basis2: &LogicalBasis,
    input: Vector2<C64>,
    params: &SystemParams,
    knobs: &TeleportKnobs,
) -> DmmResult<TeleportResult> {
    if rho12.space().n_modes() != 2 {
        return Err(DmmError::dim("teleportation needs a two-cavity resource"));
    }
    if (input.norm() - 1.0).abs() > 1e-9 {
        return Err(DmmError::config("input qubit must be normalized"));
    }
    for p in [knobs.p_decode, knobs.p_m1] {
        if !(0.0..=1.0).contains(&p) {
            return Err(DmmError::config(format!("error probability {p} outside [0, 1]")));
        }
    }
    let [d1, d2] = [rho12.space().dims()[0], rho12.space().dims()[1]];

    let mut res = rho12.normalized()?;
    if knobs.cavity_loss {
        let (ka1, ka2) = params.kappa_a();
        let t_cnot = knobs.t_cnot.unwrap_or(PI / params.chi_a2t2.abs());
        res = amplitude_damping(&res, 0, 1.0 - (-ka1 * knobs.t_idle_cav1).exp())?;
        res = amplitude_damping(&res, 1, 1.0 - (-ka2 * t_cnot).exp())?;
    }
    let psi_t = DVector::from_vec(vec![input[0], input[1]]);
    // modes (cavity 1, cavity 2, transmon)
    let rho = linalg::kron(&res.to_density(), &outer(&psi_t));
    let n = rho.nrows();
    let u: Vec<C64> = (0..n)
        .map(|i| {
            let t = i % 2;
            let n2 = (i / 2) % d2;
            if t == 1 && n2 % 2 == 1 {
                -ONE
            } else {
                ONE
            }
        })
        .collect();
    let rho = DMatrix::from_fn(n, n, |i, j| u[i] * rho[(i, j)] * u[j].conj());

    let s = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    let anc = [DVector::from_vec(vec![s, -s]), DVector::from_vec(vec![s, s])];
    let e_m1 = |m1: usize| outer(&anc[m1]) * C64::from(1.0 - knobs.p_m1) + outer(&anc[1 - m1]) * C64::from(knobs.p_m1);

    let cw1 = codes::modified_codewords(basis1, d1)?;
    let cw2 = codes::modified_codewords(basis2, d2)?;
    let code2 = cw2.projector();
    let leak2 = DMatrix::<C64>::identity(d2, d2) - &code2;
    let z_states = [cw2.encode(&codes::logical_one()), cw2.encode(&codes::logical_zero())];
    let e_m2 = |m2: usize| {
        outer(&z_states[m2]) * C64::from(1.0 - knobs.p_decode) + &code2 * C64::from(0.5 * knobs.p_decode) + &leak2 * C64::from(0.5)
    };

    let logical_in = codes::logical_zero() * input[0] + codes::logical_one() * input[1];
    let k = 2 * d2;
    let mut outcome_probs = [0.0; 4];
    let mut per_outcome_fidelity = [0.0; 4];
    let mut conditioned_states = Vec::with_capacity(4);
    for m1 in 0..2 {
        let em1 = e_m1(m1);
        for m2 in 0..2 {
            let m = linalg::kron(&e_m2(m2), &em1);
            let mut r1 = DMatrix::<C64>::zeros(d1, d1);
            for a in 0..d1 {
                for b in 0..d1 {
                    let mut acc = ZERO;
                    for x in 0..k {
                        for y in 0..k {
                            acc += rho[(a * k + x, b * k + y)] * m[(y, x)];
                        }
                    }
                    r1[(a, b)] = acc;
                }
            }
            let idx = 2 * m1 + m2;
            let p = linalg::trace(&r1).re;
            outcome_probs[idx] = p;
            let r1 = if p > 0.0 { r1 / C64::from(p) } else { r1 };
            let target = cw1.encode(&(correction(m1, m2) * logical_in));
            per_outcome_fidelity[idx] = (target.adjoint() * &r1 * &target)[(0, 0)].re.clamp(0.0, 1.0);
            conditioned_states.push(r1);
        }
    }
    let f_qst = outcome_probs.iter().zip(&per_outcome_fidelity).map(|(p, f)| p * f).sum();
    Ok(TeleportResult { outcome_probs, conditioned_states, per_outcome_fidelity, f_qst })
}

/// Teleport `|0⟩, |1⟩, |+⟩, |+i⟩` and return the four results with the weighted average.
pub fn teleport_cardinal(
    rho12: &QuantumState,
    basis1: &LogicalBasis,
    basis2: &LogicalBasis,
    params: &SystemParams,
    knobs: &TeleportKnobs,
) -> DmmResult<(Vec<TeleportResult>, f64)> {
    let s = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    let inputs = [
        Vector2::new(ONE, ZERO),
        Vector2::new(ZERO, ONE),
        Vector2::new(s, s),
        Vector2::new(s, linalg::I * s),
    ];
    let results = inputs
        .iter()
        .map(|&c| teleport(rho12, basis1, basis2, c, params, knobs))
        .collect::<DmmResult<Vec<_>>>()?;
    let avg = avg_qst_fidelity(results[0].f_qst, results[1].f_qst, results[2].f_qst, results[3].f_qst);
    Ok((results, avg))
}
