use crate::error::{DmmError, DmmResult};
use crate::hilbert::{self, QuantumState};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

fn ln_binomial(n: usize, k: usize) -> f64 {
    let lf = |m: usize| (1..=m).map(|i| (i as f64).ln()).sum::<f64>();
    lf(n) - lf(k) - lf(n - k)
}

/// Kraus operators `K_k = Σ_n √C(n,k) (1−γ)^{(n−k)/2} γ^{k/2} |n−k⟩⟨n|` of
/// single-mode amplitude damping with loss probability `γ`.
pub fn amplitude_damping_kraus(dim: usize, gamma: f64) -> Vec<DMatrix<C64>> {
    (0..dim)
        .map(|k| {
            DMatrix::from_fn(dim, dim, |row, n| {
                if n < k || row != n - k {
                    return C64::from(0.0);
                }
                let keep = if n == k { 1.0 } else { (1.0 - gamma).powf(0.5 * (n - k) as f64) };
                let lose = if k == 0 { 1.0 } else { gamma.powf(0.5 * k as f64) };
                C64::from((0.5 * ln_binomial(n, k)).exp() * keep * lose)
            })
        })
        .collect()
}

/// Apply amplitude damping with loss probability `γ = 1 − e^{−t/T1}` to `mode`.
pub fn amplitude_damping(state: &QuantumState, mode: usize, gamma: f64) -> DmmResult<QuantumState> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(DmmError::config(format!("loss probability {gamma} outside [0, 1]")));
    }
    let space = state.space();
    let rho = state.to_density();
    let mut out = DMatrix::zeros(rho.nrows(), rho.ncols());
    for k in amplitude_damping_kraus(space.dims()[mode], gamma) {
        if k.iter().all(|z| z.norm() == 0.0) {
            continue;
        }
        let op = hilbert::embed_local(space, mode, &k)?;
        let kr = op.mul_dense(&rho);
        out += op.mul_dense(&kr.adjoint());
    }
    Ok(QuantumState::density_unchecked(space, out)?.with_weight(state.weight()))
}
