use super::TimeGrid;
use crate::error::{DmmError, DmmResult};
use crate::linalg::{self, I, ZERO};
use crate::optim::{nelder_mead, NelderMeadOptions};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use std::f64::consts::SQRT_2;

/// Linear mode equations `Ȧ = (−i h − Γ/2) A` for coupled lossy oscillators.
///
/// Under a quadratic excitation-conserving Hamiltonian plus loss, the
/// amplitudes of a coherent product state follow this equation exactly.
#[derive(Debug, Clone)]
pub struct LinearModes {
    generator: DMatrix<C64>,
}

impl LinearModes {
    /// `h` is the Hermitian coupling matrix, `decay` the energy decay rates.
    pub fn new(h: DMatrix<C64>, decay: &[f64]) -> DmmResult<Self> {
        let n = decay.len();
        if h.shape() != (n, n) {
            return Err(DmmError::dim(format!("coupling matrix {:?} for {n} modes", h.shape())));
        }
        let mut generator = h * -I;
        for (k, &d) in decay.iter().enumerate() {
            generator[(k, k)] -= C64::from(0.5 * d);
        }
        Ok(Self { generator })
    }

    /// Modes `(a₁, b, a₂)` with couplings `g₁, g₂` and decay rates.
    pub fn protocol(g1: f64, g2: f64, kappa_a1: f64, kappa_b: f64, kappa_a2: f64) -> Self {
        let h = DMatrix::from_row_slice(
            3,
            3,
            &[ZERO, C64::from(g1), ZERO, C64::from(g1), ZERO, C64::from(g2), ZERO, C64::from(g2), ZERO],
        );
        Self::new(h, &[kappa_a1, kappa_b, kappa_a2]).expect("3x3 coupling")
    }

    /// A single lossless-cavity/lossy-bus beamsplitter, modes `(a, b)`.
    pub fn beamsplitter(g: f64, kappa_b: f64) -> Self {
        let h = DMatrix::from_row_slice(2, 2, &[ZERO, C64::from(g), C64::from(g), ZERO]);
        Self::new(h, &[0.0, kappa_b]).expect("2x2 coupling")
    }

    pub fn generator(&self) -> &DMatrix<C64> {
        &self.generator
    }

    /// `exp(M t)`.
    pub fn propagator(&self, t: f64) -> DMatrix<C64> {
        linalg::expm(&(&self.generator * C64::from(t)))
    }

    pub fn evolve(&self, a0: &DVector<C64>, t: f64) -> DVector<C64> {
        self.propagator(t) * a0
    }
}

/// Eigenvalues `−κ/4 ± √(κ²/16 − 2g²)` of the bright/bus amplitude equations.
pub fn bright_bus_eigenvalues(g: f64, kappa_b: f64) -> (C64, C64) {
    let disc = C64::from(kappa_b * kappa_b / 16.0 - 2.0 * g * g).sqrt();
    let c = C64::from(-kappa_b / 4.0);
    (c + disc, c - disc)
}

/// Classical amplitudes of `(a₁, b, a₂)` sampled on a grid.
#[derive(Debug, Clone)]
pub struct LangevinTrajectory {
    pub times: Vec<f64>,
    pub a1: Vec<C64>,
    pub b: Vec<C64>,
    pub a2: Vec<C64>,
}

impl LangevinTrajectory {
    pub fn bright(&self) -> Vec<C64> {
        self.a1.iter().zip(&self.a2).map(|(x, y)| (x + y) / SQRT_2).collect()
    }

    pub fn dark(&self) -> Vec<C64> {
        self.a1.iter().zip(&self.a2).map(|(x, y)| (x - y) / SQRT_2).collect()
    }
}

/// Solve `ȧᵢ = −i g b − κ_a/2 aᵢ`, `ḃ = −i g (a₁ + a₂) − κ_b/2 b` from `init = (a₁, b, a₂)`.
pub fn langevin_solve(g: f64, kappa_a: f64, kappa_b: f64, init: [C64; 3], grid: &TimeGrid) -> LangevinTrajectory {
    let sys = LinearModes::protocol(g, g, kappa_a, kappa_b, kappa_a);
    let times = grid.times();
    let a0 = DVector::from_column_slice(&init);
    let step = sys.propagator(grid.dt);
    let mut out = LangevinTrajectory { times: times.clone(), a1: vec![], b: vec![], a2: vec![] };
    let mut a = a0.clone();
    for (k, &t) in times.iter().enumerate() {
        if k > 0 {
            let dt = t - times[k - 1];
            a = if (dt - grid.dt).abs() <= 1e-12 * grid.dt { &step * &a } else { sys.propagator(dt) * &a };
        }
        out.a1.push(a[0]);
        out.b.push(a[1]);
        out.a2.push(a[2]);
    }
    out
}

/// Time after which a unit bright amplitude and the bus hold less than `tol`
/// in amplitude. The bright/bus energy is non-increasing, so bisection is exact.
pub fn settle_time(g: f64, kappa_b: f64, tol: f64) -> DmmResult<f64> {
    if kappa_b <= 0.0 {
        return Err(DmmError::numerical("dynamics", "no steady state without bus loss"));
    }
    let sys = LinearModes::beamsplitter(SQRT_2 * g, kappa_b);
    let start = DVector::from_vec(vec![C64::from(1.0), ZERO]);
    let energy = |t: f64| sys.evolve(&start, t).norm_squared();
    let target = tol * tol;
    let mut hi = 1.0 / kappa_b;
    while energy(hi) > target {
        hi *= 2.0;
        if hi > 1e3 / kappa_b.min(g) {
            return Err(DmmError::numerical("dynamics", "settle time search diverged"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if energy(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferResult {
    pub t1: f64,
    pub t2: f64,
    pub eta: f64,
}

/// Single-photon amplitude left in cavity 2 after a cavity 1 → bus swap of
/// length `t1` followed by a bus → cavity 2 swap of length `t2`.
pub fn transfer_amplitude(g: f64, kappa_b: f64, t1: f64, t2: f64) -> C64 {
    let sys = LinearModes::beamsplitter(g, kappa_b);
    let after1 = sys.evolve(&DVector::from_vec(vec![C64::from(1.0), ZERO]), t1);
    let after2 = sys.evolve(&DVector::from_vec(vec![ZERO, after1[1]]), t2);
    after2[0]
}

/// Optimize the two swap durations in `[0, t_max]` for photon transfer efficiency.
pub fn transfer_efficiency(g: f64, kappa_b: f64, t_max: f64) -> DmmResult<TransferResult> {
    if !(t_max > 0.0) || !(g > 0.0) || kappa_b < 0.0 {
        return Err(DmmError::config("transfer efficiency needs g > 0, κ_b ≥ 0, t_max > 0"));
    }
    let eta = |t1: f64, t2: f64| transfer_amplitude(g, kappa_b, t1, t2).norm_sqr();
    let n = 80;
    let mut best = (0.0, 0.0, -1.0);
    for i in 0..=n {
        for j in 0..=n {
            let (t1, t2) = (t_max * i as f64 / n as f64, t_max * j as f64 / n as f64);
            let e = eta(t1, t2);
            if e > best.2 {
                best = (t1, t2, e);
            }
        }
    }
    let scale = t_max;
    let opts = NelderMeadOptions { xtol: 1e-9, ftol: 1e-15, ..NelderMeadOptions::new(vec![0.02, 0.02]) };
    let m = nelder_mead(
        |x: &[f64]| {
            let (t1, t2) = (x[0] * scale, x[1] * scale);
            if !(0.0..=t_max).contains(&t1) || !(0.0..=t_max).contains(&t2) {
                return 1.0;
            }
            -eta(t1, t2)
        },
        &[best.0 / scale, best.1 / scale],
        &opts,
    );
    if !m.converged {
        return Err(DmmError::numerical("dynamics", "transfer-time optimizer did not converge"));
    }
    let (t1, t2) = (m.x[0] * scale, m.x[1] * scale);
    if t1 >= t_max * (1.0 - 1e-3) || t2 >= t_max * (1.0 - 1e-3) {
        return Err(DmmError::config(format!("t_max = {t_max:.3e} s is too small: optimum sits on the boundary")));
    }
    Ok(TransferResult { t1, t2, eta: -m.f })
}
