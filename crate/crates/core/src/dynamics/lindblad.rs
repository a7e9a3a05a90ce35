use super::TimeGrid;
use crate::error::{DmmError, DmmResult};
use crate::hilbert::{HilbertSpace, Operator, QuantumState};
use crate::linalg::{self, I, ZERO};
use nalgebra::DMatrix;
use nalgebra_sparse::CsrMatrix;
use num_complex::Complex64 as C64;

/// Largest trace change tolerated in a single integrator step.
const TRACE_DRIFT_PER_STEP: f64 = 1e-6;

/// Fixed-step RK4 integrator for `ρ̇ = −i[H, ρ] + Σ (LρL† − ½{L†L, ρ})`.
#[derive(Debug, Clone)]
pub struct LindbladSolver {
    space: HilbertSpace,
    h_eff: CsrMatrix<C64>,
    collapses: Vec<CsrMatrix<C64>>,
    max_rate: f64,
}

fn inf_norm(m: &CsrMatrix<C64>) -> f64 {
    m.row_iter().map(|r| r.values().iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn axpy(y: &mut DMatrix<C64>, a: C64, x: &DMatrix<C64>) {
    y.iter_mut().zip(x.iter()).for_each(|(y, x)| *y += a * x);
}

/// `out (+)= A · B` for CSR `A` and column-major dense `B`.
fn csr_mul(a: &CsrMatrix<C64>, b: &DMatrix<C64>, out: &mut DMatrix<C64>, accumulate: bool) {
    let n = a.nrows();
    let (offsets, cols, vals) = a.csr_data();
    let bs = b.as_slice();
    let os = out.as_mut_slice();
    for j in 0..b.ncols() {
        let bj = &bs[j * b.nrows()..(j + 1) * b.nrows()];
        let oj = &mut os[j * n..(j + 1) * n];
        for i in 0..n {
            let mut acc = ZERO;
            for k in offsets[i]..offsets[i + 1] {
                acc += vals[k] * bj[cols[k]];
            }
            if accumulate {
                oj[i] += acc;
            } else {
                oj[i] = acc;
            }
        }
    }
}

struct Work {
    x: DMatrix<C64>,
    y: DMatrix<C64>,
    z: DMatrix<C64>,
}

impl LindbladSolver {
    /// Solver with a conservative step bound `‖H_eff‖∞ + Σ‖L‖∞²`; see [`Self::with_max_rate`].
    pub fn new(h: &Operator, collapses: &[Operator]) -> DmmResult<Self> {
        let space = h.space().clone();
        let mut h_eff = h.to_sparse();
        let mut ls = Vec::with_capacity(collapses.len());
        let mut rate = 0.0;
        for l in collapses {
            if l.space() != &space {
                return Err(DmmError::dim("collapse operator lives on a different space"));
            }
            let ls_ = l.to_sparse();
            let mut half = l.adjoint().to_sparse() * &ls_;
            half.values_mut().iter_mut().for_each(|v| *v *= C64::new(0.0, -0.5));
            h_eff = h_eff + half;
            rate += inf_norm(&ls_).powi(2);
            ls.push(ls_);
        }
        rate += inf_norm(&h_eff);
        Ok(Self { space, h_eff, collapses: ls, max_rate: rate })
    }

    /// Replace the step bound by the largest physical rate of the model
    /// (couplings, decay rates, Kerr), as used by the protocol code.
    pub fn with_max_rate(mut self, rate: f64) -> Self {
        self.max_rate = rate;
        self
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn max_rate(&self) -> f64 {
        self.max_rate
    }

    /// `min(1/(50 · max rate), dt_max)`.
    pub fn step_size(&self, dt_max: f64) -> f64 {
        if self.max_rate > 0.0 {
            (1.0 / (50.0 * self.max_rate)).min(dt_max)
        } else {
            dt_max
        }
    }

    fn work(&self) -> Work {
        let n = self.space.total_dim();
        Work { x: DMatrix::zeros(n, n), y: DMatrix::zeros(n, n), z: DMatrix::zeros(n, n) }
    }

    fn rhs(&self, rho: &DMatrix<C64>, out: &mut DMatrix<C64>, w: &mut Work) {
        let n = rho.nrows();
        // X = H_eff ρ, and −i(X − X†) carries the Hamiltonian and anticommutator terms
        csr_mul(&self.h_eff, rho, &mut w.x, false);
        for j in 0..n {
            for i in 0..n {
                out[(i, j)] = -I * (w.x[(i, j)] - w.x[(j, i)].conj());
            }
        }
        for l in &self.collapses {
            csr_mul(l, rho, &mut w.y, false);
            w.y.adjoint_to(&mut w.z);
            csr_mul(l, &w.z, out, true);
        }
    }

    /// Evolve `rho` for `duration` using equal steps no longer than `step_size(dt_max)`.
    pub fn evolve(&self, rho: &DMatrix<C64>, duration: f64, dt_max: f64) -> DmmResult<DMatrix<C64>> {
        if duration < 0.0 {
            return Err(DmmError::config(format!("negative evolution time {duration}")));
        }
        if duration == 0.0 {
            return Ok(rho.clone());
        }
        let h_max = self.step_size(dt_max.min(duration));
        let steps = (duration / h_max).ceil() as usize;
        let h = duration / steps as f64;
        let n = rho.nrows();
        let mut w = self.work();
        let mut r = rho.clone();
        let (mut k1, mut k2, mut k3, mut k4) =
            (DMatrix::zeros(n, n), DMatrix::zeros(n, n), DMatrix::zeros(n, n), DMatrix::zeros(n, n));
        let mut tmp = DMatrix::zeros(n, n);
        let half = C64::from(0.5 * h);
        let full = C64::from(h);
        for step in 0..steps {
            let tr0 = linalg::trace(&r).re;
            self.rhs(&r, &mut k1, &mut w);
            tmp.copy_from(&r);
            axpy(&mut tmp, half, &k1);
            self.rhs(&tmp, &mut k2, &mut w);
            tmp.copy_from(&r);
            axpy(&mut tmp, half, &k2);
            self.rhs(&tmp, &mut k3, &mut w);
            tmp.copy_from(&r);
            axpy(&mut tmp, full, &k3);
            self.rhs(&tmp, &mut k4, &mut w);
            let sixth = C64::from(h / 6.0);
            axpy(&mut r, sixth, &k1);
            axpy(&mut r, sixth * 2.0, &k2);
            axpy(&mut r, sixth * 2.0, &k3);
            axpy(&mut r, sixth, &k4);
            // restore exact Hermiticity lost to rounding
            r.adjoint_to(&mut k1);
            r += &k1;
            r *= C64::from(0.5);
            let tr1 = linalg::trace(&r).re;
            if !tr1.is_finite() || (tr1 - tr0).abs() > TRACE_DRIFT_PER_STEP {
                return Err(DmmError::numerical(
                    "dynamics",
                    format!("trace drift {:.3e} at step {step} (dt = {h:.3e} s)", tr1 - tr0),
                ));
            }
        }
        Ok(r)
    }
}

/// States sampled on a time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<QuantumState>,
}

impl Trajectory {
    pub fn last(&self) -> &QuantumState {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

/// Integrate the master equation and record the state at every grid time.
///
/// `max_rate` is the largest physical rate of the model; `None` falls back to
/// the operator-norm bound of [`LindbladSolver::new`].
pub fn lindblad_evolve(
    rho0: &QuantumState,
    h: &Operator,
    collapses: &[Operator],
    grid: &TimeGrid,
    max_rate: Option<f64>,
) -> DmmResult<Trajectory> {
    if rho0.space() != h.space() {
        return Err(DmmError::dim("initial state and Hamiltonian live on different spaces"));
    }
    let mut solver = LindbladSolver::new(h, collapses)?;
    if let Some(r) = max_rate {
        solver = solver.with_max_rate(r);
    }
    let times = grid.times();
    let mut rho = rho0.to_density();
    let mut states = vec![QuantumState::density_unchecked(h.space(), rho.clone())?];
    for w in times.windows(2) {
        rho = solver.evolve(&rho, w[1] - w[0], grid.dt)?;
        states.push(QuantumState::density_unchecked(h.space(), rho.clone())?);
    }
    Ok(Trajectory { times, states })
}
