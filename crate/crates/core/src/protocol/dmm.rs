use super::vacuum::{vacuum_check, CheckOutcome, VacuumCheckModel};
use crate::codes::{self, LogicalBasis};
use crate::dynamics::{self, amplitude_damping, LindbladSolver, LinearModes, SystemParams};
use crate::error::{DmmError, DmmResult};
use crate::hilbert::{self, HilbertSpace, Operator, QuantumState};
use crate::linalg::{self, I, ZERO};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// Largest cat amplitude accepted by [`run_dmm`].
pub const MAX_ALPHA: f64 = 2.2;

/// Default depolarizing strength of the cavity-2 decode pulse.
pub const DEFAULT_P_DECODE: f64 = 0.02;

/// Which decoherence and readout errors are switched on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseFlags {
    /// Cavity energy decay with the `T1` values of [`SystemParams`].
    pub cavity_loss: bool,
    /// Self-Kerr of both cavities.
    pub kerr: bool,
    /// Depolarizing probability of the logical decode of cavity 2.
    pub p_decode: f64,
}

impl NoiseFlags {
    pub fn ideal() -> Self {
        Self { cavity_loss: false, kerr: false, p_decode: 0.0 }
    }

    pub fn full(p_decode: f64) -> Self {
        Self { cavity_loss: true, kerr: true, p_decode }
    }
}

impl Default for NoiseFlags {
    fn default() -> Self {
        Self::ideal()
    }
}

/// Durations (s) of the protocol stages around the coupling pump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolTiming {
    pub t_prep: f64,
    pub t_pi: f64,
    pub t_readout: f64,
}

impl Default for ProtocolTiming {
    fn default() -> Self {
        Self { t_prep: 0.8e-6, t_pi: 1.2e-6, t_readout: 1.5e-6 }
    }
}

impl ProtocolTiming {
    /// Total duration including the pump time `t_dump`.
    pub fn total(&self, t_dump: f64) -> f64 {
        self.t_prep + t_dump + self.t_pi + self.t_readout
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    /// Exact evolution of the four coherent-state components.
    #[default]
    Branches,
    /// Full master equation on the truncated three-mode space.
    Master,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmmOptions {
    pub engine: Engine,
    /// `[cavity 1, bus, cavity 2]` truncations. `None` picks adequate ones.
    pub dims: Option<[usize; 3]>,
    pub timing: ProtocolTiming,
    /// Logical bases used for the Bell fidelity. `None` uses the plain basis at
    /// amplitude `α`, with the accumulated Kerr phase absorbed when Kerr is on.
    pub basis: Option<(LogicalBasis, LogicalBasis)>,
}

impl Default for DmmOptions {
    fn default() -> Self {
        Self { engine: Engine::Branches, dims: None, timing: ProtocolTiming::default(), basis: None }
    }
}

/// Outcome of one heralding run.
#[derive(Debug, Clone)]
pub struct DmmOutcome {
    /// Probability of the `gg` herald.
    pub p_pass: f64,
    /// Normalized two-cavity state after a `gg` herald.
    pub rho_pass: QuantumState,
    /// Normalized two-cavity state averaged over the other outcomes.
    pub rho_fail: QuantumState,
    /// Probabilities of `gg, ge, eg, ee`.
    pub outcome_probs: [f64; 4],
    pub bell_fidelity: f64,
    pub basis_used: (LogicalBasis, LogicalBasis),
    /// Logical 4×4 block of `rho_pass` after the decode error.
    pub logical_block: DMatrix<C64>,
    /// `1 − Tr` of the logical block: weight outside the code space.
    pub leakage: f64,
}

/// Cavity truncation used when none is given: at least 12 levels and enough
/// that the top level holds less than the leakage flag.
pub fn default_cavity_dim(alpha: f64) -> usize {
    hilbert::adequate_dim(alpha, 12)
}

/// Apply the decode error to a logical block: `(1−p)ρ + p Tr₂(ρ) ⊗ I/2`.
pub fn apply_decode_error(block: &DMatrix<C64>, p: f64) -> DMatrix<C64> {
    if p == 0.0 {
        return block.clone();
    }
    let mut r1 = DMatrix::<C64>::zeros(2, 2);
    for a in 0..2 {
        for b in 0..2 {
            r1[(a, b)] = block[(2 * a, 2 * b)] + block[(2 * a + 1, 2 * b + 1)];
        }
    }
    let mixed = linalg::kron(&r1, &DMatrix::identity(2, 2)) * C64::from(0.5);
    block * C64::from(1.0 - p) + mixed * C64::from(p)
}

fn psi_minus_overlap(block: &DMatrix<C64>) -> f64 {
    let v = codes::psi_minus();
    (v.adjoint() * block * &v)[(0, 0)].re
}

fn two_cavity_density(rho12: &QuantumState) -> DmmResult<DMatrix<C64>> {
    if rho12.space().n_modes() != 2 {
        return Err(DmmError::dim("Bell fidelity needs a two-cavity state"));
    }
    let tr = rho12.trace();
    if tr <= 0.0 {
        return Err(DmmError::numerical("protocol", "state has zero trace"));
    }
    Ok(rho12.to_density() / C64::from(tr))
}

/// `⟨Ψ₋|ρ_L|Ψ₋⟩` with `ρ_L` the logical block of the normalized `ρ₁₂`.
/// Weight outside the code space counts as infidelity.
pub fn bell_fidelity(rho12: &QuantumState, basis1: &LogicalBasis, basis2: &LogicalBasis) -> DmmResult<f64> {
    bell_fidelity_with_decode(rho12, basis1, basis2, 0.0)
}

/// [`bell_fidelity`] after a cavity-2 decode error of strength `p_decode`.
pub fn bell_fidelity_with_decode(
    rho12: &QuantumState,
    basis1: &LogicalBasis,
    basis2: &LogicalBasis,
    p_decode: f64,
) -> DmmResult<f64> {
    let block = decoded_block(rho12, basis1, basis2, p_decode)?;
    Ok(psi_minus_overlap(&block).clamp(0.0, 1.0))
}

/// Logical block of the normalized `ρ₁₂` after the decode error.
pub fn decoded_block(
    rho12: &QuantumState,
    basis1: &LogicalBasis,
    basis2: &LogicalBasis,
    p_decode: f64,
) -> DmmResult<DMatrix<C64>> {
    if !(0.0..=1.0).contains(&p_decode) {
        return Err(DmmError::config(format!("decode error {p_decode} outside [0, 1]")));
    }
    let rho = two_cavity_density(rho12)?;
    let d = rho12.space().dims();
    let cw1 = codes::modified_codewords(basis1, d[0])?;
    let cw2 = codes::modified_codewords(basis2, d[1])?;
    Ok(apply_decode_error(&codes::logical_block(&rho, &cw1, &cw2)?, p_decode))
}

/// `e^{−i (K t/2) n(n−1)}` applied to both cavities of a two-cavity density.
pub fn apply_kerr_phase(rho12: &QuantumState, k1: f64, k2: f64, t: f64) -> DmmResult<QuantumState> {
    let space = rho12.space();
    if space.n_modes() != 2 {
        return Err(DmmError::dim("Kerr phase acts on a two-cavity state"));
    }
    let d = space.dims();
    let u = linalg::kron_vec(&codes::basis_phases(d[0], -k1 * t, 0.0), &codes::basis_phases(d[1], -k2 * t, 0.0));
    let rho = rho12.to_density();
    let out = DMatrix::from_fn(rho.nrows(), rho.ncols(), |i, j| u[i] * rho[(i, j)] * u[j].conj());
    Ok(QuantumState::density_unchecked(space, out)?.with_weight(rho12.weight()))
}

/// Basis that absorbs a Kerr evolution of duration `t`: `θ_K = −K t`.
pub fn kerr_absorbing_basis(alpha: f64, k: f64, t: f64) -> DmmResult<LogicalBasis> {
    LogicalBasis::new(C64::from(alpha), -k * t, 0.0)
}

fn check_alpha(alpha: f64) -> DmmResult<()> {
    if !(alpha > 0.0 && alpha <= MAX_ALPHA) {
        return Err(DmmError::config(format!("α = {alpha} outside (0, {MAX_ALPHA}]")));
    }
    Ok(())
}

fn check_truncation(alpha: f64, dims: &[usize; 3]) -> DmmResult<()> {
    for &m in &[0usize, 2] {
        let tail = hilbert::tail_weight(C64::from(alpha), dims[m]);
        if tail > hilbert::TAIL_ERROR {
            return Err(DmmError::Truncation { mode: m, tail, limit: hilbert::TAIL_ERROR });
        }
        if tail > hilbert::TAIL_WARN {
            log::warn!("cavity mode {m}: truncation tail {tail:.2e} at α = {alpha}");
        }
    }
    Ok(())
}

/// Coherent-state components `Σ_jk C_jk |A_j⟩⟨A_k|` of the three-mode state.
struct Branches {
    amps: Vec<DVector<C64>>,
    coef: DMatrix<C64>,
}

/// `ln⟨B|A⟩` for normalized coherent product states.
fn ln_overlap(b: &DVector<C64>, a: &DVector<C64>) -> C64 {
    let mut s = ZERO;
    for (x, y) in a.iter().zip(b.iter()) {
        s += -0.5 * x.norm_sqr() - 0.5 * y.norm_sqr() + y.conj() * x;
    }
    s
}

impl Branches {
    fn initial(alpha: f64) -> Self {
        let a = C64::from(alpha);
        let amps: Vec<DVector<C64>> = [(a, a), (a, -a), (-a, a), (-a, -a)]
            .iter()
            .map(|&(x, y)| DVector::from_vec(vec![x, ZERO, y]))
            .collect();
        let c = DVector::from_vec(vec![C64::from(0.5), -I * 0.5, I * 0.5, C64::from(0.5)]);
        Self { amps, coef: &c * c.adjoint() }
    }

    fn evolve(&mut self, sys: &LinearModes, t: f64) {
        if t == 0.0 {
            return;
        }
        let p = sys.propagator(t);
        let new: Vec<DVector<C64>> = self.amps.iter().map(|a| &p * a).collect();
        let n = self.amps.len();
        for j in 0..n {
            for k in 0..n {
                let before = ln_overlap(&self.amps[k], &self.amps[j]);
                let after = ln_overlap(&new[k], &new[j]);
                self.coef[(j, k)] *= (before - after).exp();
            }
        }
        self.amps = new;
    }

    /// Two-cavity density after tracing out the bus, on exact truncated amplitudes.
    fn cavity_density(&self, d1: usize, d2: usize) -> DMatrix<C64> {
        let n = self.amps.len();
        let mut psi = DMatrix::<C64>::zeros(d1 * d2, n);
        for (j, a) in self.amps.iter().enumerate() {
            let v = linalg::kron_vec(&hilbert::coherent_amplitudes(d1, a[0]), &hilbert::coherent_amplitudes(d2, a[2]));
            psi.set_column(j, &v);
        }
        let mut c = self.coef.clone();
        for j in 0..n {
            for k in 0..n {
                let bj = DVector::from_vec(vec![self.amps[j][1]]);
                let bk = DVector::from_vec(vec![self.amps[k][1]]);
                c[(j, k)] *= ln_overlap(&bk, &bj).exp();
            }
        }
        &psi * c * psi.adjoint()
    }
}

fn cavity_rates(params: &SystemParams, noise: &NoiseFlags) -> (f64, f64) {
    if noise.cavity_loss {
        params.kappa_a()
    } else {
        (0.0, 0.0)
    }
}

fn pre_check_branches(params: &SystemParams, alpha: f64, noise: &NoiseFlags, timing: &ProtocolTiming, d: [usize; 3]) -> DmmResult<QuantumState> {
    let (ka1, ka2) = cavity_rates(params, noise);
    let mut br = Branches::initial(alpha);
    let idle = LinearModes::protocol(0.0, 0.0, ka1, params.kappa_b, ka2);
    let pump = LinearModes::protocol(params.g1, params.g2, ka1, params.kappa_b, ka2);
    br.evolve(&idle, timing.t_prep);
    br.evolve(&pump, params.t_dump);
    br.evolve(&idle, timing.t_pi);
    let space = hilbert::make_space(&[d[0], d[2]], &["a1", "a2"])?;
    QuantumState::density_unchecked(&space, br.cavity_density(d[0], d[2]))
}

fn cavity_collapses(space: &HilbertSpace, ka1: f64, ka2: f64) -> DmmResult<Vec<Operator>> {
    let last = space.n_modes() - 1;
    let mut out = Vec::new();
    for (mode, k) in [(0usize, ka1), (last, ka2)] {
        if k > 0.0 {
            out.push(hilbert::ladder(space, mode)?.0.scale(C64::from(k.sqrt())));
        }
    }
    Ok(out)
}

fn pre_check_master(params: &SystemParams, alpha: f64, noise: &NoiseFlags, timing: &ProtocolTiming, d: [usize; 3]) -> DmmResult<QuantumState> {
    let space = hilbert::make_space(&d, &["a1", "b", "a2"])?;
    let (ka1, ka2) = cavity_rates(params, noise);
    let mut collapses = cavity_collapses(&space, ka1, ka2)?;
    if params.kappa_b > 0.0 {
        collapses.push(hilbert::ladder(&space, 1)?.0.scale(C64::from(params.kappa_b.sqrt())));
    }
    let (k1, k2) = if noise.kerr { (params.k1, params.k2) } else { (0.0, 0.0) };
    let h_idle = dynamics::kerr_hamiltonian(&space, k1, k2)?;
    let h_pump = h_idle.add(&dynamics::coupling_hamiltonian(&space, params.g1, params.g2)?)?;
    let rate = params.max_rate();
    let idle = LindbladSolver::new(&h_idle, &collapses)?.with_max_rate(rate);
    let pump = LindbladSolver::new(&h_pump, &collapses)?.with_max_rate(rate);
    let mut rho = codes::initial_dmm_state(alpha, &space)?.to_density();
    for (solver, t) in [(&idle, timing.t_prep), (&pump, params.t_dump), (&idle, timing.t_pi)] {
        if t > 0.0 {
            rho = solver.evolve(&rho, t, t)?;
        }
    }
    let full = QuantumState::density_unchecked(&space, rho)?;
    hilbert::partial_trace(&full, &[0, 2])
}

fn readout_stage(
    state: &QuantumState,
    params: &SystemParams,
    noise: &NoiseFlags,
    timing: &ProtocolTiming,
    engine: Engine,
) -> DmmResult<QuantumState> {
    let (ka1, ka2) = cavity_rates(params, noise);
    let t = timing.t_readout;
    match engine {
        Engine::Branches => {
            let mut s = state.clone();
            for (mode, k) in [(0usize, ka1), (1, ka2)] {
                if k > 0.0 {
                    s = amplitude_damping(&s, mode, 1.0 - (-k * t).exp())?;
                }
            }
            if noise.kerr {
                s = apply_kerr_phase(&s, params.k1, params.k2, timing.total(params.t_dump))?;
            }
            Ok(s)
        }
        Engine::Master => {
            let (k1, k2) = if noise.kerr { (params.k1, params.k2) } else { (0.0, 0.0) };
            let collapses = cavity_collapses(state.space(), ka1, ka2)?;
            if collapses.is_empty() && k1 == 0.0 && k2 == 0.0 || t == 0.0 {
                return Ok(state.clone());
            }
            let h = dynamics::kerr_hamiltonian(state.space(), k1, k2)?;
            let solver = LindbladSolver::new(&h, &collapses)?.with_max_rate(params.max_rate());
            let rho = solver.evolve(&state.to_density(), t, t)?;
            QuantumState::density_unchecked(state.space(), rho)
        }
    }
}

/// Run the heralding protocol: cat preparation, pumped exchange through the
/// lossy bus, joint vacuum check and readout.
///
/// The `gg` branch is the heralded state. Its Bell fidelity is evaluated in
/// `options.basis` (or the default basis) after the decode error.
pub fn run_dmm(
    params: &SystemParams,
    alpha: f64,
    model: &VacuumCheckModel,
    noise: &NoiseFlags,
    options: &DmmOptions,
) -> DmmResult<DmmOutcome> {
    params.validate()?;
    model.validate()?;
    check_alpha(alpha)?;
    let dc = default_cavity_dim(alpha);
    let dims = options.dims.unwrap_or([dc, 16, dc]);
    check_truncation(alpha, &dims)?;
    let timing = &options.timing;

    let pre = match options.engine {
        Engine::Branches => pre_check_branches(params, alpha, noise, timing, dims)?,
        Engine::Master => pre_check_master(params, alpha, noise, timing, dims)?,
    };
    let branches = vacuum_check(&pre, model)?;
    let outcome_probs = [0, 1, 2, 3].map(|i| branches[i].probability);
    let p_pass = outcome_probs[0];
    if p_pass <= 0.0 {
        return Err(DmmError::numerical("protocol", "the gg herald has zero probability"));
    }
    debug_assert_eq!(branches[0].outcome, (CheckOutcome::G, CheckOutcome::G));

    let pass = readout_stage(&branches[0].state, params, noise, timing, options.engine)?;
    let rho_pass = pass.normalized()?;
    let fail_rho = branches[1..].iter().fold(DMatrix::<C64>::zeros(pre.space().total_dim(), pre.space().total_dim()), |acc, b| {
        acc + b.state.to_density()
    });
    let rho_fail = QuantumState::density_unchecked(pre.space(), fail_rho)?.normalized()?;

    let basis_used = match options.basis {
        Some(b) => b,
        None if noise.kerr => {
            let t = timing.total(params.t_dump);
            (kerr_absorbing_basis(alpha, params.k1, t)?, kerr_absorbing_basis(alpha, params.k2, t)?)
        }
        None => (LogicalBasis::plain(alpha)?, LogicalBasis::plain(alpha)?),
    };
    let logical_block = decoded_block(&rho_pass, &basis_used.0, &basis_used.1, noise.p_decode)?;
    let bell_fidelity = psi_minus_overlap(&logical_block).clamp(0.0, 1.0);
    let leakage = (1.0 - linalg::trace(&logical_block).re).max(0.0);
    let flagged = rho_pass.leakage_flags();
    if !flagged.is_empty() {
        log::warn!("heralded state populates the top Fock level of modes {flagged:?}");
    }
    Ok(DmmOutcome { p_pass, rho_pass, rho_fail, outcome_probs, bell_fidelity, basis_used, logical_block, leakage })
}

/// Ideal `gg` probability after exchanging coherent inputs `|α⟩|α e^{iφ}⟩`
/// through the bus for time `t`, including the vacuum-check model.
pub fn coherent_pass_probability(
    params: &SystemParams,
    alpha: f64,
    phi: f64,
    t: f64,
    model: &VacuumCheckModel,
) -> DmmResult<f64> {
    model.validate()?;
    let (ka1, ka2) = params.kappa_a();
    let sys = LinearModes::protocol(params.g1, params.g2, ka1, params.kappa_b, ka2);
    let a0 = DVector::from_vec(vec![C64::from(alpha), ZERO, C64::from_polar(alpha, phi)]);
    let a = sys.evolve(&a0, t);
    let p_occ = [1.0 - (-a[0].norm_sqr()).exp(), 1.0 - (-a[2].norm_sqr()).exp()];
    let gg = (CheckOutcome::G, CheckOutcome::G);
    let mut p = 0.0;
    for (s1, w1) in [(true, p_occ[0]), (false, 1.0 - p_occ[0])] {
        for (s2, w2) in [(true, p_occ[1]), (false, 1.0 - p_occ[1])] {
            p += w1 * w2 * model.likelihood(gg, (s1, s2));
        }
    }
    Ok(p)
}
