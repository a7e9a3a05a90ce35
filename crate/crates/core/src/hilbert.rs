//! Truncated Fock spaces, operators and states.
//!
//! Tensor order is fixed to the order of `mode_dims`; the protocol uses
//! (cavity 1, bus, cavity 2). Mode index 0 is the most significant digit of
//! the flattened basis index.

use crate::error::{DmmError, DmmResult};
use crate::linalg::{self, ONE, ZERO};
use log::warn;
use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64 as C64;

/// Tail weight above which a displacement or coherent state is rejected.
pub const TAIL_ERROR: f64 = 1e-3;
/// Tail weight above which a warning is logged.
pub const TAIL_WARN: f64 = 1e-6;
/// Population in the top Fock level that flags a truncation problem.
pub const LEAKAGE_FLAG: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpace {
    mode_dims: Vec<usize>,
    mode_labels: Vec<String>,
}

impl HilbertSpace {
    pub fn dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn labels(&self) -> &[String] {
        &self.mode_labels
    }

    pub fn n_modes(&self) -> usize {
        self.mode_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.mode_dims.iter().product()
    }

    pub fn mode_index(&self, label: &str) -> Option<usize> {
        self.mode_labels.iter().position(|l| l == label)
    }

    /// Stride of each mode in the flattened index.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.n_modes()];
        for m in (0..self.n_modes().saturating_sub(1)).rev() {
            s[m] = s[m + 1] * self.mode_dims[m + 1];
        }
        s
    }

    pub fn flat_index(&self, occ: &[usize]) -> usize {
        occ.iter().zip(self.strides()).map(|(n, s)| n * s).sum()
    }

    pub fn occupations(&self, mut idx: usize) -> Vec<usize> {
        let mut occ = vec![0; self.n_modes()];
        for m in (0..self.n_modes()).rev() {
            occ[m] = idx % self.mode_dims[m];
            idx /= self.mode_dims[m];
        }
        occ
    }

    fn check_mode(&self, mode: usize) -> DmmResult<()> {
        if mode >= self.n_modes() {
            return Err(DmmError::config(format!(
                "mode index {mode} out of range for a {}-mode space",
                self.n_modes()
            )));
        }
        Ok(())
    }
}

/// Build a space from per-mode truncations and unique labels.
pub fn make_space<S: AsRef<str>>(dims: &[usize], labels: &[S]) -> DmmResult<HilbertSpace> {
    if dims.is_empty() {
        return Err(DmmError::config("a space needs at least one mode"));
    }
    if dims.len() != labels.len() {
        return Err(DmmError::config(format!(
            "{} dims but {} labels",
            dims.len(),
            labels.len()
        )));
    }
    if let Some(d) = dims.iter().find(|&&d| d < 2) {
        return Err(DmmError::config(format!("mode truncation {d} is below 2")));
    }
    let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(DmmError::config(format!("duplicate mode label `{l}`")));
        }
    }
    Ok(HilbertSpace { mode_dims: dims.to_vec(), mode_labels: labels })
}

/// Space with labels `m0, m1, ...`.
pub fn make_space_unlabeled(dims: &[usize]) -> DmmResult<HilbertSpace> {
    let labels: Vec<String> = (0..dims.len()).map(|i| format!("m{i}")).collect();
    make_space(dims, &labels)
}

#[derive(Debug, Clone)]
pub enum OpMatrix {
    Sparse(CsrMatrix<C64>),
    Dense(DMatrix<C64>),
}

#[derive(Debug, Clone)]
pub struct Operator {
    space: HilbertSpace,
    matrix: OpMatrix,
    hermitian: bool,
}

fn csr_to_dense(m: &CsrMatrix<C64>) -> DMatrix<C64> {
    let mut d = DMatrix::zeros(m.nrows(), m.ncols());
    for (i, j, v) in m.triplet_iter() {
        d[(i, j)] += *v;
    }
    d
}

fn csr_adjoint(m: &CsrMatrix<C64>) -> CsrMatrix<C64> {
    let mut t = m.transpose();
    t.values_mut().iter_mut().for_each(|v| *v = v.conj());
    t
}

fn csr_from_triplets(n: usize, trip: &[(usize, usize, C64)]) -> CsrMatrix<C64> {
    let mut coo = CooMatrix::new(n, n);
    for &(i, j, v) in trip {
        if v != ZERO {
            coo.push(i, j, v);
        }
    }
    CsrMatrix::from(&coo)
}

impl Operator {
    pub fn from_dense(space: &HilbertSpace, m: DMatrix<C64>) -> DmmResult<Self> {
        let n = space.total_dim();
        if m.shape() != (n, n) {
            return Err(DmmError::dim(format!("matrix {:?} on a space of dim {n}", m.shape())));
        }
        Ok(Self { space: space.clone(), matrix: OpMatrix::Dense(m), hermitian: false })
    }

    pub fn from_sparse(space: &HilbertSpace, m: CsrMatrix<C64>) -> DmmResult<Self> {
        let n = space.total_dim();
        if (m.nrows(), m.ncols()) != (n, n) {
            return Err(DmmError::dim(format!(
                "matrix ({}, {}) on a space of dim {n}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self { space: space.clone(), matrix: OpMatrix::Sparse(m), hermitian: false })
    }

    pub fn zero(space: &HilbertSpace) -> Self {
        let n = space.total_dim();
        Self { space: space.clone(), matrix: OpMatrix::Sparse(CsrMatrix::zeros(n, n)), hermitian: true }
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let n = space.total_dim();
        Self { space: space.clone(), matrix: OpMatrix::Sparse(CsrMatrix::identity(n)), hermitian: true }
    }

    /// Mark the operator Hermitian after checking `‖A − A†‖ ≤ 1e-12 · max(1, ‖A‖)`.
    pub fn into_hermitian(mut self) -> DmmResult<Self> {
        let d = self.to_dense();
        let scale = linalg::max_abs(&d).max(1.0);
        let defect = linalg::hermiticity_defect(&d);
        if defect > 1e-12 * scale {
            return Err(DmmError::numerical("hilbert", format!("operator is not Hermitian (defect {defect:.3e})")));
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &OpMatrix {
        &self.matrix
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.matrix, OpMatrix::Sparse(_))
    }

    pub fn nnz(&self) -> usize {
        match &self.matrix {
            OpMatrix::Sparse(m) => m.nnz(),
            OpMatrix::Dense(m) => m.len(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.matrix {
            OpMatrix::Sparse(m) => csr_to_dense(m),
            OpMatrix::Dense(m) => m.clone(),
        }
    }

    /// Sparse form; dense operators are converted dropping exact zeros.
    pub fn to_sparse(&self) -> CsrMatrix<C64> {
        match &self.matrix {
            OpMatrix::Sparse(m) => m.clone(),
            OpMatrix::Dense(m) => {
                let n = m.nrows();
                let mut trip = Vec::new();
                for j in 0..n {
                    for i in 0..n {
                        trip.push((i, j, m[(i, j)]));
                    }
                }
                csr_from_triplets(n, &trip)
            }
        }
    }

    pub fn adjoint(&self) -> Self {
        let matrix = match &self.matrix {
            OpMatrix::Sparse(m) => OpMatrix::Sparse(csr_adjoint(m)),
            OpMatrix::Dense(m) => OpMatrix::Dense(m.adjoint()),
        };
        Self { space: self.space.clone(), matrix, hermitian: self.hermitian }
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        match &self.matrix {
            OpMatrix::Sparse(m) => m * v,
            OpMatrix::Dense(m) => m * v,
        }
    }

    pub fn mul_dense(&self, rhs: &DMatrix<C64>) -> DMatrix<C64> {
        match &self.matrix {
            OpMatrix::Sparse(m) => m * rhs,
            OpMatrix::Dense(m) => m * rhs,
        }
    }

    fn same_space(&self, other: &Self) -> DmmResult<()> {
        if self.space != other.space {
            return Err(DmmError::dim("operators live on different spaces"));
        }
        Ok(())
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &Self) -> DmmResult<Self> {
        self.same_space(other)?;
        let matrix = match (&self.matrix, &other.matrix) {
            (OpMatrix::Sparse(a), OpMatrix::Sparse(b)) => OpMatrix::Sparse(a * b),
            (OpMatrix::Sparse(a), OpMatrix::Dense(b)) => OpMatrix::Dense(a * b),
            (OpMatrix::Dense(a), _) => OpMatrix::Dense(a * other.to_dense()),
        };
        Ok(Self { space: self.space.clone(), matrix, hermitian: false })
    }

    /// Linear combination `a·self + b·other`.
    pub fn combine(&self, a: C64, other: &Self, b: C64) -> DmmResult<Self> {
        self.same_space(other)?;
        let matrix = match (&self.matrix, &other.matrix) {
            (OpMatrix::Sparse(x), OpMatrix::Sparse(y)) => OpMatrix::Sparse(scale_csr(x, a) + scale_csr(y, b)),
            _ => OpMatrix::Dense(self.to_dense() * a + other.to_dense() * b),
        };
        let hermitian = self.hermitian && other.hermitian && a.im == 0.0 && b.im == 0.0;
        Ok(Self { space: self.space.clone(), matrix, hermitian })
    }

    pub fn add(&self, other: &Self) -> DmmResult<Self> {
        self.combine(ONE, other, ONE)
    }

    pub fn scale(&self, s: C64) -> Self {
        let matrix = match &self.matrix {
            OpMatrix::Sparse(m) => OpMatrix::Sparse(scale_csr(m, s)),
            OpMatrix::Dense(m) => OpMatrix::Dense(m * s),
        };
        Self { space: self.space.clone(), matrix, hermitian: self.hermitian && s.im == 0.0 }
    }

    /// `⟨A⟩ = Tr(Aρ)` or `⟨ψ|A|ψ⟩`, without renormalizing the state.
    pub fn expectation(&self, state: &QuantumState) -> DmmResult<C64> {
        if state.space() != &self.space {
            return Err(DmmError::dim("operator and state live on different spaces"));
        }
        Ok(match state.repr() {
            StateRepr::Pure(v) => v.dotc(&self.apply(v)),
            StateRepr::Density(r) => linalg::trace(&self.mul_dense(r)),
        })
    }
}

fn scale_csr(m: &CsrMatrix<C64>, s: C64) -> CsrMatrix<C64> {
    let mut out = m.clone();
    out.values_mut().iter_mut().for_each(|v| *v *= s);
    out
}

/// Embed a single-mode matrix as `1 ⊗ … ⊗ local ⊗ … ⊗ 1` in sparse form.
pub fn embed_local(space: &HilbertSpace, mode: usize, local: &DMatrix<C64>) -> DmmResult<Operator> {
    space.check_mode(mode)?;
    let d = space.dims()[mode];
    if local.shape() != (d, d) {
        return Err(DmmError::dim(format!("local matrix {:?} for mode of dim {d}", local.shape())));
    }
    let stride = space.strides()[mode];
    let n = space.total_dim();
    let mut trip = Vec::new();
    for idx in 0..n {
        let k = (idx / stride) % d;
        let base = idx - k * stride;
        for l in 0..d {
            let v = local[(l, k)];
            if v != ZERO {
                trip.push((base + l * stride, idx, v));
            }
        }
    }
    Operator::from_sparse(space, csr_from_triplets(n, &trip))
}

pub fn annihilation_matrix(dim: usize) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |i, j| if j == i + 1 { C64::from((j as f64).sqrt()) } else { ZERO })
}

pub fn number_matrix(dim: usize) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |i, j| if i == j { C64::from(i as f64) } else { ZERO })
}

/// Annihilation and creation operators of `mode`.
pub fn ladder(space: &HilbertSpace, mode: usize) -> DmmResult<(Operator, Operator)> {
    space.check_mode(mode)?;
    let a = embed_local(space, mode, &annihilation_matrix(space.dims()[mode]))?;
    let adag = a.adjoint();
    Ok((a, adag))
}

pub fn number_operator(space: &HilbertSpace, mode: usize) -> DmmResult<Operator> {
    space.check_mode(mode)?;
    embed_local(space, mode, &number_matrix(space.dims()[mode]))?.into_hermitian()
}

/// Diagonal `(−1)^n` on `mode`.
pub fn parity_operator(space: &HilbertSpace, mode: usize) -> DmmResult<Operator> {
    space.check_mode(mode)?;
    let d = space.dims()[mode];
    let local = DMatrix::from_fn(d, d, |i, j| {
        if i != j {
            ZERO
        } else if i % 2 == 0 {
            ONE
        } else {
            -ONE
        }
    });
    embed_local(space, mode, &local)?.into_hermitian()
}

/// Poisson weight beyond the truncation, `e^{−|β|²}|β|^{2(d−1)}/(d−1)!`.
pub fn tail_weight(beta: C64, dim: usize) -> f64 {
    let x = beta.norm_sqr();
    if x == 0.0 {
        return 0.0;
    }
    let k = (dim - 1) as f64;
    let log_fact: f64 = (1..dim).map(|i| (i as f64).ln()).sum();
    (-x + k * x.ln() - log_fact).exp()
}

fn check_tail(beta: C64, dim: usize, mode: usize) -> DmmResult<()> {
    let tail = tail_weight(beta, dim);
    if tail > TAIL_ERROR {
        return Err(DmmError::Truncation { mode, tail, limit: TAIL_ERROR });
    }
    if tail > TAIL_WARN {
        warn!("mode {mode}: amplitude {beta} has tail weight {tail:.2e} at truncation {dim}");
    }
    Ok(())
}

/// Single-mode displacement `exp(βa† − β*a)` exponentiated at truncation `dim`.
pub fn displacement_matrix(dim: usize, beta: C64) -> DMatrix<C64> {
    let a = annihilation_matrix(dim);
    let gen = a.adjoint() * beta - &a * beta.conj();
    linalg::expm(&gen)
}

/// Displacement on `mode`, with the truncation checked against `|β|`.
pub fn displacement(space: &HilbertSpace, mode: usize, beta: C64) -> DmmResult<Operator> {
    space.check_mode(mode)?;
    let d = space.dims()[mode];
    check_tail(beta, d, mode)?;
    let local = displacement_matrix(d, beta);
    let dev = linalg::max_abs(&(&local.adjoint() * &local - DMatrix::<C64>::identity(d, d)));
    if dev > TAIL_WARN {
        warn!("displacement on mode {mode}: truncated unitarity deviation {dev:.2e}");
    }
    embed_local(space, mode, &local)
}

/// Exact Fock amplitudes `e^{−|α|²/2} αⁿ/√n!` for `n < dim`, without renormalization.
pub fn coherent_amplitudes(dim: usize, alpha: C64) -> DVector<C64> {
    let mut v = DVector::zeros(dim);
    let mut c = C64::from((-alpha.norm_sqr() / 2.0).exp());
    for n in 0..dim {
        v[n] = c;
        c *= alpha / ((n + 1) as f64).sqrt();
    }
    v
}

/// Fock amplitudes of `|α⟩` truncated to `dim` levels and renormalized.
pub fn coherent_vector(dim: usize, alpha: C64) -> DVector<C64> {
    let v = coherent_amplitudes(dim, alpha);
    let nrm = v.norm();
    v / C64::from(nrm)
}

/// Smallest truncation `≥ floor` whose top level holds less than [`LEAKAGE_FLAG`]
/// of a coherent state with amplitude `|α|`.
pub fn adequate_dim(alpha: f64, floor: usize) -> usize {
    let mut d = floor.max(2);
    while tail_weight(C64::from(alpha), d) >= LEAKAGE_FLAG {
        d += 1;
    }
    d
}

/// Normalized `|α⟩ + e^{iμ}|−α⟩` at truncation `dim`.
pub fn cat_vector(dim: usize, alpha: C64, mu: f64) -> DVector<C64> {
    let v = coherent_vector(dim, alpha) + coherent_vector(dim, -alpha) * C64::from_polar(1.0, mu);
    let nrm = v.norm();
    v / C64::from(nrm)
}

/// Cat normalization `N = 2(1 + cos μ · e^{−2|α|²})` of `|α⟩ + e^{iμ}|−α⟩`.
pub fn cat_norm(alpha: C64, mu: f64) -> f64 {
    2.0 * (1.0 + mu.cos() * (-2.0 * alpha.norm_sqr()).exp())
}

pub fn fock_vector(dim: usize, n: usize) -> DVector<C64> {
    let mut v = DVector::zeros(dim);
    v[n] = ONE;
    v
}

#[derive(Debug, Clone)]
pub enum StateRepr {
    Pure(DVector<C64>),
    Density(DMatrix<C64>),
}

#[derive(Debug, Clone)]
pub struct QuantumState {
    space: HilbertSpace,
    repr: StateRepr,
    weight: f64,
}

impl QuantumState {
    pub fn pure(space: &HilbertSpace, v: DVector<C64>) -> DmmResult<Self> {
        if v.len() != space.total_dim() {
            return Err(DmmError::dim(format!("vector of length {} on a space of dim {}", v.len(), space.total_dim())));
        }
        let nrm = v.norm();
        if nrm > 1.0 + 1e-12 {
            return Err(DmmError::numerical("hilbert", format!("state norm {nrm} exceeds one")));
        }
        Ok(Self { space: space.clone(), repr: StateRepr::Pure(v), weight: 1.0 })
    }

    /// Density matrix, checked for Hermiticity, trace ≤ 1 and eigenvalues ≥ −1e-10.
    pub fn density(space: &HilbertSpace, rho: DMatrix<C64>) -> DmmResult<Self> {
        let s = Self::density_unchecked(space, rho)?;
        s.validate()?;
        Ok(s)
    }

    pub(crate) fn density_unchecked(space: &HilbertSpace, rho: DMatrix<C64>) -> DmmResult<Self> {
        let n = space.total_dim();
        if rho.shape() != (n, n) {
            return Err(DmmError::dim(format!("density {:?} on a space of dim {n}", rho.shape())));
        }
        Ok(Self { space: space.clone(), repr: StateRepr::Density(rho), weight: 1.0 })
    }

    /// Product of per-mode vectors in tensor order.
    pub fn product(space: &HilbertSpace, locals: &[DVector<C64>]) -> DmmResult<Self> {
        if locals.len() != space.n_modes() {
            return Err(DmmError::dim(format!("{} factors for a {}-mode space", locals.len(), space.n_modes())));
        }
        let mut v = DVector::from_element(1, ONE);
        for (m, l) in locals.iter().enumerate() {
            if l.len() != space.dims()[m] {
                return Err(DmmError::dim(format!("factor {m} has length {} but mode dim {}", l.len(), space.dims()[m])));
            }
            v = linalg::kron_vec(&v, l);
        }
        Self::pure(space, v)
    }

    pub fn fock(space: &HilbertSpace, occ: &[usize]) -> DmmResult<Self> {
        if occ.len() != space.n_modes() || occ.iter().zip(space.dims()).any(|(n, d)| n >= d) {
            return Err(DmmError::config(format!("occupation {occ:?} does not fit dims {:?}", space.dims())));
        }
        let mut v = DVector::zeros(space.total_dim());
        v[space.flat_index(occ)] = ONE;
        Self::pure(space, v)
    }

    pub fn with_weight(mut self, w: f64) -> Self {
        self.weight = w;
        self
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn repr(&self) -> &StateRepr {
        &self.repr
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, StateRepr::Pure(_))
    }

    pub fn vector(&self) -> Option<&DVector<C64>> {
        match &self.repr {
            StateRepr::Pure(v) => Some(v),
            StateRepr::Density(_) => None,
        }
    }

    pub fn to_density(&self) -> DMatrix<C64> {
        match &self.repr {
            StateRepr::Pure(v) => v * v.adjoint(),
            StateRepr::Density(r) => r.clone(),
        }
    }

    pub fn into_density(self) -> Self {
        match self.repr {
            StateRepr::Pure(_) => Self { repr: StateRepr::Density(self.to_density()), ..self },
            StateRepr::Density(_) => self,
        }
    }

    /// `‖ψ‖²` or `Tr ρ`.
    pub fn trace(&self) -> f64 {
        match &self.repr {
            StateRepr::Pure(v) => v.norm_squared(),
            StateRepr::Density(r) => linalg::trace(r).re,
        }
    }

    pub fn normalized(&self) -> DmmResult<Self> {
        let t = self.trace();
        if t <= 0.0 {
            return Err(DmmError::numerical("hilbert", "cannot normalize a zero state"));
        }
        let repr = match &self.repr {
            StateRepr::Pure(v) => StateRepr::Pure(v / C64::from(t.sqrt())),
            StateRepr::Density(r) => StateRepr::Density(r / C64::from(t)),
        };
        Ok(Self { space: self.space.clone(), repr, weight: self.weight })
    }

    pub fn validate(&self) -> DmmResult<()> {
        match &self.repr {
            StateRepr::Pure(v) => {
                if v.norm() > 1.0 + 1e-12 {
                    return Err(DmmError::numerical("hilbert", "pure state norm exceeds one"));
                }
            }
            StateRepr::Density(r) => {
                let defect = linalg::hermiticity_defect(r);
                if defect > 1e-12 {
                    return Err(DmmError::numerical("hilbert", format!("density matrix not Hermitian (defect {defect:.2e})")));
                }
                let tr = linalg::trace(r).re;
                if tr > 1.0 + 1e-12 {
                    return Err(DmmError::numerical("hilbert", format!("density trace {tr} exceeds one")));
                }
                let (vals, _) = linalg::herm_eig(r);
                if let Some(&lo) = vals.first() {
                    if lo < -1e-10 {
                        return Err(DmmError::numerical("hilbert", format!("density eigenvalue {lo:.2e} is negative")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Population of each mode's top Fock level.
    pub fn top_level_populations(&self) -> Vec<f64> {
        let diag: Vec<f64> = match &self.repr {
            StateRepr::Pure(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            StateRepr::Density(r) => r.diagonal().iter().map(|z| z.re).collect(),
        };
        let mut out = vec![0.0; self.space.n_modes()];
        for (idx, p) in diag.iter().enumerate() {
            for (m, &n) in self.space.occupations(idx).iter().enumerate() {
                if n + 1 == self.space.dims()[m] {
                    out[m] += p;
                }
            }
        }
        out
    }

    /// Modes whose top-level population exceeds [`LEAKAGE_FLAG`].
    pub fn leakage_flags(&self) -> Vec<usize> {
        let flagged: Vec<usize> = self
            .top_level_populations()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > LEAKAGE_FLAG)
            .map(|(m, _)| m)
            .collect();
        for &m in &flagged {
            warn!("mode {m} ({}) populates its top Fock level", self.space.labels()[m]);
        }
        flagged
    }

    /// Mean occupation of each mode.
    pub fn mean_occupations(&self) -> Vec<f64> {
        let diag: Vec<f64> = match &self.repr {
            StateRepr::Pure(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            StateRepr::Density(r) => r.diagonal().iter().map(|z| z.re).collect(),
        };
        let mut out = vec![0.0; self.space.n_modes()];
        for (idx, p) in diag.iter().enumerate() {
            for (m, &n) in self.space.occupations(idx).iter().enumerate() {
                out[m] += n as f64 * p;
            }
        }
        out
    }
}

/// Product coherent state with one amplitude per mode.
pub fn coherent_state(space: &HilbertSpace, amplitudes: &[C64]) -> DmmResult<QuantumState> {
    if amplitudes.len() != space.n_modes() {
        return Err(DmmError::dim(format!("{} amplitudes for a {}-mode space", amplitudes.len(), space.n_modes())));
    }
    let mut locals = Vec::with_capacity(amplitudes.len());
    for (m, (&a, &d)) in amplitudes.iter().zip(space.dims()).enumerate() {
        check_tail(a, d, m)?;
        locals.push(coherent_vector(d, a));
    }
    QuantumState::product(space, &locals)
}

/// `(|α⟩ + e^{iμ}|−α⟩)/√N` on `mode`, vacuum on every other mode.
pub fn cat_state(space: &HilbertSpace, mode: usize, alpha: C64, mu: f64) -> DmmResult<QuantumState> {
    space.check_mode(mode)?;
    let d = space.dims()[mode];
    check_tail(alpha, d, mode)?;
    let locals: Vec<DVector<C64>> = space
        .dims()
        .iter()
        .enumerate()
        .map(|(m, &dm)| if m == mode { cat_vector(d, alpha, mu) } else { fock_vector(dm, 0) })
        .collect();
    QuantumState::product(space, &locals)
}

/// Reduced state on the modes in `keep`, in ascending tensor order.
pub fn partial_trace(state: &QuantumState, keep: &[usize]) -> DmmResult<QuantumState> {
    let space = state.space();
    if keep.is_empty() {
        return Err(DmmError::config("partial trace needs at least one kept mode"));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    for &m in &keep {
        space.check_mode(m)?;
    }
    let traced: Vec<usize> = (0..space.n_modes()).filter(|m| !keep.contains(m)).collect();
    let kdims: Vec<usize> = keep.iter().map(|&m| space.dims()[m]).collect();
    let klabels: Vec<&str> = keep.iter().map(|&m| space.labels()[m].as_str()).collect();
    let out_space = make_space(&kdims, &klabels)?;
    let tdims: Vec<usize> = traced.iter().map(|&m| space.dims()[m]).collect();
    let nk: usize = kdims.iter().product();
    let nt: usize = tdims.iter().product();
    let strides = space.strides();

    // full index of (kept digit tuple, traced digit tuple)
    let digits = |mut i: usize, dims: &[usize]| {
        let mut d = vec![0; dims.len()];
        for k in (0..dims.len()).rev() {
            d[k] = i % dims[k];
            i /= dims[k];
        }
        d
    };
    let koff: Vec<usize> = (0..nk)
        .map(|i| digits(i, &kdims).iter().zip(&keep).map(|(n, &m)| n * strides[m]).sum())
        .collect();
    let toff: Vec<usize> = (0..nt)
        .map(|i| digits(i, &tdims).iter().zip(&traced).map(|(n, &m)| n * strides[m]).sum())
        .collect();

    let mut out = DMatrix::<C64>::zeros(nk, nk);
    match state.repr() {
        StateRepr::Pure(v) => {
            let mut psi = DMatrix::<C64>::zeros(nk, nt);
            for (i, &ko) in koff.iter().enumerate() {
                for (t, &to) in toff.iter().enumerate() {
                    psi[(i, t)] = v[ko + to];
                }
            }
            out = &psi * psi.adjoint();
        }
        StateRepr::Density(r) => {
            for (j, &kj) in koff.iter().enumerate() {
                for (i, &ki) in koff.iter().enumerate() {
                    let mut acc = ZERO;
                    for &to in &toff {
                        acc += r[(ki + to, kj + to)];
                    }
                    out[(i, j)] = acc;
                }
            }
        }
    }
    Ok(QuantumState::density_unchecked(&out_space, out)?.with_weight(state.weight()))
}

/// Fidelity between two states on the same space.
///
/// Pure-pure gives `|⟨a|b⟩|²`, pure-mixed `⟨ψ|ρ|ψ⟩` and mixed-mixed the Uhlmann
/// fidelity. States are used as given, without renormalization.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> DmmResult<f64> {
    if a.space() != b.space() {
        return Err(DmmError::dim("fidelity between states on different spaces"));
    }
    let f = match (a.repr(), b.repr()) {
        (StateRepr::Pure(x), StateRepr::Pure(y)) => x.dotc(y).norm_sqr(),
        (StateRepr::Pure(x), StateRepr::Density(r)) | (StateRepr::Density(r), StateRepr::Pure(x)) => {
            x.dotc(&(r * x)).re
        }
        (StateRepr::Density(r), StateRepr::Density(s)) => linalg::uhlmann_fidelity(r, s),
    };
    Ok(f.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn make_space_checks_dims_and_labels() {
        let s = make_space(&[12, 16, 12], &["a1", "b", "a2"]).unwrap();
        assert_eq!(s.total_dim(), 2304);
        assert_eq!(make_space(&[2], &["q"]).unwrap().total_dim(), 2);
        assert!(matches!(make_space(&[10, 10], &["x", "x"]), Err(DmmError::Config(_))));
        assert!(make_space(&[0, 3], &["x", "y"]).is_err());
        assert!(make_space::<&str>(&[], &[]).is_err());
    }

    #[test]
    fn ladder_action() {
        let s = make_space_unlabeled(&[3]).unwrap();
        let (a, adag) = ladder(&s, 0).unwrap();
        let v = a.apply(&fock_vector(3, 2));
        assert_abs_diff_eq!((v[1] - C64::from(2f64.sqrt())).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.apply(&fock_vector(3, 0)).norm(), 0.0);
        let n = adag.compose(&a).unwrap().to_dense();
        for k in 0..3 {
            assert_abs_diff_eq!(n[(k, k)].re, k as f64, epsilon = 1e-14);
        }
        assert!(ladder(&s, 1).is_err());
    }

    #[test]
    fn ladder_acts_only_on_its_mode() {
        let s = make_space_unlabeled(&[3, 4, 2]).unwrap();
        let (b, _) = ladder(&s, 1).unwrap();
        let st = QuantumState::fock(&s, &[2, 3, 1]).unwrap();
        let out = b.apply(st.vector().unwrap());
        let idx = s.flat_index(&[2, 2, 1]);
        assert_abs_diff_eq!(out[idx].re, 3f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(out.norm(), 3f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn displacement_identities() {
        let s = make_space_unlabeled(&[30]).unwrap();
        let beta = c(0.8, -0.5);
        let id = displacement(&s, 0, ZERO).unwrap().to_dense();
        assert_abs_diff_eq!(linalg::max_abs(&(id - DMatrix::identity(30, 30))), 0.0, epsilon = 1e-14);
        let d = displacement(&s, 0, beta).unwrap();
        let dm = displacement(&s, 0, -beta).unwrap();
        let vac = fock_vector(30, 0);
        let coh = coherent_state(&s, &[beta]).unwrap();
        assert_abs_diff_eq!((d.apply(&vac) - coh.vector().unwrap()).norm(), 0.0, epsilon = 1e-9);
        // D(β)D(−β) on the low-lying block, away from the truncation edge
        let prod = d.compose(&dm).unwrap().to_dense();
        let block = prod.view((0, 0), (15, 15)).into_owned();
        assert_abs_diff_eq!(linalg::max_abs(&(block - DMatrix::identity(15, 15))), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn displacement_rejects_inadequate_truncation() {
        let s = make_space_unlabeled(&[4]).unwrap();
        assert!(matches!(displacement(&s, 0, c(2.0, 0.0)), Err(DmmError::Truncation { .. })));
    }

    #[test]
    fn coherent_vacuum_overlap() {
        let s = make_space_unlabeled(&[20]).unwrap();
        let coh = coherent_state(&s, &[C64::from(2f64.sqrt())]).unwrap();
        let vac = QuantumState::fock(&s, &[0]).unwrap();
        assert_abs_diff_eq!(fidelity(&vac, &coh).unwrap(), (-2f64).exp(), epsilon = 1e-9);
        assert_abs_diff_eq!(fidelity(&vac, &coh).unwrap(), 0.1353, epsilon = 1e-4);
        let zero = coherent_state(&s, &[ZERO]).unwrap();
        assert_abs_diff_eq!(fidelity(&vac, &zero).unwrap(), 1.0, epsilon = 1e-15);
        let (a, _) = ladder(&s, 0).unwrap();
        let beta = c(1.1, 0.4);
        let coh = coherent_state(&s, &[beta]).unwrap();
        assert_abs_diff_eq!((a.expectation(&coh).unwrap() - beta).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn cat_states() {
        let alpha = C64::from(2f64.sqrt());
        assert_abs_diff_eq!(cat_norm(alpha, 0.0), 2.0366312777774684, epsilon = 1e-12);
        let s = make_space_unlabeled(&[20]).unwrap();
        let odd = cat_state(&s, 0, alpha, std::f64::consts::PI).unwrap();
        let v = odd.vector().unwrap();
        for n in (0..20).step_by(2) {
            assert!(v[n].norm() < 1e-12);
        }
        // μ = π/2: cross terms cancel, leaving ⟨P⟩ = ⟨α|−α⟩ = e^{−2|α|²}
        let pl = cat_state(&s, 0, alpha, std::f64::consts::FRAC_PI_2).unwrap();
        let p = parity_operator(&s, 0).unwrap();
        assert_abs_diff_eq!(p.expectation(&pl).unwrap().re, (-4f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn parity_identities() {
        let s = make_space_unlabeled(&[5]).unwrap();
        let p = parity_operator(&s, 0).unwrap();
        assert_abs_diff_eq!((p.apply(&fock_vector(5, 0))[0] - ONE).norm(), 0.0);
        assert_abs_diff_eq!((p.apply(&fock_vector(5, 1))[1] + ONE).norm(), 0.0);
        let pp = p.compose(&p).unwrap().to_dense();
        assert_abs_diff_eq!(linalg::max_abs(&(pp - DMatrix::identity(5, 5))), 0.0);
    }

    #[test]
    fn partial_trace_of_bus_coherent_state() {
        let s = make_space(&[4, 16, 4], &["a1", "b", "a2"]).unwrap();
        let st = coherent_state(&s, &[ZERO, C64::from(2.0), ZERO]).unwrap();
        let red = partial_trace(&st, &[0, 2]).unwrap();
        let r = red.to_density();
        assert_abs_diff_eq!((r[(0, 0)] - ONE).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(red.trace(), 1.0, epsilon = 1e-12);
        let all = partial_trace(&st.clone().into_density(), &[0, 1, 2]).unwrap();
        assert_abs_diff_eq!(linalg::max_abs(&(all.to_density() - st.to_density())), 0.0, epsilon = 1e-15);
        assert!(partial_trace(&st, &[]).is_err());
    }

    #[test]
    fn tensor_order_round_trips() {
        let s = make_space(&[3, 4, 5], &["a1", "b", "a2"]).unwrap();
        let st = QuantumState::fock(&s, &[2, 1, 4]).unwrap().into_density();
        let occ = st.mean_occupations();
        assert_eq!(occ, vec![2.0, 1.0, 4.0]);
        for (m, n) in [(0usize, 2usize), (1, 1), (2, 4)] {
            let r = partial_trace(&st, &[m]).unwrap().to_density();
            assert_abs_diff_eq!(r[(n, n)].re, 1.0);
        }
        let r02 = partial_trace(&st, &[2, 0]).unwrap();
        assert_eq!(r02.space().labels(), &["a1".to_string(), "a2".to_string()]);
        assert_abs_diff_eq!(r02.mean_occupations()[1], 4.0);
    }

    #[test]
    fn leakage_monitor_flags_top_level() {
        let s = make_space_unlabeled(&[3, 3]).unwrap();
        let st = QuantumState::fock(&s, &[0, 2]).unwrap();
        assert_eq!(st.leakage_flags(), vec![1]);
    }

    #[test]
    fn density_validation() {
        let s = make_space_unlabeled(&[2]).unwrap();
        let bad = DMatrix::from_row_slice(2, 2, &[c(1.2, 0.0), ZERO, ZERO, c(-0.2, 0.0)]);
        assert!(QuantumState::density(&s, bad).is_err());
        let nonherm = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), ZERO, c(0.5, 0.0)]);
        assert!(QuantumState::density(&s, nonherm).is_err());
    }

    proptest! {
        #[test]
        fn product_factor_recovered(re1 in -1.0..1.0f64, im1 in -1.0..1.0f64, re2 in -1.0..1.0f64, im2 in -1.0..1.0f64) {
            let s = make_space_unlabeled(&[14, 14]).unwrap();
            let a = c(re1, im1);
            let b = c(re2, im2);
            let st = coherent_state(&s, &[a, b]).unwrap();
            let red = partial_trace(&st, &[1]).unwrap().to_density();
            let v = coherent_vector(14, b);
            let expect = &v * v.adjoint();
            prop_assert!(linalg::max_abs(&(red - expect)) < 1e-12);
        }

        #[test]
        fn fidelity_symmetric_for_pure_states(re in -1.5..1.5f64, im in -1.5..1.5f64) {
            let s = make_space_unlabeled(&[20]).unwrap();
            let x = coherent_state(&s, &[c(re, im)]).unwrap();
            let y = cat_state(&s, 0, c(im, re), 0.3).unwrap();
            let f1 = fidelity(&x, &y).unwrap();
            let f2 = fidelity(&y, &x).unwrap();
            prop_assert!((f1 - f2).abs() < 1e-12);
            let xm = x.clone().into_density();
            prop_assert!((fidelity(&xm, &y).unwrap() - f1).abs() < 1e-10);
        }
    }
}
