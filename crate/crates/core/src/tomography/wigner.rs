use crate::error::{DmmError, DmmResult};
use crate::hilbert::{self, QuantumState};
use crate::linalg::{ONE, ZERO};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use std::io::{BufRead, Write};

/// Rectangular grid of displacements `β = re + i·im`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub re_axis: Vec<f64>,
    pub im_axis: Vec<f64>,
}

impl Default for GridSpec {
    /// 41 × 41 points over `|Re β|, |Im β| ≤ 2`, step 0.1.
    fn default() -> Self {
        Self::square(2.0, 41)
    }
}

impl GridSpec {
    /// `n` evenly spaced points over `[−extent, extent]` on both axes.
    pub fn square(extent: f64, n: usize) -> Self {
        let axis = linspace(-extent, extent, n);
        Self { re_axis: axis.clone(), im_axis: axis }
    }

    pub fn n_points(&self) -> usize {
        self.re_axis.len() * self.im_axis.len()
    }

    /// Points in row-major order: `im` varies fastest.
    pub fn points(&self) -> Vec<C64> {
        self.re_axis.iter().flat_map(|&r| self.im_axis.iter().map(move |&i| C64::new(r, i))).collect()
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Parity-convention Wigner data: `values[(i_re, i_im)] = ⟨D(β) P D†(β)⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub re_axis: Vec<f64>,
    pub im_axis: Vec<f64>,
    pub values: DMatrix<f64>,
    pub shots_per_point: Option<u64>,
    /// Number of even-parity outcomes per point.
    pub counts: Option<DMatrix<u64>>,
}

impl WignerGrid {
    pub fn spec(&self) -> GridSpec {
        GridSpec { re_axis: self.re_axis.clone(), im_axis: self.im_axis.clone() }
    }

    /// Values flattened in [`GridSpec::points`] order.
    pub fn flat_values(&self) -> Vec<f64> {
        let (nr, ni) = self.values.shape();
        (0..nr).flat_map(|r| (0..ni).map(move |i| (r, i))).map(|(r, i)| self.values[(r, i)]).collect()
    }
}

/// Truncated matrix of `D(γ)`. Entries with both indices below `dim` are exact.
pub fn displacement_block(dim: usize, gamma: C64) -> DMatrix<C64> {
    let mut d = DMatrix::<C64>::zeros(dim, dim);
    let c0 = hilbert::coherent_amplitudes(dim, gamma);
    d.set_column(0, &c0);
    for m in 1..dim {
        let sm = (m as f64).sqrt();
        for n in 0..dim {
            let up = if n > 0 { d[(n - 1, m - 1)] * (n as f64).sqrt() } else { ZERO };
            d[(n, m)] = (up - gamma.conj() * d[(n, m - 1)]) / sm;
        }
    }
    d
}

/// `D(β) P D†(β) = D(2β) P` restricted to the lowest `dim` levels.
pub fn displaced_parity(dim: usize, beta: C64) -> DMatrix<C64> {
    let mut o = displacement_block(dim, 2.0 * beta);
    for m in (1..dim).step_by(2) {
        o.column_mut(m).neg_mut();
    }
    o
}

/// `Tr[ρ O]` for Hermitian `O`.
pub(crate) fn expect(rho: &DMatrix<C64>, o: &DMatrix<C64>) -> f64 {
    let n = rho.nrows();
    let mut s = ZERO;
    for i in 0..n {
        for j in 0..n {
            s += rho[(i, j)] * o[(j, i)];
        }
    }
    s.re
}

fn single_mode(state: &QuantumState, mode: usize) -> DmmResult<DMatrix<C64>> {
    let space = state.space();
    if mode >= space.n_modes() {
        return Err(DmmError::dim(format!("mode {mode} of a {}-mode space", space.n_modes())));
    }
    let reduced = if space.n_modes() == 1 { state.clone() } else { hilbert::partial_trace(state, &[mode])? };
    Ok(reduced.to_density())
}

/// Wigner map `W(β) = Tr[D†(β) ρ D(β) P]` of one mode, without the `2/π` prefactor.
pub fn wigner_map(state: &QuantumState, mode: usize, grid: &GridSpec) -> DmmResult<WignerGrid> {
    let rho = single_mode(state, mode)?;
    let dim = rho.nrows();
    let pts = grid.points();
    let max_beta = pts.iter().map(|b| b.norm()).fold(0.0, f64::max);
    let occupied = (0..dim).rev().find(|&n| rho[(n, n)].re > 1e-12).unwrap_or(0);
    let tail = hilbert::tail_weight(C64::from(2.0 * max_beta), dim.saturating_sub(occupied).max(1));
    if tail > 0.5 {
        log::warn!("displacements up to |β| = {max_beta:.2} probe beyond a {dim}-level truncation");
    }
    let vals: Vec<f64> = pts.par_iter().map(|&b| expect(&rho, &displaced_parity(dim, b))).collect();
    let values = DMatrix::from_row_slice(grid.re_axis.len(), grid.im_axis.len(), &vals);
    Ok(WignerGrid { re_axis: grid.re_axis.clone(), im_axis: grid.im_axis.clone(), values, shots_per_point: None, counts: None })
}

fn two_mode(rho12: &QuantumState) -> DmmResult<(DMatrix<C64>, usize, usize)> {
    if rho12.space().n_modes() != 2 {
        return Err(DmmError::dim("joint Wigner needs a two-cavity state"));
    }
    let d = rho12.space().dims();
    Ok((rho12.to_density(), d[0], d[1]))
}

/// `⟨O₁⟩, ⟨O₂⟩, ⟨O₁O₂⟩` of the local displaced parities.
pub fn joint_parity_moments(rho12: &QuantumState, beta: C64, gamma: C64) -> DmmResult<[f64; 3]> {
    let (rho, d1, d2) = two_mode(rho12)?;
    let o1 = displaced_parity(d1, beta);
    let o2 = displaced_parity(d2, gamma);
    let mut m = [0.0; 3];
    for a in 0..d1 {
        for b in 0..d2 {
            let row = a * d2 + b;
            for a2 in 0..d1 {
                for b2 in 0..d2 {
                    let col = a2 * d2 + b2;
                    let r = rho[(row, col)];
                    if r == ZERO {
                        continue;
                    }
                    let id1 = if a == a2 { ONE } else { ZERO };
                    let id2 = if b == b2 { ONE } else { ZERO };
                    m[0] += (r * o1[(a2, a)] * id2).re;
                    m[1] += (r * id1 * o2[(b2, b)]).re;
                    m[2] += (r * o1[(a2, a)] * o2[(b2, b)]).re;
                }
            }
        }
    }
    Ok(m)
}

/// Joint Wigner `⟨D(β)PD†(β) ⊗ D(γ)PD†(γ)⟩`.
pub fn joint_wigner(rho12: &QuantumState, beta: C64, gamma: C64) -> DmmResult<f64> {
    Ok(joint_parity_moments(rho12, beta, gamma)?[2])
}

/// Transmon readout confusion: `p_e_given_g[i]` and `p_g_given_e[i]` for module `i`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParityReadout {
    pub p_e_given_g: [f64; 2],
    pub p_g_given_e: [f64; 2],
}

/// Four raw joint maps `[gg, ge, eg, ee]` at one point.
///
/// For mapping `(x₁, x₂)` transmon `i` ends in `xᵢ` when its cavity parity is
/// even. Transmon 1 is scored `+1` for a `g` readout; transmon 2 is scored `+1`
/// when it reads its even-parity state `x₂`. Each map is the mean product of
/// the two scores.
pub fn raw_joint_maps(rho12: &QuantumState, beta: C64, gamma: C64, readout: &ParityReadout) -> DmmResult<[f64; 4]> {
    let [m1, m2, m12] = joint_parity_moments(rho12, beta, gamma)?;
    // probability of parities (s₁, s₂), s = ±1
    let p = |s1: f64, s2: f64| 0.25 * (1.0 + s1 * m1 + s2 * m2 + s1 * s2 * m12);
    // P(read g | transmon state) for module i
    let read_g = |i: usize, in_g: bool| if in_g { 1.0 - readout.p_e_given_g[i] } else { readout.p_g_given_e[i] };
    let mut out = [0.0; 4];
    for (k, &(x1g, x2g)) in [(true, true), (true, false), (false, true), (false, false)].iter().enumerate() {
        let mut acc = 0.0;
        for s1 in [1.0, -1.0] {
            for s2 in [1.0, -1.0] {
                // transmon in g iff (even parity) == (mapped to g)
                let t1g = (s1 > 0.0) == x1g;
                let t2g = (s2 > 0.0) == x2g;
                let g1 = read_g(0, t1g);
                let g2 = read_g(1, t2g);
                let e1 = g1 - (1.0 - g1);
                // score of transmon 2: +1 when it reads x₂
                let e2 = if x2g { g2 - (1.0 - g2) } else { (1.0 - g2) - g2 };
                acc += p(s1, s2) * e1 * e2;
            }
        }
        out[k] = acc;
    }
    Ok(out)
}

/// `(W^{g₁g₂} − W^{e₁e₂} − W^{e₁g₂} + W^{g₁e₂})/4`.
pub fn symmetrize(gg: f64, ge: f64, eg: f64, ee: f64) -> f64 {
    (gg - ee - eg + ge) / 4.0
}

/// Element-wise [`symmetrize`] of four raw maps.
pub fn symmetrize_maps(gg: &DMatrix<f64>, ge: &DMatrix<f64>, eg: &DMatrix<f64>, ee: &DMatrix<f64>) -> DmmResult<DMatrix<f64>> {
    let shape = gg.shape();
    if ge.shape() != shape || eg.shape() != shape || ee.shape() != shape {
        return Err(DmmError::dim("raw joint maps have different shapes"));
    }
    Ok(DMatrix::from_fn(shape.0, shape.1, |r, c| symmetrize(gg[(r, c)], ge[(r, c)], eg[(r, c)], ee[(r, c)])))
}

/// Single-mode symmetrization `(W^e − W^g)/2`.
pub fn symmetrize_single(w_e: f64, w_g: f64) -> f64 {
    (w_e - w_g) / 2.0
}

/// Binomial counts with success probabilities `probs` and `shots` trials per point.
pub fn sample_counts(probs: &DMatrix<f64>, shots: u64, seed: u64) -> DmmResult<DMatrix<u64>> {
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(DmmError::config("sampling probabilities must lie in [0, 1]"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (nr, nc) = probs.shape();
    let mut out = DMatrix::<u64>::zeros(nr, nc);
    for r in 0..nr {
        for c in 0..nc {
            let dist = Binomial::new(shots, probs[(r, c)]).map_err(|e| DmmError::config(e.to_string()))?;
            out[(r, c)] = dist.sample(&mut rng);
        }
    }
    Ok(out)
}

/// Simulate parity shots: each point yields even parity with probability `(1 + W)/2`.
pub fn sample_wigner(grid: &WignerGrid, shots: u64, seed: u64) -> DmmResult<WignerGrid> {
    if shots == 0 {
        return Err(DmmError::config("shots must be positive"));
    }
    let probs = grid.values.map(|w| (0.5 * (1.0 + w)).clamp(0.0, 1.0));
    let counts = sample_counts(&probs, shots, seed)?;
    let values = counts.map(|k| 2.0 * k as f64 / shots as f64 - 1.0);
    Ok(WignerGrid { values, shots_per_point: Some(shots), counts: Some(counts), ..grid.clone() })
}

pub const CSV_HEADER: &str = "re_beta,im_beta,value";
pub const CSV_HEADER_COUNTS: &str = "re_beta,im_beta,value,shots,counts";

/// Write `re_beta,im_beta,value[,shots,counts]` rows in grid order.
pub fn write_wigner_csv<W: Write>(grid: &WignerGrid, mut w: W) -> DmmResult<()> {
    let with_counts = grid.counts.is_some() && grid.shots_per_point.is_some();
    writeln!(w, "{}", if with_counts { CSV_HEADER_COUNTS } else { CSV_HEADER })?;
    for (r, re) in grid.re_axis.iter().enumerate() {
        for (i, im) in grid.im_axis.iter().enumerate() {
            write!(w, "{re},{im},{}", grid.values[(r, i)])?;
            if let (Some(n), Some(c)) = (grid.shots_per_point, &grid.counts) {
                write!(w, ",{n},{}", c[(r, i)])?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Read a grid written by [`write_wigner_csv`]. Rows must form a full rectangle.
pub fn read_wigner_csv<R: BufRead>(r: R) -> DmmResult<WignerGrid> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| DmmError::config("empty Wigner CSV"))??;
    let with_counts = match header.trim() {
        CSV_HEADER => false,
        CSV_HEADER_COUNTS => true,
        h => return Err(DmmError::config(format!("unexpected Wigner CSV header '{h}'"))),
    };
    let mut rows: Vec<(f64, f64, f64, u64, u64)> = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let bad = || DmmError::config(format!("malformed Wigner CSV row {}", k + 2));
        if f.len() != if with_counts { 5 } else { 3 } {
            return Err(bad());
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        let int = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
        let (n, c) = if with_counts { (int(f[3])?, int(f[4])?) } else { (0, 0) };
        rows.push((num(f[0])?, num(f[1])?, num(f[2])?, n, c));
    }
    let mut re_axis: Vec<f64> = Vec::new();
    let mut im_axis: Vec<f64> = Vec::new();
    for &(re, im, ..) in &rows {
        if !re_axis.contains(&re) {
            re_axis.push(re);
        }
        if !im_axis.contains(&im) {
            im_axis.push(im);
        }
    }
    if re_axis.len() * im_axis.len() != rows.len() {
        return Err(DmmError::config("Wigner CSV rows do not form a rectangular grid"));
    }
    let mut values = DMatrix::zeros(re_axis.len(), im_axis.len());
    let mut counts = DMatrix::<u64>::zeros(re_axis.len(), im_axis.len());
    let mut shots = None;
    for &(re, im, v, n, c) in &rows {
        let r = re_axis.iter().position(|&x| x == re).expect("axis built from rows");
        let i = im_axis.iter().position(|&x| x == im).expect("axis built from rows");
        values[(r, i)] = v;
        counts[(r, i)] = c;
        if with_counts {
            match shots {
                None => shots = Some(n),
                Some(s) if s != n => return Err(DmmError::config("Wigner CSV mixes shot numbers")),
                _ => {}
            }
        }
    }
    Ok(WignerGrid {
        re_axis,
        im_axis,
        values,
        shots_per_point: shots,
        counts: if with_counts { Some(counts) } else { None },
    })
}
