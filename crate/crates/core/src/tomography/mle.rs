use super::wigner::{displaced_parity, expect, WignerGrid};
use crate::error::{DmmError, DmmResult};
use crate::linalg;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

/// Iteration cap of both reconstruction loops.
pub const MAX_ITER: usize = 2000;

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub rho: DMatrix<C64>,
    pub converged: bool,
    /// RMS misfit between the data and the model expectation values.
    pub residual: f64,
    pub iterations: usize,
}

fn observables(grid: &WignerGrid, dim: usize) -> Vec<DMatrix<C64>> {
    grid.spec().points().par_iter().map(|&b| displaced_parity(dim, b)).collect()
}

fn rms_misfit(rho: &DMatrix<C64>, ops: &[DMatrix<C64>], data: &[f64]) -> f64 {
    let s: f64 = ops.iter().zip(data).map(|(o, w)| (expect(rho, o) - w).powi(2)).sum();
    (s / data.len() as f64).sqrt()
}

/// Reconstruct a `dim`-level density matrix from Wigner data.
///
/// With shot counts the binomial likelihood is maximized by diluted `RρR`
/// iterations (always unit trace). Without counts a least-squares fit is
/// projected onto density matrices (`trace_constrained`) or PSD matrices.
/// When the trace is constrained the data are first rescaled so that the
/// least-squares trace is one.
pub fn mle_density(grid: &WignerGrid, dim: usize, trace_constrained: bool) -> DmmResult<ReconstructionResult> {
    if dim == 0 {
        return Err(DmmError::config("reconstruction dimension must be positive"));
    }
    let ops = observables(grid, dim);
    let data = grid.flat_values();
    let res = match (&grid.counts, grid.shots_per_point) {
        (Some(counts), Some(shots)) if trace_constrained => {
            let (nr, ni) = counts.shape();
            let k: Vec<f64> = (0..nr).flat_map(|r| (0..ni).map(move |i| (r, i))).map(|(r, i)| counts[(r, i)] as f64).collect();
            rrho(&ops, &k, shots as f64, dim)
        }
        _ => least_squares(&ops, &data, dim, trace_constrained)?,
    };
    let res = ReconstructionResult { residual: rms_misfit(&res.rho, &ops, &data), ..res };
    if !res.converged {
        log::warn!("Wigner reconstruction stopped at the iteration cap (residual {:.3e})", res.residual);
    }
    Ok(res)
}

fn log_likelihood(rho: &DMatrix<C64>, ops: &[DMatrix<C64>], even: &[f64], shots: f64) -> f64 {
    ops.iter()
        .zip(even)
        .map(|(o, &k)| {
            let w = expect(rho, o);
            let p = (0.5 * (1.0 + w)).clamp(1e-15, 1.0 - 1e-15);
            k * p.ln() + (shots - k) * (1.0 - p).ln()
        })
        .sum()
}

fn rrho(ops: &[DMatrix<C64>], even: &[f64], shots: f64, dim: usize) -> ReconstructionResult {
    let ident = DMatrix::<C64>::identity(dim, dim);
    let mut rho = &ident / C64::from(dim as f64);
    let total = shots * ops.len() as f64;
    let mut ll = log_likelihood(&rho, ops, even, shots);
    let mut eps = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        let mut r = DMatrix::<C64>::zeros(dim, dim);
        for (o, &k) in ops.iter().zip(even) {
            let w = expect(&rho, o);
            let p = (0.5 * (1.0 + w)).clamp(1e-15, 1.0 - 1e-15);
            // Σ_± n_±/p_± E_± with E_± = (1 ± O)/2
            let a = k / p;
            let b = (shots - k) / (1.0 - p);
            r += &ident * C64::from(0.5 * (a + b)) + o * C64::from(0.5 * (a - b));
        }
        r /= C64::from(total);
        loop {
            let step = &ident + (&r - &ident) * C64::from(eps);
            let mut next = &step * &rho * step.adjoint();
            next = linalg::hermitian_part(&next);
            next /= linalg::trace(&next);
            let ll_next = log_likelihood(&next, ops, even, shots);
            if ll_next >= ll - 1e-12 * ll.abs() || eps < 1e-6 {
                let gain = ll_next - ll;
                let change = linalg::max_abs(&(&next - &rho));
                rho = next;
                ll = ll_next;
                eps = (eps * 2.0).min(64.0);
                if change < 1e-7 || gain.abs() < 1e-12 * ll.abs().max(1.0) {
                    converged = true;
                }
                break;
            }
            eps *= 0.5;
        }
        if converged {
            break;
        }
    }
    ReconstructionResult { rho, converged, residual: 0.0, iterations }
}

fn vectorize_ops(ops: &[DMatrix<C64>], dim: usize) -> DMatrix<f64> {
    // real parametrization of Hermitian ρ: diagonal, then Re/Im of the upper triangle
    let np = dim * dim;
    DMatrix::from_fn(ops.len(), np, |k, col| {
        let o = &ops[k];
        let (i, j, part) = herm_index(dim, col);
        match part {
            0 => o[(i, i)].re,
            1 => 2.0 * o[(j, i)].re,
            _ => -2.0 * o[(j, i)].im,
        }
    })
}

/// Column `col` of the Hermitian parametrization: `(i, j, 0)` diagonal,
/// `(i, j, 1)` real part and `(i, j, 2)` imaginary part of `ρ_ij`, `i < j`.
fn herm_index(dim: usize, col: usize) -> (usize, usize, u8) {
    if col < dim {
        return (col, col, 0);
    }
    let k = (col - dim) / 2;
    let part = 1 + ((col - dim) % 2) as u8;
    let mut idx = 0;
    for i in 0..dim {
        for j in (i + 1)..dim {
            if idx == k {
                return (i, j, part);
            }
            idx += 1;
        }
    }
    unreachable!("column index inside the parametrization")
}

fn unvectorize(x: &[f64], dim: usize) -> DMatrix<C64> {
    let mut rho = DMatrix::<C64>::zeros(dim, dim);
    for (col, &v) in x.iter().enumerate() {
        let (i, j, part) = herm_index(dim, col);
        match part {
            0 => rho[(i, i)] = C64::from(v),
            1 => {
                rho[(i, j)].re = v;
                rho[(j, i)].re = v;
            }
            _ => {
                rho[(i, j)].im = v;
                rho[(j, i)].im = -v;
            }
        }
    }
    rho
}

fn least_squares(ops: &[DMatrix<C64>], data: &[f64], dim: usize, trace_constrained: bool) -> DmmResult<ReconstructionResult> {
    let a = vectorize_ops(ops, dim);
    let y = nalgebra::DVector::from_column_slice(data);
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&y, 1e-12).map_err(|e| DmmError::numerical("tomography", e))?;
    let raw = unvectorize(x.as_slice(), dim);
    let scale = if trace_constrained {
        let t = linalg::trace(&raw).re;
        if t <= 0.0 {
            return Err(DmmError::numerical("tomography", "least-squares estimate has non-positive trace"));
        }
        t
    } else {
        1.0
    };
    let y = &y / scale;
    let project = |m: &DMatrix<C64>| if trace_constrained { linalg::project_density(m) } else { linalg::project_psd(m) };

    // accelerated projected gradient on ½‖A x − y‖²
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let lip = smax * smax;
    let at = a.transpose();
    let mut rho = project(&(raw / C64::from(scale)));
    let mut z = rho.clone();
    let mut t = 1.0f64;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        let xz = vectorize_rho(&z);
        let grad = &at * (&a * xz - &y);
        let step = unvectorize(grad.as_slice(), dim);
        // the gradient in matrix form halves off-diagonal entries of the parametrization
        let step = halve_offdiag(&step);
        let next = project(&(&z - step * C64::from(1.0 / lip)));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let change = linalg::max_abs(&(&next - &rho));
        // restart the momentum when it points uphill
        let uphill = (&z - &next).iter().zip((&next - &rho).iter()).map(|(a, b)| (a.conj() * b).re).sum::<f64>() > 0.0;
        if uphill {
            z = next.clone();
            t = 1.0;
        } else {
            z = &next + (&next - &rho) * C64::from((t - 1.0) / t_next);
            t = t_next;
        }
        rho = next;
        if change < 1e-10 {
            converged = true;
            break;
        }
    }
    Ok(ReconstructionResult { rho, converged, residual: 0.0, iterations })
}

fn vectorize_rho(rho: &DMatrix<C64>) -> nalgebra::DVector<f64> {
    let dim = rho.nrows();
    let np = dim * dim;
    nalgebra::DVector::from_fn(np, |col, _| {
        let (i, j, part) = herm_index(dim, col);
        match part {
            0 => rho[(i, i)].re,
            1 => rho[(i, j)].re,
            _ => rho[(i, j)].im,
        }
    })
}

fn halve_offdiag(m: &DMatrix<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| if i == j { m[(i, j)] } else { m[(i, j)] * 0.5 })
}
