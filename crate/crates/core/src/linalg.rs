//! Small dense complex linear-algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

// Padé(13) coefficients and the matching 1-norm threshold from Higham (2005).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn norm1(m: &DMatrix<C64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let nrm = norm1(a);
    let s = if nrm > THETA13 { (nrm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a * C64::from(0.5f64.powi(s));
    let ident = DMatrix::<C64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| C64::from(PADE13[k]);

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &ident * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &ident * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).expect("Padé denominator is singular");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Kronecker product `a ⊗ b` (first factor is the most significant index).
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn kron_vec(a: &DVector<C64>, b: &DVector<C64>) -> DVector<C64> {
    let mut out = DVector::zeros(a.len() * b.len());
    for (i, ai) in a.iter().enumerate() {
        for (k, bk) in b.iter().enumerate() {
            out[i * b.len() + k] = ai * bk;
        }
    }
    out
}

pub fn trace(m: &DMatrix<C64>) -> C64 {
    m.diagonal().sum()
}

pub fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::from(0.5)
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues ascend.
pub fn herm_eig(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Rebuild `V diag(f(λ)) V†` from a Hermitian eigen-decomposition.
pub fn herm_fn(m: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let (vals, vecs) = herm_eig(m);
    from_spectrum(&vals.iter().map(|&v| f(v)).collect::<Vec<_>>(), &vecs)
}

pub(crate) fn from_spectrum(vals: &[f64], vecs: &DMatrix<C64>) -> DMatrix<C64> {
    let n = vecs.nrows();
    let mut out = DMatrix::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        if lam == 0.0 {
            continue;
        }
        let v = vecs.column(k);
        out += &v * v.adjoint() * C64::from(lam);
    }
    out
}

/// Closest positive semidefinite matrix in Frobenius norm.
pub fn project_psd(m: &DMatrix<C64>) -> DMatrix<C64> {
    herm_fn(m, |v| v.max(0.0))
}

/// Euclidean projection of a real vector onto the probability simplex of mass `mass`.
pub fn project_simplex(v: &[f64], mass: f64) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumsum += uk;
        let t = (cumsum - mass) / (k as f64 + 1.0);
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Closest density matrix (PSD, unit trace) in Frobenius norm.
pub fn project_density(m: &DMatrix<C64>) -> DMatrix<C64> {
    let (vals, vecs) = herm_eig(m);
    from_spectrum(&project_simplex(&vals, 1.0), &vecs)
}

pub fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    herm_fn(m, |v| v.max(0.0).sqrt())
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²` between two PSD matrices.
pub fn uhlmann_fidelity(rho: &DMatrix<C64>, sigma: &DMatrix<C64>) -> f64 {
    let s = psd_sqrt(rho);
    let inner = &s * sigma * &s;
    let (vals, _) = herm_eig(&inner);
    let t: f64 = vals.iter().map(|v| v.max(0.0).sqrt()).sum();
    t * t
}

/// Trace distance `½‖a − b‖₁` between Hermitian matrices.
pub fn trace_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let (vals, _) = herm_eig(&(a - b));
    0.5 * vals.iter().map(|v| v.abs()).sum::<f64>()
}
