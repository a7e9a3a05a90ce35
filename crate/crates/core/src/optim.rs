//! Derivative-free minimization.

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Simplex diameter (infinity norm) below which the search stops.
    pub xtol: f64,
    /// Spread of function values below which the search stops.
    pub ftol: f64,
    /// Per-coordinate size of the initial simplex.
    pub initial_step: Vec<f64>,
}

impl NelderMeadOptions {
    pub fn new(initial_step: Vec<f64>) -> Self {
        Self { max_iter: 4000, xtol: 1e-10, ftol: 1e-14, initial_step }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder–Mead simplex search with the standard coefficients (1, 2, ½, ½).
pub fn nelder_mead(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let n = x0.len();
    assert_eq!(opts.initial_step.len(), n, "one initial step per coordinate");
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step[i];
        simplex.push(x);
    }
    let mut fx: Vec<f64> = simplex.iter().map(|x| f(x)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fx[a].total_cmp(&fx[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        fx = order.iter().map(|&i| fx[i]).collect();

        let fspread = fx[n] - fx[0];
        let xspread = simplex[1..]
            .iter()
            .flat_map(|x| x.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if fspread <= opts.ftol && xspread <= opts.xtol {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|x| x[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (c - w)).collect() };

        let xr = along(1.0);
        let fr = f(&xr);
        if fr < fx[0] {
            let xe = along(2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                fx[n] = fe;
            } else {
                simplex[n] = xr;
                fx[n] = fr;
            }
            continue;
        }
        if fr < fx[n - 1] {
            simplex[n] = xr;
            fx[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < fx[n] {
            let xc = along(0.5);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < fx[n].min(fr) {
            simplex[n] = xc;
            fx[n] = fc;
            continue;
        }
        for i in 1..=n {
            let xs: Vec<f64> = simplex[0].iter().zip(&simplex[i]).map(|(b, x)| b + 0.5 * (x - b)).collect();
            fx[i] = f(&xs);
            simplex[i] = xs;
        }
    }
    let best = (0..=n).min_by(|&a, &b| fx[a].total_cmp(&fx[b])).unwrap();
    Minimum { x: simplex[best].clone(), f: fx[best], iterations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rosenbrock_minimum() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(rosen, &[-1.2, 1.0], &NelderMeadOptions::new(vec![0.5, 0.5]));
        assert!(m.converged);
        assert_abs_diff_eq!(m.x[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(m.x[1], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let opts = NelderMeadOptions { max_iter: 3, ..NelderMeadOptions::new(vec![1.0, 1.0, 1.0]) };
        let m = nelder_mead(|x: &[f64]| x.iter().map(|v| v * v).sum(), &[3.0, -2.0, 1.0], &opts);
        assert!(!m.converged);
        assert_eq!(m.iterations, 3);
    }
}
