//! Closed-form error estimates for Bell-state generation.

use crate::dynamics::SystemParams;
use crate::error::{DmmError, DmmResult};

/// Contributions to the Bell-state infidelity. `total` is
/// `p_loss + p_decode + f_dmm`; the remaining fields are side estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetBreakdown {
    pub alpha: f64,
    pub p_loss: f64,
    pub p_decode: f64,
    pub f_dmm: f64,
    pub total: f64,
    /// Fraction of energy lost into off-resonant cable harmonics.
    pub eps_harmonics: f64,
    /// Minimum one-way loss through the link.
    pub eps_spl: f64,
    /// Cavity loss inherited from the bus (rad/s), worse of the two cavities.
    pub kappa_purcell: f64,
    pub f_purcell: f64,
}

impl BudgetBreakdown {
    pub fn fidelity(&self) -> f64 {
        1.0 - self.total
    }
}

/// Inputs of the budget that are not physical rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetParams {
    pub system: SystemParams,
    /// Time the cavities spend loaded (s).
    pub t_protocol: f64,
    pub p_decode: f64,
    /// Joint false-pass probability for a bright (emptied) state.
    pub bright_leak: f64,
}

impl Default for BudgetParams {
    fn default() -> Self {
        Self { system: SystemParams::default(), t_protocol: 5.592e-6, p_decode: 0.017, bright_leak: 0.015 }
    }
}

/// Probability of losing a photon from either cavity, `|α|² t (1/T1₁ + 1/T1₂)`.
pub fn p_loss(alpha: f64, t_protocol: f64, t1_a1: f64, t1_a2: f64) -> f64 {
    alpha * alpha * t_protocol * (1.0 / t1_a1 + 1.0 / t1_a2)
}

/// `(ε, 2|α|²ε)` with `ε = 2(g/Δ)(κ_b/Δ)` the energy fraction lost in neighbouring harmonics.
pub fn off_resonant_loss(g: f64, kappa_b: f64, delta_fsr: f64, alpha: f64) -> (f64, f64) {
    let eps = 2.0 * (g / delta_fsr) * (kappa_b / delta_fsr);
    (eps, 2.0 * alpha * alpha * eps)
}

/// `κ_b / (2Δ_FSR)`.
pub fn single_pass_loss(kappa_b: f64, delta_fsr: f64) -> f64 {
    kappa_b / (2.0 * delta_fsr)
}

/// Bus-inherited cavity loss `κ = (χ_at/α_t)(χ_bt/α_t)κ_b` and its infidelity `2|α|²κ/g`.
pub fn purcell(chi_at: f64, chi_bt: f64, alpha_t: f64, kappa_b: f64, g: f64, alpha: f64) -> (f64, f64) {
    let kappa = (chi_at / alpha_t) * (chi_bt / alpha_t) * kappa_b;
    (kappa, 2.0 * alpha * alpha * kappa / g)
}

/// Ideal dark-state pass probability `(1 − e^{−α²})²`.
pub fn dark_pass(alpha: f64) -> f64 {
    let x = 1.0 - (-alpha * alpha).exp();
    x * x
}

/// `F_DMM(α) = leak / (leak + p(gg|dark))`.
pub fn f_dmm(alpha: f64, bright_leak: f64) -> f64 {
    let d = dark_pass(alpha);
    if bright_leak + d == 0.0 {
        0.0
    } else {
        bright_leak / (bright_leak + d)
    }
}

/// Budget at `α` with the constant bright leak of `params`.
pub fn predicted_infidelity(alpha: f64, params: &BudgetParams) -> BudgetBreakdown {
    predicted_infidelity_with(alpha, params, |_| params.bright_leak)
}

/// Budget at `α` with an `α`-dependent bright leak.
pub fn predicted_infidelity_with(alpha: f64, params: &BudgetParams, bright_leak: impl Fn(f64) -> f64) -> BudgetBreakdown {
    let s = &params.system;
    let p_loss = p_loss(alpha, params.t_protocol, s.t1_a1, s.t1_a2);
    let f_dmm = f_dmm(alpha, bright_leak(alpha));
    let g = s.g1.abs().min(s.g2.abs());
    let (eps_harmonics, _) = off_resonant_loss(g, s.kappa_b, s.delta_fsr.abs(), alpha);
    let eps_spl = single_pass_loss(s.kappa_b, s.delta_fsr.abs());
    let p1 = purcell(s.chi_a1t1, s.chi_bt1, s.alpha_t1, s.kappa_b, s.g1.abs(), alpha);
    let p2 = purcell(s.chi_a2t2, s.chi_bt2, s.alpha_t2, s.kappa_b, s.g2.abs(), alpha);
    let (kappa_purcell, f_purcell) = if p1.0.abs() >= p2.0.abs() { p1 } else { p2 };
    BudgetBreakdown {
        alpha,
        p_loss,
        p_decode: params.p_decode,
        f_dmm,
        total: p_loss + params.p_decode + f_dmm,
        eps_harmonics,
        eps_spl,
        kappa_purcell: kappa_purcell.abs(),
        f_purcell: f_purcell.abs(),
    }
}

/// Budgets at each `α`.
pub fn budget_curve(alphas: &[f64], params: &BudgetParams) -> Vec<BudgetBreakdown> {
    alphas.iter().map(|&a| predicted_infidelity(a, params)).collect()
}

/// `α` minimizing the total on `[lo, hi]`: dense scan, then golden-section refinement.
pub fn optimum_alpha(params: &BudgetParams, lo: f64, hi: f64) -> DmmResult<BudgetBreakdown> {
    if !(lo > 0.0 && hi > lo) {
        return Err(DmmError::config(format!("invalid α range [{lo}, {hi}]")));
    }
    let total = |a: f64| predicted_infidelity(a, params).total;
    let n = 400;
    let h = (hi - lo) / n as f64;
    let best = (0..=n).min_by(|&i, &j| total(lo + h * i as f64).total_cmp(&total(lo + h * j as f64))).unwrap_or(0);
    let (mut a, mut b) = ((lo + h * (best as f64 - 1.0)).max(lo), (lo + h * (best as f64 + 1.0)).min(hi));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    while b - a > 1e-10 {
        if total(c) < total(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    Ok(predicted_infidelity(0.5 * (a + b), params))
}
