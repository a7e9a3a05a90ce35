use crate::error::{DmmError, DmmResult};
use std::f64::consts::TAU;

/// Physical rates of the two-cavity, one-bus system.
///
/// Rates are angular frequencies (rad/s) and times are seconds. Self-Kerr,
/// dispersive shifts and anharmonicities keep their measured signs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub g1: f64,
    pub g2: f64,
    pub kappa_b: f64,
    pub t1_a1: f64,
    pub t1_a2: f64,
    pub k1: f64,
    pub k2: f64,
    pub chi_a1t1: f64,
    pub chi_a2t2: f64,
    pub chi_bt1: f64,
    pub chi_bt2: f64,
    pub alpha_t1: f64,
    pub alpha_t2: f64,
    pub delta_fsr: f64,
    pub t_dump: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            g1: TAU * 160e3,
            g2: TAU * 160e3,
            kappa_b: TAU * 600e3,
            t1_a1: 385e-6,
            t1_a2: 520e-6,
            k1: TAU * -23e3,
            k2: TAU * -7e3,
            chi_a1t1: TAU * -3.75e6,
            chi_a2t2: TAU * -2.2e6,
            chi_bt1: TAU * -2.1e6,
            chi_bt2: TAU * -2.5e6,
            alpha_t1: TAU * -182e6,
            alpha_t2: TAU * -187e6,
            delta_fsr: TAU * 2e9,
            t_dump: 2e-6,
        }
    }
}

impl SystemParams {
    /// Default parameters with both cavity lifetimes infinite and Kerr off.
    pub fn lossless_cavities() -> Self {
        Self { t1_a1: f64::INFINITY, t1_a2: f64::INFINITY, k1: 0.0, k2: 0.0, ..Self::default() }
    }

    /// Cavity energy decay rates `1/T1`.
    pub fn kappa_a(&self) -> (f64, f64) {
        (1.0 / self.t1_a1, 1.0 / self.t1_a2)
    }

    /// Largest rate entering the protocol dynamics, used to size integrator steps.
    pub fn max_rate(&self) -> f64 {
        let (ka1, ka2) = self.kappa_a();
        [self.g1, self.g2, self.kappa_b, ka1, ka2, self.k1.abs(), self.k2.abs()].into_iter().fold(0.0, f64::max)
    }

    pub fn validate(&self) -> DmmResult<()> {
        let nonneg = [
            ("g1", self.g1),
            ("g2", self.g2),
            ("kappa_b", self.kappa_b),
            ("t1_a1", self.t1_a1),
            ("t1_a2", self.t1_a2),
            ("delta_fsr", self.delta_fsr),
            ("t_dump", self.t_dump),
        ];
        for (name, v) in nonneg {
            if v.is_nan() || v < 0.0 {
                return Err(DmmError::config(format!("{name} = {v} must be non-negative")));
            }
        }
        if self.t1_a1 == 0.0 || self.t1_a2 == 0.0 {
            return Err(DmmError::config("cavity T1 must be positive"));
        }
        let signed = [self.k1, self.k2, self.chi_a1t1, self.chi_a2t2, self.chi_bt1, self.chi_bt2, self.alpha_t1, self.alpha_t2];
        if signed.iter().any(|v| !v.is_finite()) {
            return Err(DmmError::config("Kerr, dispersive and anharmonicity values must be finite"));
        }
        Ok(())
    }
}

/// Uniform sampling of `[t_start, t_end]` with spacing `dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, dt: f64) -> DmmResult<Self> {
        if !(dt > 0.0) || !(t_end >= t_start) {
            return Err(DmmError::config(format!("invalid time grid [{t_start}, {t_end}] step {dt}")));
        }
        if (t_end - t_start) / dt > 1e7 {
            return Err(DmmError::config("time grid exceeds 1e7 steps"));
        }
        Ok(Self { t_start, t_end, dt })
    }

    /// Grid with `n` intervals.
    pub fn with_steps(t_start: f64, t_end: f64, n: usize) -> DmmResult<Self> {
        let n = n.max(1);
        Self::new(t_start, t_end, ((t_end - t_start) / n as f64).max(f64::MIN_POSITIVE))
    }

    pub fn n_intervals(&self) -> usize {
        (((self.t_end - self.t_start) / self.dt) - 1e-9).ceil().max(0.0) as usize
    }

    /// Sample times including both end points; the last interval may be short.
    pub fn times(&self) -> Vec<f64> {
        let n = self.n_intervals();
        let mut t: Vec<f64> = (0..n).map(|k| self.t_start + k as f64 * self.dt).collect();
        t.push(self.t_end);
        t
    }
}
