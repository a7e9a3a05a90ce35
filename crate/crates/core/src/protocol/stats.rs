use crate::error::{DmmError, DmmResult};

/// Heralding probability `½(1 − 2e^{−α²} + e^{−2α²})` in the large-overlap approximation.
pub fn success_probability(alpha: f64) -> f64 {
    let e = (-alpha * alpha).exp();
    0.5 * (1.0 - 2.0 * e + e * e)
}

/// Exact ideal heralding probability `½(1 − e^{−α²})²(1 − e^{−2α²})` for the
/// parity-less cat input, including the `⟨α, −α | −α, α⟩` overlap.
pub fn exact_success_probability(alpha: f64) -> f64 {
    let e = (-alpha * alpha).exp();
    0.5 * (1.0 - e).powi(2) * (1.0 - e * e)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiroundStats {
    pub mean_attempts: f64,
    /// Seconds.
    pub mean_wait: f64,
    /// Successes per second.
    pub rate: f64,
}

/// Repeat-until-success statistics: geometric attempts, each failure followed
/// by one reset.
pub fn multiround_stats(p_success: f64, t_attempt: f64, t_reset: f64) -> DmmResult<MultiroundStats> {
    if !(p_success > 0.0 && p_success <= 1.0) {
        return Err(DmmError::config(format!("success probability {p_success} outside (0, 1]")));
    }
    if t_attempt < 0.0 || t_reset < 0.0 {
        return Err(DmmError::config("attempt and reset times must be non-negative"));
    }
    let mean_attempts = 1.0 / p_success;
    let mean_wait = mean_attempts * (t_attempt + t_reset) - t_reset;
    Ok(MultiroundStats { mean_attempts, mean_wait, rate: 1.0 / mean_wait })
}
