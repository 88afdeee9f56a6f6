use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::TwoPortRecord;
use crate::error::Result;

/// Below this `|S12·S21|` the device is treated as unilateral.
const UNILATERAL_THRESHOLD: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub freq_hz: f64,
    /// Rollett factor; `None` marks a unilateral device.
    pub k: Option<f64>,
    pub delta: Complex64,
    pub mu: f64,
    pub unconditionally_stable: bool,
}

/// Rollett `K`, `Δ` and the single-parameter `μ` test.
pub fn rollett_k(rec: &TwoPortRecord) -> Result<StabilityReport> {
    rec.validate()?;
    let delta = rec.s11 * rec.s22 - rec.s12 * rec.s21;
    let loop_gain = (rec.s12 * rec.s21).norm();
    let mu = (1.0 - rec.s11.norm_sqr()) / ((rec.s22 - delta * rec.s11.conj()).norm() + loop_gain);
    let k = (loop_gain >= UNILATERAL_THRESHOLD).then(|| {
        (1.0 - rec.s11.norm_sqr() - rec.s22.norm_sqr() + delta.norm_sqr()) / (2.0 * loop_gain)
    });
    let unconditionally_stable = match k {
        Some(k) => k > 1.0 && delta.norm() < 1.0,
        None => mu > 1.0,
    };
    Ok(StabilityReport {
        freq_hz: rec.freq_hz,
        k,
        delta,
        mu,
        unconditionally_stable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hand_evaluated_k() {
        let r = rollett_k(&TwoPortRecord::new(1e9, c(0.5), c(0.1), c(2.0), c(0.5))).unwrap();
        assert_relative_eq!(r.delta.re, 0.05, max_relative = 1e-14);
        assert_relative_eq!(r.k.unwrap(), 1.25625, max_relative = 1e-14);
        assert!(r.unconditionally_stable);
    }

    #[test]
    fn lossless_through_is_boundary() {
        let r = rollett_k(&TwoPortRecord::new(1e9, c(0.0), c(1.0), c(1.0), c(0.0))).unwrap();
        assert_eq!(r.k, Some(1.0));
        assert!(!r.unconditionally_stable);
    }

    #[test]
    fn unilateral_falls_back_to_mu() {
        let r = rollett_k(&TwoPortRecord::new(1e9, c(0.4), c(0.0), c(3.0), c(0.6))).unwrap();
        assert_eq!(r.k, None);
        assert!(r.mu.is_finite());
        assert_relative_eq!(r.mu, 1.0 / 0.6, max_relative = 1e-14);
        assert!(r.unconditionally_stable);
    }
}
