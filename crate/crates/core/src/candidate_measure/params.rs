use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::star_measures::Transform;

/// Shape parameters of the candidate measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateParams {
    /// Exponential growth rate of the tail density.
    pub delta: f64,
    /// Weight of the atom at zero.
    pub kappa: f64,
    /// Offset of the mid atom below one half.
    pub alpha0: f64,
    /// Lower end of the tail.
    pub big_m: f64,
    /// Shift applied to the atomic part of the score sum.
    pub sigma: f64,
    /// Scale of the tail density.
    pub gamma: f64,
    /// Slack mass sent to minus infinity.
    pub eps: f64,
    /// Offset of the mean degree above `log k + log log k`.
    pub beta: f64,
}

impl Default for CandidateParams {
    fn default() -> Self {
        Self { delta: 0.5, kappa: 0.5, alpha0: 0.01, big_m: 10.0, sigma: 0.01, gamma: 0.05, eps: 0.01, beta: 0.99 }
    }
}

impl CandidateParams {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.delta) {
            return invalid(format!("delta must lie in (0,1), got {}", self.delta));
        }
        if !open_unit(self.kappa) {
            return invalid(format!("kappa must lie in (0,1), got {}", self.kappa));
        }
        if !(self.alpha0 > 0.0 && self.alpha0 < 1.0 / 6.0) {
            return invalid(format!("alpha0 must lie in (0,1/6), got {}", self.alpha0));
        }
        if !(self.big_m >= 2.0 / self.delta) || !self.big_m.is_finite() {
            return invalid(format!("M must be at least 2/delta = {}, got {}", 2.0 / self.delta, self.big_m));
        }
        for (name, v) in [("sigma", self.sigma), ("gamma", self.gamma), ("eps", self.eps)] {
            if !(v > 0.0) || !v.is_finite() {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return invalid(format!("beta must lie in (0,1], got {}", self.beta));
        }
        Ok(())
    }

    /// Position of the mid atom: the transform of `1/2 - alpha0`.
    pub fn alpha(&self, k: usize) -> f64 {
        Transform::new(k).forward(0.5 - self.alpha0)
    }

    /// `d / (k-1)` for the degree at which the candidate is tested.
    pub fn scaled_degree(&self, k: usize) -> f64 {
        let lk = (k as f64).ln();
        lk + lk.ln() + self.beta
    }

    /// Mean offspring count `d`.
    pub fn degree(&self, k: usize) -> f64 {
        self.scaled_degree(k) * (k - 1) as f64
    }

    /// Fitted stand-in for the unspecified convolution constant, `8/M`.
    pub fn fitted_c_m(&self) -> f64 {
        8.0 / self.big_m
    }

    /// `(1+alpha0)(1+C_M gamma) exp(kappa (e^{-alpha delta} - 1))` with the
    /// fitted `C_M`.
    pub fn c_z(&self, k: usize) -> f64 {
        (1.0 + self.alpha0)
            * (1.0 + self.fitted_c_m() * self.gamma)
            * (self.kappa * ((-self.alpha(k) * self.delta).exp() - 1.0)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        CandidateParams::default().validate().unwrap();
    }

    #[test]
    fn rejects_small_m() {
        let p = CandidateParams { big_m: 3.9, ..Default::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn alpha_tends_to_log_two() {
        let p = CandidateParams { alpha0: 1e-9, ..Default::default() };
        assert!((p.alpha(1_000_000_000) - 2f64.ln()).abs() < 1e-6);
    }
}
