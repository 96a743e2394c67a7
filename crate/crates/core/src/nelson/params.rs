use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{norm3, MomentumGrid};

/// Physical parameters of the fiber Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelsonParams {
    /// Total momentum, `|P| < 1/3`.
    pub p: [f64; 3],
    /// Infrared cutoff, `0 < sigma <= kappa`.
    pub sigma: f64,
    /// Ultraviolet cutoff.
    pub kappa: f64,
    /// Coupling constant.
    pub lambda: f64,
    /// Regularity exponent in `[0, 1/2]`.
    pub alpha_bar: f64,
    /// Width of the smooth ultraviolet switch-off, in `(0, 1)`.
    pub eps0: f64,
}

impl Default for NelsonParams {
    fn default() -> Self {
        Self {
            p: [0.1, 0.0, 0.0],
            sigma: 0.05,
            kappa: 1.0,
            lambda: 0.1,
            alpha_bar: 0.0,
            eps0: 0.25,
        }
    }
}

/// Upper end of the admissible momentum ball.
pub const MOMENTUM_BOUND: f64 = 1.0 / 3.0;

impl NelsonParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: String| Err(Error::InvalidParameter { field, reason });
        if !self.p.iter().all(|c| c.is_finite()) || norm3(&self.p) >= MOMENTUM_BOUND {
            return bad(
                "P",
                format!("|P| = {} must be below 1/3", norm3(&self.p)),
            );
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad("kappa", format!("{} must be positive", self.kappa));
        }
        if !(self.sigma > 0.0 && self.sigma <= self.kappa) {
            return bad(
                "sigma",
                format!("{} must lie in (0, kappa = {}]", self.sigma, self.kappa),
            );
        }
        if !self.lambda.is_finite() {
            return bad("lambda", "must be finite".into());
        }
        if !(0.0..=0.5).contains(&self.alpha_bar) {
            return bad("alpha_bar", format!("{} must lie in [0, 1/2]", self.alpha_bar));
        }
        if !(self.eps0 > 0.0 && self.eps0 < 1.0) {
            return bad("eps0", format!("{} must lie in (0, 1)", self.eps0));
        }
        Ok(())
    }

    pub fn with_p(mut self, p: [f64; 3]) -> Self {
        self.p = p;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    /// Smooth radial switch-off: 1 for `r <= (1 - eps0) kappa`, 0 for `r >= kappa`.
    pub fn chi_kappa(&self, r: f64) -> f64 {
        smooth_step(r, (1.0 - self.eps0) * self.kappa, self.kappa)
    }

    /// Form factor `lambda chi_[sigma,kappa)(k) |k|^alpha_bar / sqrt(2|k|)`.
    pub fn form_factor(&self, k: &[f64; 3]) -> f64 {
        let r = norm3(k);
        if r < self.sigma || r >= self.kappa || r == 0.0 {
            return 0.0;
        }
        self.lambda * self.chi_kappa(r) * r.powf(self.alpha_bar) / (2.0 * r).sqrt()
    }

    pub fn form_factor_on(&self, grid: &MomentumGrid) -> Vec<f64> {
        grid.modes().iter().map(|m| self.form_factor(&m.k)).collect()
    }
}

fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// C-infinity transition from 1 at `a` to 0 at `b`.
pub fn smooth_step(r: f64, a: f64, b: f64) -> f64 {
    if r <= a {
        return 1.0;
    }
    if r >= b {
        return 0.0;
    }
    let x = (r - a) / (b - a);
    let up = bump(1.0 - x);
    up / (up + bump(x))
}
