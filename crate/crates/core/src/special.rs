//! Special functions and the Beta distribution.
//!
//! Gamma, log-gamma, digamma and the regularized incomplete beta function
//! come from `statrs` (Lanczos approximation, relative error ~1e-15).

use rand::{Rng, RngExt};
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};

pub use statrs::function::gamma::{digamma, gamma, ln_gamma};

/// Parameters of a Beta(α, β) law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("Beta {name} must be positive and finite, got {v}")));
            }
            if v < f64::MIN_POSITIVE {
                return Err(Error::Range(format!("Beta {name} = {v:e} is below the normal range")));
            }
        }
        Ok(Self { alpha, beta })
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            statrs::function::beta::beta_reg(self.alpha, self.beta, x)
        }
    }

    /// Method-of-moments fit; `None` when the sample variance is not
    /// compatible with a Beta law.
    pub fn fit_moments(mean: f64, var: f64) -> Option<Self> {
        if !(mean > 0.0 && mean < 1.0 && var > 0.0 && var < mean * (1.0 - mean)) {
            return None;
        }
        let k = mean * (1.0 - mean) / var - 1.0;
        Self::new(mean * k, (1.0 - mean) * k).ok()
    }

    /// Sample A ~ Beta(α, β).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x = ln_gamma_variate(self.alpha, rng);
        let y = ln_gamma_variate(self.beta, rng);
        logistic(x - y)
    }

    /// Sample ln(A / (1 − A)) for A ~ Beta(α, β) without forming A, so that
    /// parameters far from 1 do not round A to 0 or 1.
    pub fn sample_log_odds<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        ln_gamma_variate(self.alpha, rng) - ln_gamma_variate(self.beta, rng)
    }
}

/// 1 / (1 + e^{-x}).
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln G with G ~ Gamma(shape, 1). Small shapes use G = G' U^{1/shape} with
/// G' ~ Gamma(shape + 1), evaluated on the log scale.
fn ln_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        let g = Gamma::new(shape, 1.0).expect("validated shape");
        return g.sample(rng).ln();
    }
    let g = Gamma::new(shape + 1.0, 1.0).expect("validated shape");
    let u: f64 = 1.0 - rng.random::<f64>();
    g.sample(rng).ln() + u.ln() / shape
}
