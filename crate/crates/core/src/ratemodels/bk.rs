use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CalibrationTargets, ModelFamily, ModelParams, ShortRateModel};
use crate::error::{Error, Result};
use crate::pde::{Diffusion, StateMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BkParams {
    pub kappa: f64,
    /// Mean level of the log-rate.
    pub mu: f64,
    pub sigma: f64,
    /// Initial log-rate.
    pub x0: f64,
}

impl BkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) || !(self.sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bk: kappa and sigma must be positive, got {} and {}",
                self.kappa, self.sigma
            )));
        }
        if !self.mu.is_finite() || !self.x0.is_finite() {
            return Err(Error::InvalidParameter("bk: mu and x0 must be finite".into()));
        }
        Ok(())
    }
}

/// Which statistic of the stationary short rate is pinned to the long-term
/// level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MeanAnchor {
    #[default]
    Median,
    Mean,
}

impl MeanAnchor {
    pub fn mu(self, level: f64, kappa: f64, sigma: f64) -> f64 {
        match self {
            Self::Median => level.ln(),
            Self::Mean => level.ln() - sigma * sigma / (4.0 * kappa),
        }
    }
}

/// `(drift, vol)` of `dx = kappa (mu - x) dt + sigma dW`.
pub fn bk_coefficients(x: f64, params: &BkParams) -> (f64, f64) {
    (params.kappa * (params.mu - x), params.sigma)
}

#[derive(Debug, Clone)]
pub struct BlackKarasinski {
    params: BkParams,
}

impl BlackKarasinski {
    pub fn new(params: BkParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn parameters(&self) -> &BkParams {
        &self.params
    }
}

impl Diffusion for BlackKarasinski {
    fn drift(&self, x: f64) -> f64 {
        bk_coefficients(x, &self.params).0
    }

    fn vol(&self, x: f64) -> f64 {
        bk_coefficients(x, &self.params).1
    }

    fn state_map(&self) -> StateMap {
        StateMap::Exp
    }
}

impl ShortRateModel for BlackKarasinski {
    fn kind(&self) -> &'static str {
        "bk"
    }

    fn libor(&self, x: f64) -> f64 {
        x.exp()
    }

    fn initial_state(&self) -> f64 {
        self.params.x0
    }

    fn default_domain(&self) -> (f64, f64) {
        let p = &self.params;
        let sd = p.sigma / (2.0 * p.kappa).sqrt();
        let top = p.x0.max(p.mu);
        // Rates above 50% carry no weight for the instruments priced here.
        let hi = (top + 6.0 * sd).min(0.5_f64.ln().max(top + 1.0));
        (p.x0.min(p.mu) - 6.0 * sd, hi)
    }

    fn params(&self) -> ModelParams {
        ModelParams::Bk(self.params.clone())
    }
}

/// Free coordinates `(x0, ln kappa, ln sigma)`; `mu` follows from the anchor.
#[derive(Debug)]
pub(super) struct BkFamily {
    pub level: f64,
    pub anchor: MeanAnchor,
}

impl ModelFamily for BkFamily {
    fn name(&self) -> &'static str {
        "bk"
    }

    fn initial_guess(&self, targets: &CalibrationTargets) -> [f64; 3] {
        [targets.libor3m.ln(), 0.1_f64.ln(), 0.4_f64.ln()]
    }

    fn build(&self, free: [f64; 3]) -> Result<Arc<dyn ShortRateModel>> {
        let (kappa, sigma) = (free[1].exp(), free[2].exp());
        Ok(Arc::new(BlackKarasinski::new(BkParams {
            kappa,
            mu: self.anchor.mu(self.level, kappa, sigma),
            sigma,
            x0: free[0],
        })?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn coefficients() {
        let p = BkParams {
            kappa: 0.1,
            mu: 0.044_f64.ln(),
            sigma: 0.3,
            x0: 0.003_f64.ln(),
        };
        assert_eq!(bk_coefficients(p.mu, &p).0, 0.0);
        assert_abs_diff_eq!(bk_coefficients(p.mu - 1.0, &p).0, 0.1, epsilon = 1e-15);
        assert_eq!(bk_coefficients(-7.0, &p).1, 0.3);
        let m = BlackKarasinski::new(p).unwrap();
        let (lo, hi) = m.default_domain();
        assert!(lo < m.initial_state() && m.initial_state() < hi);
    }

    #[test]
    fn mean_anchor_matches_lognormal_stationary_mean() {
        let (kappa, sigma) = (0.2_f64, 0.5_f64);
        let mu = MeanAnchor::Mean.mu(0.044, kappa, sigma);
        // stationary x ~ N(mu, sigma^2 / (2 kappa)); E[e^x] = e^{mu + var/2}
        let mean = (mu + sigma * sigma / (4.0 * kappa)).exp();
        assert_abs_diff_eq!(mean, 0.044, epsilon = 1e-15);
        assert_abs_diff_eq!(MeanAnchor::Median.mu(0.044, kappa, sigma).exp(), 0.044, epsilon = 1e-15);
    }
}
