use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CalibrationTargets, ModelFamily, ModelParams, ShortRateModel};
use crate::error::{Error, Result};
use crate::pde::Diffusion;

const LOWER_KNEE: f64 = 0.015;
const UPPER_KNEE: f64 = 0.06;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MnlParams {
    /// Mean-reversion speed (1/year).
    pub a: f64,
    pub theta: f64,
    /// Plateau volatility (absolute rate per sqrt(year)).
    pub sigma2: f64,
    /// Initial LIBOR short rate.
    pub r0: f64,
}

impl MnlParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a", self.a),
            ("theta", self.theta),
            ("sigma2", self.sigma2),
            ("r0", self.r0),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "mnl: {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// `(drift, vol)` of `dr = a (theta - r) dt + sigma(r) dW`. Volatility is
/// clamped at zero for negative rates.
pub fn mnl_coefficients(r: f64, params: &MnlParams) -> (f64, f64) {
    let drift = params.a * (params.theta - r);
    let vol = if r < LOWER_KNEE {
        (r / LOWER_KNEE * params.sigma2).max(0.0)
    } else if r < UPPER_KNEE {
        params.sigma2
    } else {
        r / UPPER_KNEE * params.sigma2
    };
    (drift, vol)
}

#[derive(Debug, Clone)]
pub struct MixedNormalLognormal {
    params: MnlParams,
}

impl MixedNormalLognormal {
    pub fn new(params: MnlParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn parameters(&self) -> &MnlParams {
        &self.params
    }
}

impl Diffusion for MixedNormalLognormal {
    fn drift(&self, x: f64) -> f64 {
        mnl_coefficients(x, &self.params).0
    }

    fn vol(&self, x: f64) -> f64 {
        mnl_coefficients(x, &self.params).1
    }
}

impl ShortRateModel for MixedNormalLognormal {
    fn kind(&self) -> &'static str {
        "mnl"
    }

    fn libor(&self, x: f64) -> f64 {
        x
    }

    fn initial_state(&self) -> f64 {
        self.params.r0
    }

    fn default_domain(&self) -> (f64, f64) {
        (-0.01, 0.20)
    }

    fn params(&self) -> ModelParams {
        ModelParams::Mnl(self.params.clone())
    }
}

/// Free coordinates `(r0, ln a, ln sigma2)`, theta fixed.
#[derive(Debug)]
pub(super) struct MnlFamily {
    pub theta: f64,
}

impl ModelFamily for MnlFamily {
    fn name(&self) -> &'static str {
        "mnl"
    }

    fn initial_guess(&self, targets: &CalibrationTargets) -> [f64; 3] {
        [targets.libor3m, 0.15_f64.ln(), 0.0105_f64.ln()]
    }

    fn build(&self, free: [f64; 3]) -> Result<Arc<dyn ShortRateModel>> {
        Ok(Arc::new(MixedNormalLognormal::new(MnlParams {
            a: free[1].exp(),
            theta: self.theta,
            sigma2: free[2].exp(),
            r0: free[0],
        })?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p() -> MnlParams {
        MnlParams {
            a: 0.05,
            theta: 0.044,
            sigma2: 0.0105,
            r0: 0.003,
        }
    }

    #[test]
    fn vol_at_knees_and_below() {
        assert_abs_diff_eq!(mnl_coefficients(0.015, &p()).1, 0.0105);
        assert_abs_diff_eq!(mnl_coefficients(0.0075, &p()).1, 0.00525, epsilon = 1e-15);
        assert_abs_diff_eq!(mnl_coefficients(0.044, &p()).0, 0.0);
        assert_eq!(mnl_coefficients(-0.002, &p()).1, 0.0);
    }

    #[test]
    fn vol_is_continuous_at_both_knees() {
        for knee in [LOWER_KNEE, UPPER_KNEE] {
            let below = mnl_coefficients(knee - 1e-12, &p()).1;
            let above = mnl_coefficients(knee + 1e-12, &p()).1;
            assert_abs_diff_eq!(below, 0.0105, epsilon = 1e-11);
            assert_abs_diff_eq!(above, 0.0105, epsilon = 1e-11);
        }
    }

    #[test]
    fn rejects_non_positive_parameters() {
        assert!(MixedNormalLognormal::new(MnlParams { a: 0.0, ..p() }).is_err());
        assert!(MixedNormalLognormal::new(MnlParams { r0: -0.001, ..p() }).is_err());
    }
}
