//! One-factor short-rate dynamics for the LIBOR short rate.
//!
//! Two families are registered: the mixed normal-lognormal model (`mnl`), with
//! a volatility plateau between 1.5% and 6%, and Black-Karasinski (`bk`) on the
//! log-rate. The risk-free short rate is the LIBOR short rate less a constant
//! LIBOR-OIS spread.

mod bk;
mod calibrate;
mod engine;
mod mnl;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use bk::{bk_coefficients, BkParams, BlackKarasinski, MeanAnchor};
pub use calibrate::{calibrate, residuals, CalibrationOutcome, CalibrationSettings, CalibrationTargets};
pub use engine::{zcb_price, RateEngine, ZcbProvider};
pub use mnl::{mnl_coefficients, MixedNormalLognormal, MnlParams};

use crate::error::Result;
use crate::pde::Diffusion;
use crate::registry::Registry;

pub trait ShortRateModel: Diffusion + fmt::Debug {
    fn kind(&self) -> &'static str;
    /// LIBOR short rate at engine state `x`.
    fn libor(&self, x: f64) -> f64;
    fn initial_state(&self) -> f64;
    fn default_domain(&self) -> (f64, f64);
    fn params(&self) -> ModelParams;
}

/// Serializable parameter set of either family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelParams {
    Mnl(MnlParams),
    Bk(BkParams),
}

impl ModelParams {
    pub fn build(&self) -> Result<Arc<dyn ShortRateModel>> {
        Ok(match self {
            Self::Mnl(p) => Arc::new(MixedNormalLognormal::new(p.clone())?),
            Self::Bk(p) => Arc::new(BlackKarasinski::new(p.clone())?),
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Mnl(_) => "mnl",
            Self::Bk(_) => "bk",
        }
    }
}

/// A calibratable model family with three free parameters, expressed in
/// unconstrained coordinates for the root finder.
pub trait ModelFamily: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn initial_guess(&self, targets: &CalibrationTargets) -> [f64; 3];
    fn build(&self, free: [f64; 3]) -> Result<Arc<dyn ShortRateModel>>;
}

/// Settings shared by the model families: the fixed long-term level of the
/// short rate and how the lognormal family matches it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilySettings {
    pub long_term_mean: f64,
    pub bk_anchor: MeanAnchor,
}

impl Default for FamilySettings {
    fn default() -> Self {
        Self {
            long_term_mean: 0.044,
            bk_anchor: MeanAnchor::Median,
        }
    }
}

pub type FamilyFactory = fn(&FamilySettings) -> Box<dyn ModelFamily>;

pub fn model_registry() -> Registry<FamilyFactory> {
    let mut reg: Registry<FamilyFactory> = Registry::new("short-rate model");
    reg.register("mnl", |s| {
        Box::new(mnl::MnlFamily {
            theta: s.long_term_mean,
        })
    });
    reg.register("bk", |s| {
        Box::new(bk::BkFamily {
            level: s.long_term_mean,
            anchor: s.bk_anchor,
        })
    });
    reg
}
