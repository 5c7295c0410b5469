//! Instrument descriptors and their cashflows.
//!
//! Rate instruments (swaps, caps, floors) run on a short-rate grid; equity
//! options on a log-price grid. A [`Portfolio`] may not mix the two.

mod equity;
mod flows;
mod pricing;
mod schedule;

use serde::{Deserialize, Serialize};

pub use equity::{EquityEngine, LogNormal};
pub use flows::{cashflow_jump, rate_cashflows, terminal_payoff, Flow, FlowKind, RateCashflows};
pub use pricing::{
    annuity, cap_yield_value, capfloor_premium, float_leg_pv, par_swap_rate, solve_riskfree, SwapConventions,
};
pub use schedule::{build_schedule, Period};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Pays fixed, receives floating.
    Payer,
    Receiver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapFloorKind {
    Cap,
    Floor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Long,
    Short,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Self::Long => 1.0,
            Self::Short => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

fn one() -> f64 {
    1.0
}

fn two() -> u32 {
    2
}

fn four() -> u32 {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Swap {
    #[serde(default = "one")]
    pub notional: f64,
    pub fixed_rate: f64,
    pub direction: Direction,
    #[serde(default)]
    pub start: f64,
    pub maturity: f64,
    #[serde(default = "two")]
    pub fixed_freq: u32,
    #[serde(default = "four")]
    pub float_freq: u32,
}

impl Swap {
    pub fn new(direction: Direction, fixed_rate: f64, maturity: f64) -> Self {
        Self {
            notional: 1.0,
            fixed_rate,
            direction,
            start: 0.0,
            maturity,
            fixed_freq: 2,
            float_freq: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapFloor {
    #[serde(default = "one")]
    pub notional: f64,
    pub strike: f64,
    pub kind: CapFloorKind,
    pub position: Side,
    #[serde(default)]
    pub start: f64,
    pub maturity: f64,
    #[serde(default = "four")]
    pub freq: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquityOption {
    #[serde(default = "one")]
    pub notional: f64,
    pub spot: f64,
    pub strike: f64,
    pub expiry: f64,
    pub kind: OptionKind,
    pub position: Side,
    pub vol: f64,
    pub rate: f64,
}

impl EquityOption {
    pub fn payoff(&self, s: f64) -> f64 {
        let intrinsic = match self.kind {
            OptionKind::Call => (s - self.strike).max(0.0),
            OptionKind::Put => (self.strike - s).max(0.0),
        };
        self.position.sign() * self.notional * intrinsic
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Instrument {
    Swap(Swap),
    CapFloor(CapFloor),
    EquityOption(EquityOption),
}

/// Market factor an instrument is priced against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiskFactor {
    Rate,
    Equity { spot: f64, vol: f64, rate: f64 },
}

impl Instrument {
    pub fn validate(&self) -> Result<()> {
        let freq_ok = |f: u32| matches!(f, 1 | 2 | 4 | 12);
        match self {
            Self::Swap(s) => {
                if !(s.maturity > s.start) || s.start < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "swap maturity {} must follow start {}",
                        s.maturity, s.start
                    )));
                }
                if !freq_ok(s.fixed_freq) || !freq_ok(s.float_freq) {
                    return Err(Error::InvalidParameter("swap frequencies must be 1, 2, 4 or 12".into()));
                }
                if !(s.notional > 0.0) {
                    return Err(Error::InvalidParameter("swap notional must be positive".into()));
                }
            }
            Self::CapFloor(c) => {
                if !(c.strike > 0.0) {
                    return Err(Error::InvalidParameter("cap/floor strike must be positive".into()));
                }
                if !(c.maturity > c.start) || c.start < 0.0 || !freq_ok(c.freq) {
                    return Err(Error::InvalidParameter("bad cap/floor dates or frequency".into()));
                }
                if !(c.notional > 0.0) {
                    return Err(Error::InvalidParameter("cap/floor notional must be positive".into()));
                }
            }
            Self::EquityOption(o) => {
                if !(o.spot > 0.0 && o.strike > 0.0 && o.vol > 0.0 && o.expiry > 0.0 && o.notional > 0.0) {
                    return Err(Error::InvalidParameter(
                        "equity option needs positive spot, strike, vol, expiry and notional".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn factor(&self) -> RiskFactor {
        match self {
            Self::EquityOption(o) => RiskFactor::Equity {
                spot: o.spot,
                vol: o.vol,
                rate: o.rate,
            },
            _ => RiskFactor::Rate,
        }
    }

    pub fn maturity(&self) -> f64 {
        match self {
            Self::Swap(s) => s.maturity,
            Self::CapFloor(c) => c.maturity,
            Self::EquityOption(o) => o.expiry,
        }
    }

    pub fn notional(&self) -> f64 {
        match self {
            Self::Swap(s) => s.notional,
            Self::CapFloor(c) => c.notional,
            Self::EquityOption(o) => o.notional,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Holding {
    pub instrument: Instrument,
    #[serde(default = "one")]
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Portfolio {
    pub items: Vec<Holding>,
}

impl Portfolio {
    pub fn single(instrument: Instrument) -> Self {
        Self {
            items: vec![Holding {
                instrument,
                weight: 1.0,
            }],
        }
    }

    pub fn of(instruments: impl IntoIterator<Item = Instrument>) -> Self {
        Self {
            items: instruments
                .into_iter()
                .map(|instrument| Holding {
                    instrument,
                    weight: 1.0,
                })
                .collect(),
        }
    }

    /// Checks the portfolio is non-empty, valid and on a single risk factor.
    pub fn factor(&self) -> Result<RiskFactor> {
        let first = self
            .items
            .first()
            .ok_or_else(|| Error::IncompatiblePortfolio("portfolio is empty".into()))?;
        let factor = first.instrument.factor();
        for h in &self.items {
            h.instrument.validate()?;
            if !h.weight.is_finite() {
                return Err(Error::InvalidParameter("holding weight must be finite".into()));
            }
            if h.instrument.factor() != factor {
                return Err(Error::IncompatiblePortfolio(
                    "all holdings must share one risk factor (one rate curve or one equity underlier)".into(),
                ));
            }
        }
        Ok(factor)
    }

    pub fn maturity(&self) -> f64 {
        self.items.iter().map(|h| h.instrument.maturity()).fold(0.0, f64::max)
    }

    /// Holding with the longest maturity, used as the yield-value reference.
    pub fn longest(&self) -> Option<&Holding> {
        self.items
            .iter()
            .max_by(|a, b| a.instrument.maturity().total_cmp(&b.instrument.maturity()))
    }
}
