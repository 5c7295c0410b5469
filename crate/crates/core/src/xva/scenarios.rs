//! Ready-made scenario ladders: a counterparty rating ladder for rate
//! trades and funding scenarios for SIMM-margined equity options.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{decompose, mva, price_all_in, CollateralMode, CurveSet, PricingSetup, QuoteSide, XvaReport};
use crate::error::Result;
use crate::im::{funding_spread, FundingScenario, MarginRule, SimmEquity};
use crate::instruments::{EquityOption, Instrument, OptionKind, Portfolio, Side};
use crate::pde::GridSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingRow {
    pub label: String,
    /// Counterparty CDS spread over LIBOR, bp.
    pub cds_c: f64,
    /// Counterparty funding basis, bp.
    pub basis_c: f64,
}

impl RatingRow {
    pub fn new(label: &str, cds_c: f64, basis_c: f64) -> Self {
        Self {
            label: label.into(),
            cds_c,
            basis_c,
        }
    }
}

/// Six counterparties from AAA/AA+ to B.
pub fn standard_rating_ladder() -> Vec<RatingRow> {
    vec![
        RatingRow::new("AAA/AA+", 37.5, 15.0),
        RatingRow::new("AA/AA-", 75.0, 30.0),
        RatingRow::new("A", 125.0, 50.0),
        RatingRow::new("BBB", 250.0, 80.0),
        RatingRow::new("BB", 500.0, 80.0),
        RatingRow::new("B", 1000.0, 80.0),
    ]
}

/// Decomposes the same trade against each counterparty of the ladder.
pub fn rating_ladder(
    setup: &PricingSetup,
    base: &CurveSet,
    rows: &[RatingRow],
    rule: Option<&Arc<dyn MarginRule>>,
    mode: CollateralMode,
) -> Result<Vec<XvaReport>> {
    rows.par_iter()
        .map(|row| {
            let curves = CurveSet {
                cds_c: row.cds_c,
                basis_c: row.basis_c,
                ..*base
            };
            decompose(setup, &curves, rule, mode)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FundingCase {
    pub label: String,
    pub scenario: FundingScenario,
}

impl FundingCase {
    fn new(label: &str, sec_fraction: f64, equity_fraction: f64) -> Self {
        Self {
            label: label.into(),
            scenario: FundingScenario {
                sec_fraction,
                sec_rate: 0.005,
                equity_fraction,
                roe: 0.15,
                unsec_rate: 0.01,
            },
        }
    }
}

/// Margin funded half secured, fully by debt, at 3% and 6% equity, and
/// fully by equity at a 15% return target.
pub fn standard_funding_cases() -> Vec<FundingCase> {
    vec![
        FundingCase::new("50% Sec-0% Lev", 0.5, 0.0),
        FundingCase::new("0% Lev", 0.0, 0.0),
        FundingCase::new("3% Lev", 0.0, 0.03),
        FundingCase::new("6% Lev", 0.0, 0.06),
        FundingCase::new("100% Lev", 0.0, 1.0),
    ]
}

fn default_spot() -> f64 {
    100.0
}

fn default_vol() -> f64 {
    0.5
}

fn default_rate() -> f64 {
    0.01
}

fn default_expiry() -> f64 {
    1.0
}

fn default_long_expiry() -> f64 {
    2.0
}

fn default_allocated() -> f64 {
    0.234
}

fn simm_preset() -> SimmEquity {
    SimmEquity::with_risk_weight(0.25)
}

/// European call margined under SIMM equity, fully collateralized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimmTableSpec {
    #[serde(default = "default_spot")]
    pub spot: f64,
    #[serde(default = "default_spot")]
    pub strike: f64,
    #[serde(default = "default_vol")]
    pub vol: f64,
    #[serde(default = "default_rate")]
    pub rate: f64,
    #[serde(default = "default_expiry")]
    pub expiry: f64,
    #[serde(default = "default_long_expiry")]
    pub long_expiry: f64,
    #[serde(default = "simm_preset")]
    pub simm: SimmEquity,
    /// Multiplier allocated to an incremental trade.
    #[serde(default = "default_allocated")]
    pub allocated_eta: f64,
}

impl Default for SimmTableSpec {
    fn default() -> Self {
        Self {
            spot: default_spot(),
            strike: default_spot(),
            vol: default_vol(),
            rate: default_rate(),
            expiry: default_expiry(),
            long_expiry: default_long_expiry(),
            simm: simm_preset(),
            allocated_eta: default_allocated(),
        }
    }
}

impl SimmTableSpec {
    pub fn call(&self, expiry: f64) -> Portfolio {
        Portfolio::single(Instrument::EquityOption(EquityOption {
            notional: 1.0,
            spot: self.spot,
            strike: self.strike,
            expiry,
            kind: OptionKind::Call,
            position: Side::Long,
            vol: self.vol,
            rate: self.rate,
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimmRow {
    pub label: String,
    /// Funding spread, decimal.
    pub spread: f64,
    pub riskfree: f64,
    /// Delta, curvature and vega margin.
    pub mva_dgv: f64,
    /// Curvature and vega margin only.
    pub mva_gv: f64,
    /// All risks at the allocated multiplier.
    pub mva_allocated: f64,
    /// All risks, longer expiry.
    pub mva_long: f64,
    pub bid: f64,
    pub ask: f64,
}

pub fn simm_table(spec: &SimmTableSpec, cases: &[FundingCase], grid: GridSpec) -> Result<Vec<SimmRow>> {
    spec.simm.validate()?;
    let short = PricingSetup::equity(&spec.call(spec.expiry), grid)?;
    let long = PricingSetup::equity(&spec.call(spec.long_expiry), grid)?;
    let dgv: Arc<dyn MarginRule> = Arc::new(spec.simm.clone());
    let gv: Arc<dyn MarginRule> = Arc::new(SimmEquity {
        include_delta: false,
        ..spec.simm.clone()
    });
    let allocated = dgv.scaled(spec.allocated_eta);
    cases
        .par_iter()
        .map(|case| {
            case.scenario.validate()?;
            let spread = funding_spread(&case.scenario);
            let curves = CurveSet {
                s_l: spread * 1e4,
                ..Default::default()
            };
            let fv = CollateralMode::FullVm;
            let at = |s: crate::pde::ValueSurface| s.value_at(short.x0);
            Ok(SimmRow {
                label: case.label.clone(),
                spread,
                riskfree: at(short.solve_legs(&curves, None, fv, QuoteSide::Bid, super::Legs::NONE)?),
                mva_dgv: mva(&short, &curves, &dgv, fv)?,
                mva_gv: mva(&short, &curves, &gv, fv)?,
                mva_allocated: mva(&short, &curves, &allocated, fv)?,
                mva_long: mva(&long, &curves, &dgv, fv)?,
                bid: at(price_all_in(&short, &curves, Some(&dgv), fv, QuoteSide::Bid)?),
                ask: at(price_all_in(&short, &curves, Some(&dgv), fv, QuoteSide::Ask)?),
            })
        })
        .collect()
}
