//! All-in pricing and the valuation-adjustment ladder.
//!
//! Party funding rates ride over the risk-free rate `r`: the CDS leg of a
//! party adds the LIBOR-OIS spread plus its CDS spread (both are quoted over
//! LIBOR), the basis leg adds its funding basis. Adjustments are attributed
//! one leg at a time from the risk-free value, with cross terms reported as a
//! residual.

mod basis;
mod netting;
mod report;
pub mod scenarios;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use basis::{ccp_basis, BasisPoint};
pub use netting::{netting_report, NettingReport};
pub use report::{write_adjustments_csv, ReportRow};

use crate::error::{Error, Result};
use crate::im::MarginRule;
use crate::instruments::{annuity, rate_cashflows, EquityEngine, Portfolio, SwapConventions};
use crate::pde::{solve, Discounting, GridSpec, MarginTerm, PdeProblem, ValueSurface};
use crate::ratemodels::RateEngine;

/// Deterministic spreads, all in bp.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveSet {
    pub libor_ois: f64,
    pub cds_b: f64,
    pub basis_b: f64,
    pub cds_c: f64,
    pub basis_c: f64,
    /// Margin funding spread over the risk-free rate.
    pub s_l: f64,
}

impl CurveSet {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("libor_ois", self.libor_ois),
            ("cds_b", self.cds_b),
            ("basis_b", self.basis_b),
            ("cds_c", self.cds_c),
            ("basis_c", self.basis_c),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "spread {name} must be non-negative, got {v}"
                )));
            }
        }
        if !self.s_l.is_finite() {
            return Err(Error::InvalidParameter("s_l must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollateralMode {
    #[default]
    Uncollateralized,
    /// Variation margin equal to the full value: discounting at `r`.
    FullVm,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuoteSide {
    /// Value to the party funding the margin.
    #[default]
    Bid,
    Ask,
}

/// Which spreads are switched on for a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Legs {
    pub cds_b: bool,
    pub cds_c: bool,
    pub basis_b: bool,
    pub basis_c: bool,
    pub margin: bool,
}

impl Legs {
    pub const NONE: Self = Self {
        cds_b: false,
        cds_c: false,
        basis_b: false,
        basis_c: false,
        margin: false,
    };
    pub const ALL: Self = Self {
        cds_b: true,
        cds_c: true,
        basis_b: true,
        basis_c: true,
        margin: true,
    };
    pub const SPREADS: Self = Self {
        margin: false,
        ..Self::ALL
    };
}

/// A portfolio laid out on an engine grid, with its risk-free problem.
#[derive(Clone)]
pub struct PricingSetup {
    pub base: PdeProblem,
    pub riskfree: Vec<f64>,
    /// LIBOR-OIS spread (decimal) of the rate engine; `None` for equity.
    pub libor_ois: Option<f64>,
    pub x0: f64,
    pub spec: GridSpec,
    /// Annuity for yield values; `None` reports present values only.
    pub annuity: Option<f64>,
    /// Cashflow dates, ascending, ending at the horizon.
    pub dates: Vec<f64>,
}

impl PricingSetup {
    /// Rate portfolio; yield values use the fixed-leg annuity of the longest
    /// maturity.
    pub fn rates(engine: &RateEngine, portfolio: &Portfolio, conv: &SwapConventions) -> Result<Self> {
        portfolio.factor()?;
        let cf = rate_cashflows(engine, portfolio)?;
        let base = engine.problem(cf.terminal, cf.horizon).with_events(cf.events);
        Ok(Self {
            riskfree: base.discount.when_nonneg.clone(),
            base,
            libor_ois: Some(engine.libor_ois),
            x0: engine.x0(),
            spec: engine.spec,
            annuity: Some(annuity(engine, 0.0, portfolio.maturity(), conv.fixed_freq)?),
            dates: cf.dates,
        })
    }

    pub fn equity(portfolio: &Portfolio, spec: GridSpec) -> Result<Self> {
        let engine = EquityEngine::for_portfolio(portfolio, spec)?;
        let base = engine.problem(portfolio)?;
        let mut dates: Vec<f64> = base.events.iter().map(|e| e.time).collect();
        dates.push(engine.horizon);
        Ok(Self {
            riskfree: engine.riskfree_nodes(),
            base,
            libor_ois: None,
            x0: engine.x0(),
            spec,
            annuity: None,
            dates,
        })
    }

    pub fn with_annuity(mut self, annuity: Option<f64>) -> Self {
        self.annuity = annuity;
        self
    }

    pub(crate) fn check_curves(&self, curves: &CurveSet) -> Result<()> {
        curves.validate()?;
        if let Some(lo) = self.libor_ois {
            if (lo - curves.libor_ois * 1e-4).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "curve LIBOR-OIS {} bp differs from the rate engine's {} bp",
                    curves.libor_ois,
                    lo * 1e4
                )));
            }
        }
        Ok(())
    }

    /// Spreads over the risk-free rate applied where the value is
    /// non-negative and where it is negative.
    pub fn spreads(&self, curves: &CurveSet, mode: CollateralMode, side: QuoteSide, legs: Legs) -> (f64, f64) {
        if mode == CollateralMode::FullVm {
            return (0.0, 0.0);
        }
        let lo = self.libor_ois.unwrap_or(0.0);
        let spread = |cds_on: bool, cds: f64, basis_on: bool, basis: f64| {
            let mut s = 0.0;
            if cds_on {
                s += lo + cds * 1e-4;
            }
            if basis_on {
                s += basis * 1e-4;
            }
            s
        };
        let sb = spread(legs.cds_b, curves.cds_b, legs.basis_b, curves.basis_b);
        let sc = spread(legs.cds_c, curves.cds_c, legs.basis_c, curves.basis_c);
        // The liability holder's rate: C's when the position is an asset,
        // B's when it is a liability; mirrored on the ask.
        match side {
            QuoteSide::Bid => (sc, sb),
            QuoteSide::Ask => (sb, sc),
        }
    }

    /// Signed margin scale: `-s_l` on the bid, `+s_l` on the ask.
    pub fn margin_scale(curves: &CurveSet, side: QuoteSide) -> f64 {
        match side {
            QuoteSide::Bid => -curves.s_l * 1e-4,
            QuoteSide::Ask => curves.s_l * 1e-4,
        }
    }

    /// Problem for one rung of the ladder.
    pub fn problem(
        &self,
        curves: &CurveSet,
        rule: Option<&Arc<dyn MarginRule>>,
        mode: CollateralMode,
        side: QuoteSide,
        legs: Legs,
    ) -> PdeProblem {
        let (pos, neg) = self.spreads(curves, mode, side, legs);
        let discount = Discounting::switched(
            self.riskfree.iter().map(|r| r + pos).collect(),
            self.riskfree.iter().map(|r| r + neg).collect(),
        );
        let margin = match rule {
            Some(rule) if legs.margin && curves.s_l != 0.0 => Some(MarginTerm {
                rule: rule.clone(),
                scale: Self::margin_scale(curves, side),
            }),
            _ => None,
        };
        self.base.clone().with_discount(discount).with_margin(margin)
    }

    pub fn solve_legs(
        &self,
        curves: &CurveSet,
        rule: Option<&Arc<dyn MarginRule>>,
        mode: CollateralMode,
        side: QuoteSide,
        legs: Legs,
    ) -> Result<ValueSurface> {
        self.check_curves(curves)?;
        solve(&self.problem(curves, rule, mode, side, legs), &self.spec)
    }

    pub fn yield_value(&self, pv: f64) -> Result<Option<f64>> {
        self.annuity.map(|a| yield_value(pv, a)).transpose()
    }
}

/// All-in value surface: every spread and the margin term active.
pub fn price_all_in(
    setup: &PricingSetup,
    curves: &CurveSet,
    rule: Option<&Arc<dyn MarginRule>>,
    mode: CollateralMode,
    side: QuoteSide,
) -> Result<ValueSurface> {
    setup.solve_legs(curves, rule, mode, side, Legs::ALL)
}

/// Present value as a running spread in bp over `annuity`.
pub fn yield_value(pv: f64, annuity: f64) -> Result<f64> {
    if !(annuity > 0.0) || !annuity.is_finite() {
        return Err(Error::DegenerateAnnuity(annuity));
    }
    Ok(1e4 * pv / annuity)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Adjustments {
    pub npv: f64,
    pub cva: f64,
    pub dva: f64,
    pub cfa: f64,
    pub dfa: f64,
    pub mva: f64,
    pub tva: f64,
    pub residual: f64,
}

impl Adjustments {
    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            npv: f(self.npv),
            cva: f(self.cva),
            dva: f(self.dva),
            cfa: f(self.cfa),
            dfa: f(self.dfa),
            mva: f(self.mva),
            tva: f(self.tva),
            residual: f(self.residual),
        }
    }

    pub fn plus(&self, o: &Self) -> Self {
        Self {
            npv: self.npv + o.npv,
            cva: self.cva + o.cva,
            dva: self.dva + o.dva,
            cfa: self.cfa + o.cfa,
            dfa: self.dfa + o.dfa,
            mva: self.mva + o.mva,
            tva: self.tva + o.tva,
            residual: self.residual + o.residual,
        }
    }

    pub fn minus(&self, o: &Self) -> Self {
        self.plus(&o.map(|x| -x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XvaReport {
    /// Risk-free value.
    pub riskfree: f64,
    pub pv: Adjustments,
    /// Same figures as yield values, when an annuity is available.
    pub bp: Option<Adjustments>,
    pub annuity: Option<f64>,
}

impl XvaReport {
    pub fn from_ladder(v: &Ladder, annuity: Option<f64>) -> Result<Self> {
        let cva = v.riskfree - v.cva;
        let dva = v.dva - v.riskfree;
        let cfa = v.riskfree - v.cfa;
        let dfa = v.dfa - v.riskfree;
        let mva = v.no_margin - v.full;
        let tva = cva - dva + cfa - dfa + mva;
        let pv = Adjustments {
            npv: v.full,
            cva,
            dva,
            cfa,
            dfa,
            mva,
            tva,
            residual: (v.riskfree - v.full) - tva,
        };
        let bp = match annuity {
            Some(a) => {
                yield_value(0.0, a)?;
                Some(pv.map(|x| 1e4 * x / a))
            }
            None => None,
        };
        Ok(Self {
            riskfree: v.riskfree,
            pv,
            bp,
            annuity,
        })
    }

    /// Yield values if available, present values otherwise.
    pub fn preferred(&self) -> Adjustments {
        self.bp.unwrap_or(self.pv)
    }
}

/// Values at the initial state of the seven ladder solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ladder {
    pub riskfree: f64,
    pub cva: f64,
    pub dva: f64,
    pub cfa: f64,
    pub dfa: f64,
    pub no_margin: f64,
    pub full: f64,
}

/// Runs the seven-solve ladder (concurrently) and attributes the differences.
pub fn decompose(
    setup: &PricingSetup,
    curves: &CurveSet,
    rule: Option<&Arc<dyn MarginRule>>,
    mode: CollateralMode,
) -> Result<XvaReport> {
    let ladder = solve_ladder(setup, curves, rule, mode)?;
    XvaReport::from_ladder(&ladder, setup.annuity)
}

pub fn solve_ladder(
    setup: &PricingSetup,
    curves: &CurveSet,
    rule: Option<&Arc<dyn MarginRule>>,
    mode: CollateralMode,
) -> Result<Ladder> {
    setup.check_curves(curves)?;
    let only = |f: fn(&mut Legs)| {
        let mut l = Legs::NONE;
        f(&mut l);
        l
    };
    let rungs = [
        Legs::NONE,
        only(|l| l.cds_c = true),
        only(|l| l.cds_b = true),
        only(|l| l.basis_c = true),
        only(|l| l.basis_b = true),
        Legs::SPREADS,
        Legs::ALL,
    ];
    let values: Vec<Result<f64>> = rungs
        .par_iter()
        .map(|&legs| {
            let problem = setup.problem(curves, rule, mode, QuoteSide::Bid, legs);
            Ok(solve(&problem, &setup.spec)?.value_at(setup.x0))
        })
        .collect();
    let v: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    Ok(Ladder {
        riskfree: v[0],
        cva: v[1],
        dva: v[2],
        cfa: v[3],
        dfa: v[4],
        no_margin: v[5],
        full: v[6],
    })
}

/// Margin-funding cost alone: value without the margin term less value with
/// it, other spreads as configured.
pub fn mva(setup: &PricingSetup, curves: &CurveSet, rule: &Arc<dyn MarginRule>, mode: CollateralMode) -> Result<f64> {
    let (a, b) = rayon::join(
        || setup.solve_legs(curves, Some(rule), mode, QuoteSide::Bid, Legs::SPREADS),
        || setup.solve_legs(curves, Some(rule), mode, QuoteSide::Bid, Legs::ALL),
    );
    Ok(a?.value_at(setup.x0) - b?.value_at(setup.x0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instruments::{EquityOption, Instrument, OptionKind, Side};

    fn equity_setup() -> PricingSetup {
        let call = Portfolio::single(Instrument::EquityOption(EquityOption {
            notional: 1.0,
            spot: 100.0,
            strike: 100.0,
            expiry: 1.0,
            kind: OptionKind::Call,
            position: Side::Long,
            vol: 0.2,
            rate: 0.01,
        }));
        PricingSetup::equity(&call, GridSpec::default()).unwrap()
    }

    fn curves() -> CurveSet {
        CurveSet {
            libor_ois: 10.0,
            cds_b: 100.0,
            basis_b: 20.0,
            cds_c: 200.0,
            basis_c: 40.0,
            s_l: 50.0,
        }
    }

    #[test]
    fn spreads_compose_per_party_and_swap_on_the_ask() {
        let mut setup = equity_setup();
        setup.libor_ois = Some(10e-4);
        let c = curves();
        let un = CollateralMode::Uncollateralized;
        let (pos, neg) = setup.spreads(&c, un, QuoteSide::Bid, Legs::ALL);
        assert!((pos - (10.0 + 200.0 + 40.0) * 1e-4).abs() < 1e-15);
        assert!((neg - (10.0 + 100.0 + 20.0) * 1e-4).abs() < 1e-15);
        assert_eq!(setup.spreads(&c, un, QuoteSide::Ask, Legs::ALL), (neg, pos));
        let only_basis_c = Legs {
            basis_c: true,
            ..Legs::NONE
        };
        assert_eq!(setup.spreads(&c, un, QuoteSide::Bid, only_basis_c), (40e-4, 0.0));
        assert_eq!(
            setup.spreads(&c, CollateralMode::FullVm, QuoteSide::Bid, Legs::ALL),
            (0.0, 0.0)
        );
        assert_eq!(PricingSetup::margin_scale(&c, QuoteSide::Bid), -50e-4);
        assert_eq!(PricingSetup::margin_scale(&c, QuoteSide::Ask), 50e-4);
    }

    #[test]
    fn yield_value_needs_a_positive_annuity() {
        assert_eq!(yield_value(0.001, 5.0).unwrap(), 2.0);
        assert!(matches!(yield_value(1.0, 0.0), Err(Error::DegenerateAnnuity(_))));
        assert!(yield_value(1.0, f64::NAN).is_err());
    }

    #[test]
    fn report_attributes_ladder_differences() {
        let ladder = Ladder {
            riskfree: 10.0,
            cva: 9.0,
            dva: 10.5,
            cfa: 9.8,
            dfa: 10.1,
            no_margin: 8.4,
            full: 8.0,
        };
        let r = XvaReport::from_ladder(&ladder, Some(2.0)).unwrap();
        let p = r.pv;
        assert_eq!((p.cva, p.dva, p.mva), (1.0, 0.5, 0.40000000000000036));
        assert!((p.cfa - 0.2).abs() < 1e-12 && (p.dfa - 0.1).abs() < 1e-12);
        assert_eq!(p.tva, p.cva - p.dva + p.cfa - p.dfa + p.mva);
        assert!((p.residual - (2.0 - p.tva)).abs() < 1e-12);
        assert_eq!(r.preferred().npv, 1e4 * 8.0 / 2.0);
        assert!(XvaReport::from_ladder(&ladder, Some(-1.0)).is_err());
    }

    #[test]
    fn setup_rejects_mismatched_libor_ois() {
        let mut setup = equity_setup();
        setup.libor_ois = Some(13e-4);
        assert!(setup.check_curves(&curves()).is_err());
        setup.libor_ois = None;
        assert!(setup.check_curves(&curves()).is_ok());
    }

    #[test]
    fn margin_free_ladder_has_zero_mva() {
        let setup = equity_setup();
        let c = CurveSet {
            libor_ois: 0.0,
            ..curves()
        };
        let r = decompose(&setup, &c, None, CollateralMode::Uncollateralized).unwrap();
        assert_eq!(r.pv.mva, 0.0);
        // A long option is an asset: only the counterparty legs bite.
        assert!(r.pv.cva > 0.0 && r.pv.cfa > 0.0);
        assert!(r.pv.dva.abs() < 1e-9 && r.pv.dfa.abs() < 1e-9);
    }
}
