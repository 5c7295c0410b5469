use serde::{Deserialize, Serialize};

use super::flows::RateCashflows;
use super::{build_schedule, rate_cashflows, CapFloorKind, Flow, FlowKind, Portfolio};
use crate::error::{Error, Result};
use crate::pde::{solve, ValueSurface};
use crate::ratemodels::RateEngine;

/// Leg frequencies of the reference swap used for par rates and annuities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwapConventions {
    pub fixed_freq: u32,
    pub float_freq: u32,
}

impl Default for SwapConventions {
    fn default() -> Self {
        Self {
            fixed_freq: 2,
            float_freq: 4,
        }
    }
}

fn riskfree_flows(engine: &RateEngine, flows: &[Flow], horizon: f64) -> Result<f64> {
    let cf = RateCashflows::from_flows(engine, flows, horizon)?;
    let problem = engine.problem(cf.terminal, horizon).with_events(cf.events);
    Ok(solve(&problem, &engine.spec)?.value_at(engine.x0()))
}

/// Risk-free value surface of a rate portfolio: no spreads, no margin.
pub fn solve_riskfree(engine: &RateEngine, portfolio: &Portfolio) -> Result<ValueSurface> {
    let cf = rate_cashflows(engine, portfolio)?;
    let problem = engine.problem(cf.terminal, cf.horizon).with_events(cf.events);
    solve(&problem, &engine.spec)
}

/// `sum accrual * P(0, t_pay)` over the schedule.
pub fn annuity(engine: &RateEngine, start: f64, maturity: f64, freq: u32) -> Result<f64> {
    let flows: Vec<Flow> = build_schedule(start, maturity, freq)?
        .into_iter()
        .map(|p| Flow {
            time: p.pay,
            scale: 1.0,
            kind: FlowKind::Fixed {
                rate: 1.0,
                accrual: p.accrual,
            },
        })
        .collect();
    let a = riskfree_flows(engine, &flows, maturity)?;
    if !(a > 0.0) {
        return Err(Error::DegenerateAnnuity(a));
    }
    Ok(a)
}

pub fn float_leg_pv(engine: &RateEngine, start: f64, maturity: f64, freq: u32) -> Result<f64> {
    let flows: Vec<Flow> = build_schedule(start, maturity, freq)?
        .into_iter()
        .map(|p| Flow {
            time: p.reset,
            scale: 1.0,
            kind: FlowKind::Floating {
                accrual: p.accrual,
                pay: p.pay,
            },
        })
        .collect();
    riskfree_flows(engine, &flows, maturity)
}

/// Fixed rate giving a spot-starting swap zero risk-free value.
pub fn par_swap_rate(engine: &RateEngine, tenor: f64, conv: &SwapConventions) -> Result<f64> {
    let float = float_leg_pv(engine, 0.0, tenor, conv.float_freq)?;
    Ok(float / annuity(engine, 0.0, tenor, conv.fixed_freq)?)
}

/// Risk-free premium of a long unit cap or floor.
pub fn capfloor_premium(engine: &RateEngine, strike: f64, kind: CapFloorKind, tenor: f64, freq: u32) -> Result<f64> {
    let flows: Vec<Flow> = build_schedule(0.0, tenor, freq)?
        .into_iter()
        .map(|p| Flow {
            time: p.reset,
            scale: 1.0,
            kind: FlowKind::Optionlet {
                strike,
                kind,
                accrual: p.accrual,
                pay: p.pay,
            },
        })
        .collect();
    riskfree_flows(engine, &flows, tenor)
}

/// ATM cap premium as a running spread in bp: strike at the par rate,
/// divided by the fixed-leg annuity.
pub fn cap_yield_value(engine: &RateEngine, tenor: f64, conv: &SwapConventions) -> Result<f64> {
    let ann = annuity(engine, 0.0, tenor, conv.fixed_freq)?;
    let float = float_leg_pv(engine, 0.0, tenor, conv.float_freq)?;
    let strike = float / ann;
    let premium = capfloor_premium(engine, strike, CapFloorKind::Cap, tenor, conv.float_freq)?;
    Ok(1e4 * premium / ann)
}
