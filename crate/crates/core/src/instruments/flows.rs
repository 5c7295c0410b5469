use std::collections::BTreeMap;

use super::{build_schedule, CapFloorKind, Direction, Instrument, Portfolio};
use crate::error::{Error, Result};
use crate::pde::JumpEvent;
use crate::ratemodels::{RateEngine, ZcbProvider};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowKind {
    /// `rate * accrual`, paid at the flow time.
    Fixed { rate: f64, accrual: f64 },
    /// LIBOR fixed at the flow time, paid at `pay`.
    Floating { accrual: f64, pay: f64 },
    /// Caplet or floorlet fixed at the flow time, paid at `pay`.
    Optionlet {
        strike: f64,
        kind: CapFloorKind,
        accrual: f64,
        pay: f64,
    },
}

/// A signed cashflow of a rate instrument; `scale` carries notional,
/// direction and portfolio weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flow {
    pub time: f64,
    pub scale: f64,
    pub kind: FlowKind,
}

impl Flow {
    /// Bond `(reset, pay)` needed to value the flow at its reset, if any.
    pub fn bond(&self) -> Option<(f64, f64)> {
        match self.kind {
            FlowKind::Fixed { .. } => None,
            FlowKind::Floating { pay, .. } | FlowKind::Optionlet { pay, .. } => Some((self.time, pay)),
        }
    }

    /// Value at the flow time given the LIBOR short rate and the bond price
    /// to the payment date.
    pub fn amount(&self, libor: f64, bond: f64) -> f64 {
        let unit = match self.kind {
            FlowKind::Fixed { rate, accrual } => rate * accrual,
            FlowKind::Floating { accrual, .. } => libor * accrual * bond,
            FlowKind::Optionlet {
                strike, kind, accrual, ..
            } => {
                let payoff = match kind {
                    CapFloorKind::Cap => (libor - strike).max(0.0),
                    CapFloorKind::Floor => (strike - libor).max(0.0),
                };
                payoff * accrual * bond
            }
        };
        self.scale * unit
    }
}

impl Instrument {
    /// Cashflows of a rate instrument, per unit weight.
    pub fn rate_flows(&self) -> Result<Vec<Flow>> {
        self.validate()?;
        match self {
            Self::Swap(s) => {
                let sign = match s.direction {
                    Direction::Payer => 1.0,
                    Direction::Receiver => -1.0,
                };
                let mut flows = Vec::new();
                for p in build_schedule(s.start, s.maturity, s.fixed_freq)? {
                    flows.push(Flow {
                        time: p.pay,
                        scale: -sign * s.notional,
                        kind: FlowKind::Fixed {
                            rate: s.fixed_rate,
                            accrual: p.accrual,
                        },
                    });
                }
                for p in build_schedule(s.start, s.maturity, s.float_freq)? {
                    flows.push(Flow {
                        time: p.reset,
                        scale: sign * s.notional,
                        kind: FlowKind::Floating {
                            accrual: p.accrual,
                            pay: p.pay,
                        },
                    });
                }
                Ok(flows)
            }
            Self::CapFloor(c) => Ok(build_schedule(c.start, c.maturity, c.freq)?
                .into_iter()
                .map(|p| Flow {
                    time: p.reset,
                    scale: c.position.sign() * c.notional,
                    kind: FlowKind::Optionlet {
                        strike: c.strike,
                        kind: c.kind,
                        accrual: p.accrual,
                        pay: p.pay,
                    },
                })
                .collect()),
            Self::EquityOption(_) => Err(Error::IncompatiblePortfolio(
                "equity options have no rate cashflows".into(),
            )),
        }
    }
}

/// Jump amount of `flow` at every grid node.
pub fn cashflow_jump(flow: &Flow, libor: &[f64], zcb: &ZcbProvider) -> Result<Vec<f64>> {
    match flow.bond() {
        None => Ok(libor.iter().map(|&l| flow.amount(l, 1.0)).collect()),
        Some((start, end)) => {
            let bonds = zcb.nodes(start, end)?;
            Ok(libor.iter().zip(bonds).map(|(&l, &p)| flow.amount(l, p)).collect())
        }
    }
}

/// Value at maturity: the flows paid on the final date. Everything earlier
/// enters through jumps.
pub fn terminal_payoff(instrument: &Instrument, state: f64) -> Result<f64> {
    match instrument {
        Instrument::EquityOption(o) => Ok(o.payoff(state)),
        _ => {
            let maturity = instrument.maturity();
            Ok(instrument
                .rate_flows()?
                .iter()
                .filter(|f| (f.time - maturity).abs() < 1e-10)
                .map(|f| f.amount(state, 1.0))
                .sum())
        }
    }
}

/// Cashflows of a rate portfolio laid out on an engine grid.
#[derive(Debug, Clone)]
pub struct RateCashflows {
    pub horizon: f64,
    pub terminal: Vec<f64>,
    pub events: Vec<JumpEvent>,
    /// Payment and reset dates, ascending.
    pub dates: Vec<f64>,
}

impl RateCashflows {
    pub fn from_flows(engine: &RateEngine, flows: &[Flow], horizon: f64) -> Result<Self> {
        let pairs: Vec<(f64, f64)> = flows.iter().filter_map(Flow::bond).collect();
        let zcb = engine.bonds_for(&pairs)?;
        let libor = engine.libor_nodes();
        let n = libor.len();
        let mut terminal = vec![0.0; n];
        let mut by_time: BTreeMap<i64, (f64, Vec<f64>)> = BTreeMap::new();
        for flow in flows {
            if flow.time > horizon + 1e-10 || flow.time < -1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "flow at {} outside [0, {horizon}]",
                    flow.time
                )));
            }
            let amount = cashflow_jump(flow, &libor, &zcb)?;
            let target = if (flow.time - horizon).abs() < 1e-10 {
                &mut terminal
            } else {
                let key = (flow.time * 1e8).round() as i64;
                &mut by_time.entry(key).or_insert_with(|| (flow.time, vec![0.0; n])).1
            };
            for (t, a) in target.iter_mut().zip(amount) {
                *t += a;
            }
        }
        let events: Vec<JumpEvent> = by_time
            .into_values()
            .map(|(time, amount)| JumpEvent { time, amount })
            .collect();
        let mut dates: Vec<f64> = events.iter().map(|e| e.time).collect();
        dates.push(horizon);
        Ok(Self {
            horizon,
            terminal,
            events,
            dates,
        })
    }
}

/// All cashflows of a rate portfolio, weights applied.
pub fn rate_cashflows(engine: &RateEngine, portfolio: &Portfolio) -> Result<RateCashflows> {
    let mut flows = Vec::new();
    for h in &portfolio.items {
        for mut f in h.instrument.rate_flows()? {
            f.scale *= h.weight;
            flows.push(f);
        }
    }
    RateCashflows::from_flows(engine, &flows, portfolio.maturity())
}
