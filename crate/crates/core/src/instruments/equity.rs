use std::sync::Arc;

use super::{Portfolio, RiskFactor};
use crate::error::{Error, Result};
use crate::pde::{Diffusion, Discounting, GridSpec, JumpEvent, PdeProblem, StateGrid, StateMap};

/// Geometric Brownian motion on `x = ln S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormal {
    pub rate: f64,
    pub vol: f64,
}

impl Diffusion for LogNormal {
    fn drift(&self, _x: f64) -> f64 {
        self.rate - 0.5 * self.vol * self.vol
    }

    fn vol(&self, _x: f64) -> f64 {
        self.vol
    }

    fn state_map(&self) -> StateMap {
        StateMap::Exp
    }
}

/// Log-price grid for an equity option portfolio.
#[derive(Debug, Clone)]
pub struct EquityEngine {
    pub dynamics: LogNormal,
    pub spot: f64,
    pub horizon: f64,
    pub grid: StateGrid,
    pub spec: GridSpec,
}

impl EquityEngine {
    pub fn new(spot: f64, vol: f64, rate: f64, horizon: f64, spec: GridSpec) -> Result<Self> {
        if !(spot > 0.0 && vol > 0.0 && horizon > 0.0) {
            return Err(Error::InvalidParameter(
                "equity engine needs positive spot, vol and horizon".into(),
            ));
        }
        let x0 = spot.ln();
        let width = 6.0 * vol * horizon.sqrt();
        let grid = spec.state_grid((x0 - width, x0 + width), Some(x0))?;
        Ok(Self {
            dynamics: LogNormal { rate, vol },
            spot,
            horizon,
            grid,
            spec,
        })
    }

    pub fn for_portfolio(portfolio: &Portfolio, spec: GridSpec) -> Result<Self> {
        match portfolio.factor()? {
            RiskFactor::Equity { spot, vol, rate } => Self::new(spot, vol, rate, portfolio.maturity(), spec),
            RiskFactor::Rate => Err(Error::IncompatiblePortfolio(
                "equity engine needs an equity option portfolio".into(),
            )),
        }
    }

    pub fn x0(&self) -> f64 {
        self.spot.ln()
    }

    pub fn riskfree_nodes(&self) -> Vec<f64> {
        vec![self.dynamics.rate; self.grid.len()]
    }

    /// Risk-free problem: payoffs at the horizon as terminal values, earlier
    /// expiries as jumps.
    pub fn problem(&self, portfolio: &Portfolio) -> Result<PdeProblem> {
        let n = self.grid.len();
        let spots: Vec<f64> = self.grid.nodes().into_iter().map(f64::exp).collect();
        let mut terminal = vec![0.0; n];
        let mut events: Vec<JumpEvent> = Vec::new();
        for h in &portfolio.items {
            let super::Instrument::EquityOption(o) = &h.instrument else {
                return Err(Error::IncompatiblePortfolio("mixed equity and rate holdings".into()));
            };
            let payoff: Vec<f64> = spots.iter().map(|&s| h.weight * o.payoff(s)).collect();
            if (o.expiry - self.horizon).abs() < 1e-10 {
                for (t, p) in terminal.iter_mut().zip(payoff) {
                    *t += p;
                }
            } else {
                events.push(JumpEvent {
                    time: o.expiry,
                    amount: payoff,
                });
            }
        }
        let diffusion: Arc<dyn Diffusion> = Arc::new(self.dynamics);
        Ok(PdeProblem::new(self.grid.clone(), diffusion, terminal, self.horizon)
            .with_discount(Discounting::flat(self.riskfree_nodes()))
            .with_events(events))
    }
}
