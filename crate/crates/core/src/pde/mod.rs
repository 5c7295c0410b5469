//! Crank-Nicolson engine for the one-factor liability-side pricing PDE
//!
//! ```text
//! V_t + a V_x + 1/2 b^2 V_xx - r_e(V) V + scale * L_I(V_x, V_xx, x, t) = 0
//! ```
//!
//! with node-local switching of the discount rate on the sign of `V`, margin
//! terms whose signs follow the local Greeks, and cashflow jumps.

mod convergence;
mod grid;
mod solver;
mod tridiag;

use std::sync::Arc;

pub use convergence::{convergence_study, ConvergenceReport};
pub use grid::{GridSpec, StateGrid};
pub(crate) use solver::time_nodes;
pub use solver::{greeks, solve, JumpRecord, Slice, SolveStats, Solver, ValueSurface};
pub use tridiag::solve_tridiagonal;

use crate::error::{Error, Result};
use crate::im::MarginRule;

/// How the engine state `x` maps onto the traded underlying `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateMap {
    /// `u = x`
    Identity,
    /// `u = exp(x)`
    Exp,
}

impl StateMap {
    pub fn underlying(self, x: f64) -> f64 {
        match self {
            Self::Identity => x,
            Self::Exp => x.exp(),
        }
    }

    /// `(du/dx, d2u/dx2)`
    pub fn derivatives(self, x: f64) -> (f64, f64) {
        match self {
            Self::Identity => (1.0, 0.0),
            Self::Exp => {
                let e = x.exp();
                (e, e)
            }
        }
    }

    /// `g` in the far-field condition `V_xx = g V_x`, i.e. `V_uu = 0`.
    pub(crate) fn boundary_ratio(self) -> f64 {
        match self {
            Self::Identity => 0.0,
            Self::Exp => 1.0,
        }
    }
}

/// One-factor diffusion `dx = a(x) dt + b(x) dW` on the engine state.
pub trait Diffusion: Send + Sync {
    fn drift(&self, x: f64) -> f64;
    fn vol(&self, x: f64) -> f64;
    fn state_map(&self) -> StateMap {
        StateMap::Identity
    }
}

/// Per-node discount rates: `when_nonneg` applies where `V >= 0`, `when_neg`
/// where `V < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Discounting {
    pub when_nonneg: Vec<f64>,
    pub when_neg: Vec<f64>,
}

impl Discounting {
    pub fn flat(rates: Vec<f64>) -> Self {
        Self {
            when_neg: rates.clone(),
            when_nonneg: rates,
        }
    }

    pub fn switched(when_nonneg: Vec<f64>, when_neg: Vec<f64>) -> Self {
        Self { when_nonneg, when_neg }
    }

    pub fn zero(n: usize) -> Self {
        Self::flat(vec![0.0; n])
    }

    pub fn shifted(&self, by: f64) -> Self {
        Self {
            when_nonneg: self.when_nonneg.iter().map(|r| r + by).collect(),
            when_neg: self.when_neg.iter().map(|r| r + by).collect(),
        }
    }

    pub(crate) fn rate(&self, i: usize, v: f64) -> f64 {
        if v >= 0.0 {
            self.when_nonneg[i]
        } else {
            self.when_neg[i]
        }
    }
}

/// Margin cost term `scale * L_I`; `scale = -s_l` prices the side that funds
/// the margin (bid), `+s_l` the opposite side (ask).
#[derive(Debug, Clone)]
pub struct MarginTerm {
    pub rule: Arc<dyn MarginRule>,
    pub scale: f64,
}

/// Cashflow event: going backwards across `time`, `V(t-) = V(t+) + amount`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub amount: Vec<f64>,
}

#[derive(Clone)]
pub struct PdeProblem {
    pub grid: StateGrid,
    pub diffusion: Arc<dyn Diffusion>,
    pub discount: Discounting,
    pub margin: Option<MarginTerm>,
    pub terminal: Vec<f64>,
    pub events: Vec<JumpEvent>,
    pub horizon: f64,
    /// Extra times at which a value slice is retained.
    pub slice_times: Vec<f64>,
}

impl PdeProblem {
    pub fn new(grid: StateGrid, diffusion: Arc<dyn Diffusion>, terminal: Vec<f64>, horizon: f64) -> Self {
        let n = grid.len();
        Self {
            grid,
            diffusion,
            discount: Discounting::zero(n),
            margin: None,
            terminal,
            events: Vec::new(),
            horizon,
            slice_times: Vec::new(),
        }
    }

    pub fn with_discount(mut self, discount: Discounting) -> Self {
        self.discount = discount;
        self
    }

    pub fn with_margin(mut self, margin: Option<MarginTerm>) -> Self {
        self.margin = margin;
        self
    }

    pub fn with_events(mut self, events: Vec<JumpEvent>) -> Self {
        self.events = events;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.len();
        if self.terminal.len() != n || self.discount.when_neg.len() != n || self.discount.when_nonneg.len() != n {
            return Err(Error::InvalidParameter(
                "problem vectors do not conform to the grid".into(),
            ));
        }
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidParameter(format!("bad horizon {}", self.horizon)));
        }
        for ev in &self.events {
            if ev.amount.len() != n {
                return Err(Error::InvalidParameter(
                    "jump amounts do not conform to the grid".into(),
                ));
            }
            if !(ev.time >= 0.0 && ev.time <= self.horizon) {
                return Err(Error::InvalidParameter(format!(
                    "jump at {} outside [0, {}]",
                    ev.time, self.horizon
                )));
            }
        }
        for x in self.grid.nodes() {
            let b = self.diffusion.vol(x);
            if !(b >= 0.0) || !self.diffusion.drift(x).is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "diffusion coefficients invalid at x = {x}"
                )));
            }
        }
        Ok(())
    }
}
