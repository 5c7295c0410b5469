use std::collections::HashMap;
use std::sync::Arc;

use super::ShortRateModel;
use crate::error::{Error, Result};
use crate::pde::{solve, Discounting, GridSpec, PdeProblem, StateGrid, ValueSurface};

/// A short-rate model bound to a state grid and the LIBOR-OIS spread that
/// separates the LIBOR short rate from the risk-free rate.
#[derive(Debug, Clone)]
pub struct RateEngine {
    pub model: Arc<dyn ShortRateModel>,
    /// LIBOR-OIS spread as a decimal rate.
    pub libor_ois: f64,
    pub grid: StateGrid,
    pub spec: GridSpec,
}

impl RateEngine {
    pub fn new(model: Arc<dyn ShortRateModel>, libor_ois: f64, spec: GridSpec) -> Result<Self> {
        let grid = spec.state_grid(model.default_domain(), Some(model.initial_state()))?;
        Ok(Self {
            model,
            libor_ois,
            grid,
            spec,
        })
    }

    pub fn x0(&self) -> f64 {
        self.model.initial_state()
    }

    pub fn libor_nodes(&self) -> Vec<f64> {
        self.grid.nodes().into_iter().map(|x| self.model.libor(x)).collect()
    }

    pub fn riskfree_nodes(&self) -> Vec<f64> {
        self.libor_nodes().into_iter().map(|l| l - self.libor_ois).collect()
    }

    /// Problem skeleton on this engine's grid, discounted at the risk-free rate.
    pub fn problem(&self, terminal: Vec<f64>, horizon: f64) -> PdeProblem {
        let diffusion: Arc<dyn crate::pde::Diffusion> = self.model.clone();
        PdeProblem::new(self.grid.clone(), diffusion, terminal, horizon)
            .with_discount(Discounting::flat(self.riskfree_nodes()))
    }

    /// Bond surface `P(t, t + tau; x)`; the dynamics are time-homogeneous so
    /// only `tau` matters.
    pub fn zcb(&self, tau: f64) -> Result<ValueSurface> {
        if !(tau >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bond tenor must be non-negative, got {tau}"
            )));
        }
        let problem = self.problem(vec![1.0; self.grid.len()], tau);
        solve(&problem, &self.spec)
    }

    /// Bond surfaces for every `(start, end)` pair.
    pub fn bonds_for(&self, pairs: &[(f64, f64)]) -> Result<ZcbProvider> {
        let mut by_tenor: HashMap<i64, Arc<Vec<f64>>> = HashMap::new();
        let mut surfaces = HashMap::new();
        for &(start, end) in pairs {
            if end < start {
                return Err(Error::InvalidParameter(format!("bond end {end} before start {start}")));
            }
            let tkey = key(end - start);
            let values = match by_tenor.get(&tkey) {
                Some(v) => v.clone(),
                None => {
                    let v = Arc::new(self.zcb(end - start)?.values);
                    by_tenor.insert(tkey, v.clone());
                    v
                }
            };
            surfaces.insert((key(start), key(end)), values);
        }
        Ok(ZcbProvider {
            grid: self.grid.clone(),
            surfaces,
        })
    }
}

fn key(t: f64) -> i64 {
    (t * 1e8).round() as i64
}

/// Bond price surfaces on a state grid, keyed by `(start, end)`.
#[derive(Debug, Clone)]
pub struct ZcbProvider {
    grid: StateGrid,
    surfaces: HashMap<(i64, i64), Arc<Vec<f64>>>,
}

impl ZcbProvider {
    pub fn empty(grid: StateGrid) -> Self {
        Self {
            grid,
            surfaces: HashMap::new(),
        }
    }

    pub fn grid(&self) -> &StateGrid {
        &self.grid
    }

    pub fn nodes(&self, start: f64, end: f64) -> Result<&[f64]> {
        self.surfaces
            .get(&(key(start), key(end)))
            .map(|v| v.as_slice())
            .ok_or(Error::MissingZcb { start, end })
    }

    pub fn price(&self, start: f64, end: f64, x: f64) -> Result<f64> {
        Ok(self.grid.interpolate(self.nodes(start, end)?, x))
    }
}

/// `P(t, maturity)` over the state grid, discounting at the risk-free rate.
pub fn zcb_price(engine: &RateEngine, t: f64, maturity: f64) -> Result<ValueSurface> {
    if t > maturity {
        return Err(Error::InvalidParameter(format!(
            "bond start {t} after maturity {maturity}"
        )));
    }
    engine.zcb(maturity - t)
}
