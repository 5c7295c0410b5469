use std::sync::Arc;

use serde::Serialize;

use super::{simulate_paths, McConfig, PathSet, PolyFit};
use crate::error::{Error, Result};
use crate::im::{LocalRisk, MarginRule};
use crate::instruments::{Portfolio, SwapConventions};
use crate::pde::{time_nodes, StateGrid};
use crate::ratemodels::RateEngine;
use crate::xva::{CollateralMode, CurveSet, Legs, PricingSetup, QuoteSide};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
}

impl McEstimate {
    /// Mean and standard error, treating antithetic pairs as one sample.
    fn of(values: &[f64], antithetic: bool) -> Self {
        let samples: Vec<f64> = if antithetic {
            values
                .chunks(2)
                .map(|c| c.iter().sum::<f64>() / c.len() as f64)
                .collect()
        } else {
            values.to_vec()
        };
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Self {
            mean,
            se: (var / n).sqrt(),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            mean: self.mean * k,
            se: self.se * k.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    /// No spreads, no margin.
    pub riskfree: McEstimate,
    /// All spreads, no margin.
    pub no_margin: McEstimate,
    /// All spreads and margin.
    pub npv: McEstimate,
    /// `no_margin - npv`, path by path.
    pub mva: McEstimate,
    pub annuity: Option<f64>,
    pub n_paths: usize,
}

impl McReport {
    /// Yield value of an estimate, bp.
    pub fn bp(&self, e: &McEstimate) -> Option<McEstimate> {
        self.annuity.map(|a| e.scaled(1e4 / a))
    }
}

struct Context<'a> {
    engine: &'a RateEngine,
    grid: &'a StateGrid,
    terminal: &'a [f64],
    /// Cashflow amounts on the engine grid at each observation time.
    flows: Vec<Option<Vec<f64>>>,
    degree: usize,
}

impl Context<'_> {
    fn flow(&self, k: usize, x: f64) -> f64 {
        self.flows[k].as_ref().map_or(0.0, |a| self.grid.interpolate(a, x))
    }

    fn flow_slope(&self, k: usize, x: f64) -> f64 {
        match &self.flows[k] {
            None => 0.0,
            Some(a) => {
                let h = self.grid.step();
                (self.grid.interpolate(a, x + h) - self.grid.interpolate(a, x - h)) / (2.0 * h)
            }
        }
    }

    fn riskfree(&self, x: f64) -> f64 {
        self.engine.model.libor(x) - self.engine.libor_ois
    }
}

/// Local margin from a value function known to first order at `x`: the
/// rule's shock estimate applied to the linearization, which coincides with
/// delta times shock.
fn local_margin(rule: &dyn MarginRule, engine: &RateEngine, x: f64, value: f64, slope: f64, t: f64, tte: f64) -> f64 {
    let b = engine.model.vol(x);
    let lin = |y: f64| value + slope * (y - x);
    if let Some(l) = rule.shock_estimate(&lin, x, b, t) {
        return l;
    }
    let (du, _) = engine.model.state_map().derivatives(x);
    rule.amount(&LocalRisk {
        t,
        time_to_expiry: tte,
        underlying: engine.model.state_map().underlying(x),
        underlying_vol: b * du,
        delta: slope / du,
        gamma: 0.0,
    })
}

struct Pass<'a> {
    pos: f64,
    neg: f64,
    margin: Option<(&'a dyn MarginRule, f64)>,
    hedge: bool,
}

/// Backward induction along the paths; returns each path's value at 0.
fn backward(ctx: &Context, paths: &PathSet, pass: &Pass) -> Result<Vec<f64>> {
    let times = &paths.times;
    let last = times.len() - 1;
    let horizon = times[last];
    let n = paths.n_paths;
    let switched = pass.pos != pass.neg || pass.margin.is_some();
    let rate = |x: f64, v: f64| ctx.riskfree(x) + if v >= 0.0 { pass.pos } else { pass.neg };
    let margin = |x: f64, v: f64, s: f64, t: f64| -> f64 {
        pass.margin
            .map_or(0.0, |(rule, _)| local_margin(rule, ctx.engine, x, v, s, t, horizon - t))
    };
    let scale = pass.margin.map_or(0.0, |(_, s)| s);

    let xn = paths.at(last);
    let mut y: Vec<f64> = xn.iter().map(|&x| ctx.grid.interpolate(ctx.terminal, x)).collect();
    // Value just before the right end of the current interval and its margin.
    let mut v_right = y.clone();
    let mut l_right: Vec<f64> = if pass.margin.is_some() {
        xn.iter()
            .zip(&y)
            .map(|(&x, &v)| {
                let h = ctx.grid.step();
                let s =
                    (ctx.grid.interpolate(ctx.terminal, x + h) - ctx.grid.interpolate(ctx.terminal, x - h)) / (2.0 * h);
                margin(x, v, s, horizon)
            })
            .collect()
    } else {
        vec![0.0; n]
    };
    let mut prev_fit: Option<PolyFit> = None;
    for k in (0..last).rev() {
        let t = times[k];
        let dt = times[k + 1] - t;
        let xk = paths.at(k);
        let xr = paths.at(k + 1);
        let fit = if (switched || pass.hedge) && k > 0 {
            Some(PolyFit::fit(xk, &y, ctx.degree, t)?)
        } else {
            None
        };
        for p in 0..n {
            let x = xk[p];
            // Left-end value: the regression, or at the origin (where every
            // path shares one state) the previous step's regression.
            let (vl, sl) = match (&fit, &prev_fit) {
                (Some(f), _) => (f.eval(x), f.slope(x)),
                (None, Some(f)) => (f.eval(x) + ctx.flow(k + 1, x), f.slope(x) + ctx.flow_slope(k + 1, x)),
                (None, None) => (v_right[p], 0.0),
            };
            let r_left = rate(x, vl);
            let disc = (-0.5 * (r_left + rate(xr[p], v_right[p])) * dt).exp();
            let l_left = if scale != 0.0 { margin(x, vl, sl, t) } else { 0.0 };
            y[p] = y[p] * disc + scale * 0.5 * dt * (l_left + l_right[p] * disc);
            if pass.hedge {
                // Zero-mean control: the regressed delta against the state
                // innovation, discounted with information known at t.
                let innovation = xr[p] - x - ctx.engine.model.drift(x) * dt;
                y[p] -= (-r_left * dt).exp() * sl * innovation;
            }
            let f = ctx.flow(k, x);
            y[p] += f;
            if switched {
                v_right[p] = vl + f;
                if scale != 0.0 {
                    l_right[p] = margin(x, vl + f, sl + ctx.flow_slope(k, x), t);
                }
            }
        }
        if fit.is_some() {
            prev_fit = fit;
        }
    }
    Ok(y)
}

/// Regression/simulation counterpart of the decomposition for a rate
/// portfolio: risk-free value, all-in values without and with margin, and
/// the margin adjustment estimated on common paths.
pub fn mc_xva(
    engine: &RateEngine,
    portfolio: &Portfolio,
    conv: &SwapConventions,
    curves: &CurveSet,
    rule: Option<&Arc<dyn MarginRule>>,
    mode: CollateralMode,
    cfg: &McConfig,
) -> Result<McReport> {
    cfg.validate()?;
    let setup = PricingSetup::rates(engine, portfolio, conv)?;
    setup.check_curves(curves)?;
    let horizon = setup.base.horizon;
    let times = time_nodes(horizon, &setup.dates, cfg.steps_per_year);
    let mut flows: Vec<Option<Vec<f64>>> = vec![None; times.len()];
    for ev in &setup.base.events {
        let k = times
            .iter()
            .position(|t| (t - ev.time).abs() < 1e-10)
            .ok_or_else(|| Error::InvalidParameter(format!("cashflow at {} off the simulation grid", ev.time)))?;
        match &mut flows[k] {
            Some(a) => a.iter_mut().zip(&ev.amount).for_each(|(a, b)| *a += b),
            slot => *slot = Some(ev.amount.clone()),
        }
    }
    let ctx = Context {
        engine,
        grid: &setup.base.grid,
        terminal: &setup.base.terminal,
        flows,
        degree: cfg.basis_degree,
    };
    let paths = simulate_paths(engine.model.as_ref(), engine.x0(), &times, cfg)?;

    let pass = |legs: Legs| -> Pass {
        let (pos, neg) = setup.spreads(curves, mode, QuoteSide::Bid, legs);
        let margin = match rule {
            Some(r) if legs.margin && curves.s_l != 0.0 => {
                Some((r.as_ref(), PricingSetup::margin_scale(curves, QuoteSide::Bid)))
            }
            _ => None,
        };
        Pass {
            pos,
            neg,
            margin,
            hedge: cfg.control_variate,
        }
    };
    let ((riskfree, no_margin), full) = rayon::join(
        || {
            rayon::join(
                || backward(&ctx, &paths, &pass(Legs::NONE)),
                || backward(&ctx, &paths, &pass(Legs::SPREADS)),
            )
        },
        || backward(&ctx, &paths, &pass(Legs::ALL)),
    );
    let (riskfree, no_margin, full) = (riskfree?, no_margin?, full?);
    let diff: Vec<f64> = no_margin.iter().zip(&full).map(|(a, b)| a - b).collect();
    Ok(McReport {
        riskfree: McEstimate::of(&riskfree, cfg.antithetic),
        no_margin: McEstimate::of(&no_margin, cfg.antithetic),
        npv: McEstimate::of(&full, cfg.antithetic),
        mva: McEstimate::of(&diff, cfg.antithetic),
        annuity: setup.annuity,
        n_paths: cfg.n_paths,
    })
}
