use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ModelFamily, ModelParams, RateEngine};
use crate::error::{Error, Result};
use crate::instruments::{cap_yield_value, par_swap_rate, SwapConventions};
use crate::pde::GridSpec;

fn default_libor_ois() -> f64 {
    13.0
}

fn default_tenor() -> f64 {
    10.0
}

/// Market quotes the three free parameters are fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationTargets {
    /// 3-month LIBOR, decimal.
    pub libor3m: f64,
    /// Par rate of the reference swap, decimal.
    pub par10y: f64,
    /// ATM cap premium as a yield value, bp.
    pub cap10y_yv: f64,
    /// LIBOR-OIS spread, bp.
    #[serde(default = "default_libor_ois")]
    pub libor_ois: f64,
}

impl CalibrationTargets {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("libor3m", self.libor3m),
            ("par10y", self.par10y),
            ("cap10y_yv", self.cap10y_yv),
            ("libor_ois", self.libor_ois),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "calibration target {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationSettings {
    pub grid: GridSpec,
    pub conventions: SwapConventions,
    /// Tenor of the reference swap and cap, years.
    pub tenor: f64,
    /// Largest accepted residual, bp.
    pub tolerance_bp: f64,
    pub max_iterations: usize,
    /// Relative step size below which the search is declared stalled.
    pub step_tolerance: f64,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            conventions: SwapConventions::default(),
            tenor: default_tenor(),
            tolerance_bp: 1e-3,
            max_iterations: 100,
            step_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationOutcome {
    pub params: ModelParams,
    /// Model minus target for (3m LIBOR, par rate, cap yield value), bp.
    pub residuals_bp: [f64; 3],
    pub iterations: usize,
}

/// Model-minus-target residuals in bp.
pub fn residuals(
    family: &dyn ModelFamily,
    free: [f64; 3],
    targets: &CalibrationTargets,
    settings: &CalibrationSettings,
) -> Result<[f64; 3]> {
    let model = family.build(free)?;
    let engine = RateEngine::new(model, targets.libor_ois * 1e-4, settings.grid)?;
    let libor = engine.model.libor(engine.x0());
    let par = par_swap_rate(&engine, settings.tenor, &settings.conventions)?;
    let cap = cap_yield_value(&engine, settings.tenor, &settings.conventions)?;
    Ok([
        1e4 * (libor - targets.libor3m),
        1e4 * (par - targets.par10y),
        cap - targets.cap10y_yv,
    ])
}

/// Fits the family's three free parameters with a damped Broyden iteration,
/// each evaluation repricing the targets on the PDE grid.
pub fn calibrate(
    family: &dyn ModelFamily,
    targets: &CalibrationTargets,
    settings: &CalibrationSettings,
) -> Result<CalibrationOutcome> {
    targets.validate()?;
    settings.grid.validate()?;
    let eval = |x: &Vector3<f64>| -> Result<Vector3<f64>> {
        residuals(family, [x[0], x[1], x[2]], targets, settings).map(Vector3::from)
    };
    let jacobian = |x: &Vector3<f64>, fx: &Vector3<f64>| -> Result<Matrix3<f64>> {
        let cols: Vec<Result<Vector3<f64>>> = (0..3)
            .into_par_iter()
            .map(|j| {
                let h = 1e-4 * x[j].abs().max(1e-2);
                let mut xh = *x;
                xh[j] += h;
                Ok((eval(&xh)? - fx) / h)
            })
            .collect();
        let mut jac = Matrix3::zeros();
        for (j, c) in cols.into_iter().enumerate() {
            jac.set_column(j, &c?);
        }
        Ok(jac)
    };

    let mut x = Vector3::from(family.initial_guess(targets));
    let mut fx = eval(&x)?;
    let mut jac = jacobian(&x, &fx)?;
    let mut iterations = 0;
    while fx.amax() > settings.tolerance_bp {
        if iterations >= settings.max_iterations {
            return Err(Error::CalibrationNoConvergence {
                iterations,
                residuals: fx.iter().copied().collect(),
            });
        }
        iterations += 1;
        let Some(step) = jac.lu().solve(&(-fx)) else {
            jac = jacobian(&x, &fx)?;
            continue;
        };
        let norm = fx.norm();
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..10 {
            let trial = x + step * lambda;
            if let Ok(ft) = eval(&trial) {
                if ft.norm() < norm {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((xn, fnew)) => {
                let dx = xn - x;
                if dx.norm() <= settings.step_tolerance * (1.0 + x.norm()) {
                    x = xn;
                    fx = fnew;
                    break;
                }
                let df = fnew - fx;
                jac += (df - jac * dx) * dx.transpose() / dx.norm_squared();
                x = xn;
                fx = fnew;
            }
            // The secant model has drifted; rebuild it at the current point.
            None => jac = jacobian(&x, &fx)?,
        }
    }
    if fx.amax() > settings.tolerance_bp {
        return Err(Error::CalibrationNoConvergence {
            iterations,
            residuals: fx.iter().copied().collect(),
        });
    }
    Ok(CalibrationOutcome {
        params: family.build([x[0], x[1], x[2]])?.params(),
        residuals_bp: [fx[0], fx[1], fx[2]],
        iterations,
    })
}
