#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use mva_core::im::{DeltaVar, MarginRule};
use mva_core::instruments::{par_swap_rate, Direction, Instrument, Portfolio, Swap, SwapConventions};
use mva_core::ratemodels::{
    calibrate, model_registry, CalibrationSettings, CalibrationTargets, FamilySettings, RateEngine,
};
use mva_core::xva::CurveSet;

/// Assumed 3m LIBOR of 0.60%, LIBOR-OIS 13 bp, 10y par 2.3587%, 10y ATM cap 86.83 bp.
pub const TARGETS: CalibrationTargets = CalibrationTargets {
    libor3m: 0.006,
    par10y: 0.023587,
    cap10y_yv: 86.83,
    libor_ois: 13.0,
};

pub fn engine(kind: &str) -> RateEngine {
    let settings = CalibrationSettings::default();
    let registry = model_registry();
    let family = registry.get(kind).unwrap()(&FamilySettings::default());
    let fit = calibrate(family.as_ref(), &TARGETS, &settings).unwrap();
    RateEngine::new(fit.params.build().unwrap(), TARGETS.libor_ois * 1e-4, settings.grid).unwrap()
}

/// Black-Karasinski engine calibrated once per test binary.
pub fn bk() -> &'static RateEngine {
    static ENGINE: OnceLock<RateEngine> = OnceLock::new();
    ENGINE.get_or_init(|| engine("bk"))
}

pub fn par_swap(engine: &RateEngine, direction: Direction, tenor: f64) -> Portfolio {
    let par = par_swap_rate(engine, tenor, &SwapConventions::default()).unwrap();
    Portfolio::single(Instrument::Swap(Swap::new(direction, par, tenor)))
}

/// 99% quantile, 10-day margin period.
pub fn delta_var(eta: f64) -> Arc<dyn MarginRule> {
    Arc::new(DeltaVar::new(2.33, 10.0 / 365.0, eta).unwrap())
}

/// Party B at CDS 75 bp and basis 50 bp, margin funded at `s_l`.
pub fn curves(cds_c: f64, basis_c: f64, s_l: f64) -> CurveSet {
    CurveSet {
        libor_ois: TARGETS.libor_ois,
        cds_b: 75.0,
        basis_b: 50.0,
        cds_c,
        basis_c,
        s_l,
    }
}
