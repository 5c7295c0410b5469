use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::{mva, yield_value, CollateralMode, CurveSet, PricingSetup};
use crate::error::Result;
use crate::im::{DeltaVar, MarginRule};
use crate::instruments::{par_swap_rate, Direction, Instrument, Portfolio, Swap, SwapConventions};
use crate::ratemodels::RateEngine;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisPoint {
    pub eta_p: f64,
    /// MVA of receiving fixed at one clearing house, bp.
    pub receiver_mva_bp: f64,
    /// MVA of paying fixed at the other, bp.
    pub payer_mva_bp: f64,
    pub basis_bp: f64,
}

/// Swap-rate basis between two clearing houses from the margin funding of a
/// back-to-back hedge: receiver MVA plus payer MVA of a fully collateralized
/// par swap, both at multiplier `eta_p`, for each entry of `etas`.
pub fn ccp_basis(
    engine: &RateEngine,
    tenor: f64,
    etas: &[f64],
    s_l_bp: f64,
    margin: &DeltaVar,
    conv: &SwapConventions,
) -> Result<Vec<BasisPoint>> {
    let par = par_swap_rate(engine, tenor, conv)?;
    let setup_for = |direction| {
        let mut swap = Swap::new(direction, par, tenor);
        swap.fixed_freq = conv.fixed_freq;
        swap.float_freq = conv.float_freq;
        PricingSetup::rates(engine, &Portfolio::single(Instrument::Swap(swap)), conv)
    };
    let receiver = setup_for(Direction::Receiver)?;
    let payer = setup_for(Direction::Payer)?;
    let curves = CurveSet {
        libor_ois: engine.libor_ois * 1e4,
        s_l: s_l_bp,
        ..Default::default()
    };
    etas.par_iter()
        .map(|&eta_p| {
            let rule: Arc<dyn MarginRule> = Arc::new(DeltaVar {
                eta_plus: eta_p,
                eta_minus: eta_p,
                ..margin.clone()
            });
            let one = |setup: &PricingSetup| -> Result<f64> {
                let pv = mva(setup, &curves, &rule, CollateralMode::FullVm)?;
                yield_value(pv, setup.annuity.unwrap_or(f64::NAN))
            };
            let receiver_mva_bp = one(&receiver)?;
            let payer_mva_bp = one(&payer)?;
            Ok(BasisPoint {
                eta_p,
                receiver_mva_bp,
                payer_mva_bp,
                basis_bp: receiver_mva_bp + payer_mva_bp,
            })
        })
        .collect()
}
