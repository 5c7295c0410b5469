//! Risk-free pricing against closed forms and static replication.

mod common;

use std::sync::Arc;

use mva_core::instruments::{
    annuity, capfloor_premium, float_leg_pv, par_swap_rate, solve_riskfree, CapFloorKind, Direction, EquityOption,
    Instrument, OptionKind, Portfolio, Side, Swap, SwapConventions,
};
use mva_core::pde::GridSpec;
use mva_core::ratemodels::{BkParams, BlackKarasinski, RateEngine};
use mva_core::xva::{price_all_in, CollateralMode, CurveSet, PricingSetup, QuoteSide};
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

fn black_scholes(s: f64, k: f64, vol: f64, r: f64, t: f64, kind: OptionKind) -> f64 {
    let n = Normal::new(0.0, 1.0).unwrap();
    let d1 = ((s / k).ln() + (r + 0.5 * vol * vol) * t) / (vol * t.sqrt());
    let d2 = d1 - vol * t.sqrt();
    match kind {
        OptionKind::Call => s * n.cdf(d1) - k * (-r * t).exp() * n.cdf(d2),
        OptionKind::Put => k * (-r * t).exp() * n.cdf(-d2) - s * n.cdf(-d1),
    }
}

fn option(strike: f64, vol: f64, expiry: f64, kind: OptionKind) -> Portfolio {
    Portfolio::single(Instrument::EquityOption(EquityOption {
        notional: 1.0,
        spot: 100.0,
        strike,
        expiry,
        kind,
        position: Side::Long,
        vol,
        rate: 0.01,
    }))
}

fn riskfree_equity(p: &Portfolio) -> f64 {
    let setup = PricingSetup::equity(p, GridSpec::default()).unwrap();
    price_all_in(
        &setup,
        &CurveSet::default(),
        None,
        CollateralMode::FullVm,
        QuoteSide::Bid,
    )
    .unwrap()
    .value_at(setup.x0)
}

#[test]
fn equity_options_match_black_scholes() {
    for (k, vol, t) in [(100.0, 0.5, 1.0), (80.0, 0.2, 0.5), (120.0, 0.3, 2.0)] {
        for kind in [OptionKind::Call, OptionKind::Put] {
            let fd = riskfree_equity(&option(k, vol, t, kind));
            let bs = black_scholes(100.0, k, vol, 0.01, t, kind);
            assert!(
                (fd - bs).abs() < 3e-3,
                "K={k} vol={vol} T={t} {kind:?}: fd {fd} bs {bs}"
            );
        }
    }
}

#[test]
fn put_call_parity_to_discretization_error() {
    let call = riskfree_equity(&option(105.0, 0.35, 1.5, OptionKind::Call));
    let put = riskfree_equity(&option(105.0, 0.35, 1.5, OptionKind::Put));
    let forward = 100.0 - 105.0 * (-0.01_f64 * 1.5).exp();
    assert!((call - put - forward).abs() < 1e-4, "{} vs {forward}", call - put);
}

/// BK with negligible volatility started at its mean: a flat short rate.
fn flat_engine(rate: f64, libor_ois: f64) -> RateEngine {
    let x0 = rate.ln();
    let model = BlackKarasinski::new(BkParams {
        kappa: 0.5,
        mu: x0,
        sigma: 1e-6,
        x0,
    })
    .unwrap();
    let spec = GridSpec {
        x_min: Some(x0 - 0.01),
        x_max: Some(x0 + 0.01),
        n_space: 101,
        ..GridSpec::default()
    };
    RateEngine::new(Arc::new(model), libor_ois, spec).unwrap()
}

#[test]
fn flat_rate_bonds_annuity_and_par_rate() {
    let (libor, lo) = (0.03, 0.002);
    let engine = flat_engine(libor, lo);
    let r = libor - lo;
    let bond = engine.zcb(7.0).unwrap().value_at(engine.x0());
    assert!((bond - (-r * 7.0).exp()).abs() < 1e-7, "{bond}");

    let ann = annuity(&engine, 0.0, 5.0, 2).unwrap();
    let want: f64 = (1..=10).map(|k| 0.5 * (-r * 0.5 * k as f64).exp()).sum();
    // Every coupon date restarts Rannacher smoothing; relative error stays ~1e-7.
    assert!((ann - want).abs() < 1e-6 * want, "{ann} vs {want}");

    // Each quarter fixes at the LIBOR short rate and pays at period end.
    let par = par_swap_rate(&engine, 5.0, &SwapConventions::default()).unwrap();
    let quarterly: f64 = (1..=20).map(|k| 0.25 * (-r * 0.25 * k as f64).exp()).sum();
    let want_par = libor * quarterly / want;
    assert!((par - want_par).abs() < 1e-7, "{par} vs {want_par}");
}

#[test]
fn cap_minus_floor_is_a_quarterly_swap() {
    let engine = common::bk();
    for strike in [0.01, 0.025, 0.04] {
        let cap = capfloor_premium(engine, strike, CapFloorKind::Cap, 7.0, 4).unwrap();
        let floor = capfloor_premium(engine, strike, CapFloorKind::Floor, 7.0, 4).unwrap();
        let swap = float_leg_pv(engine, 0.0, 7.0, 4).unwrap() - strike * annuity(engine, 0.0, 7.0, 4).unwrap();
        assert!(cap > 0.0 && floor > 0.0);
        assert!(
            (cap - floor - swap).abs() < 1e-9,
            "K={strike}: {} vs {swap}",
            cap - floor
        );
    }
}

#[test]
fn par_swap_is_worth_zero_and_directions_offset() {
    let engine = common::bk();
    let conv = SwapConventions::default();
    let par = par_swap_rate(engine, 10.0, &conv).unwrap();
    let value = |d, rate| {
        solve_riskfree(engine, &Portfolio::single(Instrument::Swap(Swap::new(d, rate, 10.0))))
            .unwrap()
            .value_at(engine.x0())
    };
    let at_par = value(Direction::Payer, par);
    // Separate solves for float leg and annuity agree to well under 0.001 bp.
    assert!(at_par.abs() < 1e-6, "par payer {at_par:e}");
    let off = par + 0.001;
    let (p, r) = (value(Direction::Payer, off), value(Direction::Receiver, off));
    assert!((p + r).abs() < 1e-14);
    // One bp of fixed rate moves the value by the annuity.
    let ann = annuity(engine, 0.0, 10.0, 2).unwrap();
    assert!((r - 0.001 * ann).abs() < 1e-6, "{r} vs {}", 0.001 * ann);
}

#[test]
fn calibrated_models_hit_their_targets() {
    for kind in ["bk", "mnl"] {
        let engine = common::engine(kind);
        let par = par_swap_rate(&engine, 10.0, &SwapConventions::default()).unwrap();
        assert!((par - common::TARGETS.par10y).abs() < 1e-7, "{kind}: par {par}");
        let libor0 = engine.model.libor(engine.x0());
        assert!(
            (libor0 - common::TARGETS.libor3m).abs() < 1e-7,
            "{kind}: libor {libor0}"
        );
        let cap = mva_core::instruments::cap_yield_value(&engine, 10.0, &SwapConventions::default()).unwrap();
        assert!((cap - common::TARGETS.cap10y_yv).abs() < 1e-2, "{kind}: cap {cap}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn payer_plus_receiver_is_zero(rate in 0.0..0.06f64, years in 1u32..8) {
        let engine = common::bk();
        let t = years as f64;
        let both = Portfolio::of([
            Instrument::Swap(Swap::new(Direction::Payer, rate, t)),
            Instrument::Swap(Swap::new(Direction::Receiver, rate, t)),
        ]);
        let v = solve_riskfree(engine, &both).unwrap();
        prop_assert!(v.values.iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn option_values_stay_inside_no_arbitrage_bounds(k in 60.0..140.0f64, vol in 0.1..0.8f64) {
        let call = riskfree_equity(&option(k, vol, 1.0, OptionKind::Call));
        let lower = (100.0 - k * (-0.01_f64).exp()).max(0.0);
        prop_assert!(call >= lower - 1e-3 && call <= 100.0);
    }
}
