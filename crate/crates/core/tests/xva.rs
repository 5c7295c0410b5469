//! Valuation-adjustment ladder: closed-form margin cost, homogeneity and
//! monotonicity.

mod common;

use std::sync::Arc;

use mva_core::im::{ExogenousProfile, MarginRule, SimmEquity};
use mva_core::instruments::{
    Direction, EquityOption, Holding, Instrument, OptionKind, Portfolio, Side, SwapConventions,
};
use mva_core::mc::{mc_xva, McConfig};
use mva_core::pde::GridSpec;
use mva_core::xva::{decompose, mva, CollateralMode, CurveSet, PricingSetup};
use proptest::prelude::*;

fn call(strike: f64, vol: f64) -> Portfolio {
    Portfolio::single(Instrument::EquityOption(EquityOption {
        notional: 1.0,
        spot: 100.0,
        strike,
        expiry: 1.0,
        kind: OptionKind::Call,
        position: Side::Long,
        vol,
        rate: 0.02,
    }))
}

fn s_l(bp: f64) -> CurveSet {
    CurveSet {
        s_l: bp,
        ..CurveSet::default()
    }
}

#[test]
fn constant_margin_costs_its_discounted_carry() {
    let setup = PricingSetup::equity(&call(100.0, 0.3), GridSpec::default()).unwrap();
    let level = 12.5;
    let rule: Arc<dyn MarginRule> = Arc::new(ExogenousProfile::new(vec![(0.0, level)]).unwrap());
    let got = mva(&setup, &s_l(100.0), &rule, CollateralMode::FullVm).unwrap();
    let r: f64 = 0.02;
    let want = 0.01 * level * (1.0 - (-r).exp()) / r;
    assert!((got - want).abs() < 1e-6 * want, "{got} vs {want}");
}

#[test]
fn full_vm_has_no_credit_or_funding_adjustments() {
    let engine = common::bk();
    let setup = PricingSetup::rates(
        engine,
        &common::par_swap(engine, Direction::Payer, 5.0),
        &SwapConventions::default(),
    )
    .unwrap();
    let r = decompose(
        &setup,
        &common::curves(250.0, 80.0, 50.0),
        Some(&common::delta_var(1.0)),
        CollateralMode::FullVm,
    )
    .unwrap();
    let p = r.pv;
    assert_eq!((p.cva, p.dva, p.cfa, p.dfa), (0.0, 0.0, 0.0, 0.0));
    assert!(p.mva > 0.0);
    assert!((p.tva - p.mva).abs() < 1e-18);
}

#[test]
fn no_margin_rule_means_no_mva() {
    let engine = common::bk();
    let setup = PricingSetup::rates(
        engine,
        &common::par_swap(engine, Direction::Receiver, 5.0),
        &SwapConventions::default(),
    )
    .unwrap();
    let cv = common::curves(125.0, 50.0, 50.0);
    let r = decompose(&setup, &cv, None, CollateralMode::Uncollateralized).unwrap();
    assert_eq!(r.pv.mva, 0.0);
    let zero = CurveSet { s_l: 0.0, ..cv };
    let r = decompose(
        &setup,
        &zero,
        Some(&common::delta_var(3.0)),
        CollateralMode::Uncollateralized,
    )
    .unwrap();
    assert_eq!(r.pv.mva, 0.0);
}

#[test]
fn doubling_the_position_doubles_every_adjustment() {
    let engine = common::bk();
    let conv = SwapConventions::default();
    let one = common::par_swap(engine, Direction::Payer, 5.0);
    let mut two = one.clone();
    two.items = vec![Holding {
        weight: 2.0,
        ..one.items[0].clone()
    }];
    let cv = common::curves(250.0, 80.0, 50.0);
    let rule = common::delta_var(3.0);
    let a = decompose(
        &PricingSetup::rates(engine, &one, &conv).unwrap(),
        &cv,
        Some(&rule),
        CollateralMode::Uncollateralized,
    )
    .unwrap()
    .pv;
    let b = decompose(
        &PricingSetup::rates(engine, &two, &conv).unwrap(),
        &cv,
        Some(&rule),
        CollateralMode::Uncollateralized,
    )
    .unwrap()
    .pv;
    for (x, y) in [
        (a.npv, b.npv),
        (a.cva, b.cva),
        (a.dva, b.dva),
        (a.mva, b.mva),
        (a.tva, b.tva),
    ] {
        assert!((2.0 * x - y).abs() < 1e-12, "{x} doubled vs {y}");
    }
}

#[test]
fn monte_carlo_tracks_finite_difference_on_a_short_swap() {
    let engine = common::bk();
    let conv = SwapConventions::default();
    let portfolio = common::par_swap(engine, Direction::Payer, 3.0);
    let setup = PricingSetup::rates(engine, &portfolio, &conv).unwrap();
    let cv = common::curves(250.0, 80.0, 50.0);
    let rule = common::delta_var(3.0);
    let mode = CollateralMode::Uncollateralized;
    let fd = decompose(&setup, &cv, Some(&rule), mode).unwrap().bp.unwrap();
    let cfg = McConfig {
        n_paths: 20_000,
        steps_per_year: 104,
        substeps: 4,
        ..McConfig::default()
    };
    let mc = mc_xva(engine, &portfolio, &conv, &cv, Some(&rule), mode, &cfg).unwrap();
    let (npv, m) = (mc.bp(&mc.npv).unwrap(), mc.bp(&mc.mva).unwrap());
    assert!(
        (npv.mean - fd.npv).abs() < 4.0 * npv.se + 0.1,
        "npv {npv:?} vs {}",
        fd.npv
    );
    assert!((m.mean - fd.mva).abs() < 4.0 * m.se + 0.05, "mva {m:?} vs {}", fd.mva);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn mva_is_nonnegative_and_rises_with_the_funding_spread(
        strike in 70.0..130.0f64,
        vol in 0.15..0.6f64,
        lo in 10.0..200.0f64,
        extra in 1.0..300.0f64,
    ) {
        let setup = PricingSetup::equity(&call(strike, vol), GridSpec { n_space: 301, ..GridSpec::default() }).unwrap();
        let rule: Arc<dyn MarginRule> = Arc::new(SimmEquity::default());
        let a = mva(&setup, &s_l(lo), &rule, CollateralMode::FullVm).unwrap();
        let b = mva(&setup, &s_l(lo + extra), &rule, CollateralMode::FullVm).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!(b > a);
    }
}
