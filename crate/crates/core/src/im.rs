//! Initial-margin models.
//!
//! Every model implements [`MarginRule`]: given the local sensitivities of the
//! position at a grid node it returns the margin amount `L_I` and a
//! linearisation of it with the sign switches frozen, which the PDE engine
//! folds into its drift, diffusion and source coefficients.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registry::Registry;

/// Published SIMM curvature coefficient for single-asset equity risk.
pub const SIMM_R_GAMMA: f64 = 0.5586;
/// Published SIMM vega coefficient (per year of residual maturity).
pub const SIMM_R_VEGA: f64 = 0.9218;
/// One-sided 99% normal quantile as used for delta-VaR margin.
pub const ALPHA_99: f64 = 2.33;

/// Local risk of a position at one node, in the natural underlying (short
/// rate or equity price).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalRisk {
    pub t: f64,
    pub time_to_expiry: f64,
    pub underlying: f64,
    /// Absolute volatility `b` of the underlying (rate/sqrt(year) or price/sqrt(year)).
    pub underlying_vol: f64,
    pub delta: f64,
    pub gamma: f64,
}

/// `L_I ~ delta * V_u + gamma * V_uu + constant`, signs frozen at the point
/// of evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MarginLinearization {
    pub delta: f64,
    pub gamma: f64,
    pub constant: f64,
}

impl MarginLinearization {
    pub fn amount(&self, risk: &LocalRisk) -> f64 {
        self.delta * risk.delta + self.gamma * risk.gamma + self.constant
    }
}

pub trait MarginRule: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    fn linearize(&self, risk: &LocalRisk) -> MarginLinearization;

    fn amount(&self, risk: &LocalRisk) -> f64 {
        self.linearize(risk).amount(risk)
    }

    /// Margin estimated from a (regressed) value function of the engine
    /// state by shocking the state, as a simulation engine would. `state_vol`
    /// is the volatility of the engine state. `None` if the rule has no
    /// simulation estimator.
    fn shock_estimate(&self, _value: &dyn Fn(f64) -> f64, _state: f64, _state_vol: f64, _t: f64) -> Option<f64> {
        None
    }

    /// Returns a copy with every multiplier scaled by `factor`.
    fn scaled(&self, factor: f64) -> Arc<dyn MarginRule>;
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

// ---------------------------------------------------------------------------
// Delta-approximated VaR
// ---------------------------------------------------------------------------

/// `L_I = |dV/du| * alpha_q * eta * b * sqrt(delta_mpr)` with separate
/// multipliers for positive and negative local delta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeltaVar {
    pub alpha_q: f64,
    /// Margin period of risk in years.
    pub delta_mpr: f64,
    pub eta_plus: f64,
    pub eta_minus: f64,
}

impl Default for DeltaVar {
    fn default() -> Self {
        Self {
            alpha_q: ALPHA_99,
            delta_mpr: 14.0 / 365.0,
            eta_plus: 1.0,
            eta_minus: 1.0,
        }
    }
}

impl DeltaVar {
    pub fn new(alpha_q: f64, delta_mpr: f64, eta: f64) -> Result<Self> {
        let spec = Self {
            alpha_q,
            delta_mpr,
            eta_plus: eta,
            eta_minus: eta,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// CME: 5-day 99% VaR.
    pub fn cme(eta: f64) -> Self {
        Self {
            alpha_q: ALPHA_99,
            delta_mpr: 5.0 / 365.0,
            eta_plus: eta,
            eta_minus: eta,
        }
    }

    /// LCH non-member clients: 7-day 99.5%.
    pub fn lch_client(eta: f64) -> Self {
        Self {
            alpha_q: 2.576,
            delta_mpr: 7.0 / 365.0,
            eta_plus: eta,
            eta_minus: eta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_q > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha_q must be positive, got {}",
                self.alpha_q
            )));
        }
        if !(self.delta_mpr > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta_mpr must be positive, got {}",
                self.delta_mpr
            )));
        }
        if !self.eta_plus.is_finite() || !self.eta_minus.is_finite() {
            return Err(Error::InvalidParameter("multipliers must be finite".into()));
        }
        Ok(())
    }

    fn eta_for(&self, delta: f64) -> f64 {
        if delta >= 0.0 {
            self.eta_plus
        } else {
            self.eta_minus
        }
    }
}

/// Delta-VaR margin for one sensitivity.
pub fn delta_im(delta: f64, vol_b: f64, spec: &DeltaVar) -> f64 {
    delta.abs() * spec.alpha_q * spec.eta_for(delta) * vol_b * spec.delta_mpr.sqrt()
}

impl MarginRule for DeltaVar {
    fn name(&self) -> &'static str {
        "delta-var"
    }

    fn linearize(&self, risk: &LocalRisk) -> MarginLinearization {
        let k = self.alpha_q * self.eta_for(risk.delta) * risk.underlying_vol * self.delta_mpr.sqrt();
        MarginLinearization {
            delta: sign(risk.delta) * k,
            ..Default::default()
        }
    }

    fn amount(&self, risk: &LocalRisk) -> f64 {
        delta_im(risk.delta, risk.underlying_vol, self)
    }

    fn shock_estimate(&self, value: &dyn Fn(f64) -> f64, state: f64, state_vol: f64, _t: f64) -> Option<f64> {
        let unit = self.alpha_q * state_vol * self.delta_mpr.sqrt();
        let v0 = value(state);
        // A fall in the state hurts a long-delta position, a rise a short one.
        let drop_down = v0 - value(state - unit * self.eta_plus.abs());
        let drop_up = v0 - value(state + unit * self.eta_minus.abs());
        Some(if drop_down >= drop_up {
            sign(self.eta_plus) * drop_down.max(0.0)
        } else {
            sign(self.eta_minus) * drop_up.max(0.0)
        })
    }

    fn scaled(&self, factor: f64) -> Arc<dyn MarginRule> {
        Arc::new(Self {
            eta_plus: self.eta_plus * factor,
            eta_minus: self.eta_minus * factor,
            ..self.clone()
        })
    }
}

// ---------------------------------------------------------------------------
// ISDA SIMM, single-asset equity
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimmEquity {
    /// Risk weight as a fraction (SIMM risk weight / 100).
    pub rw_pct: f64,
    pub r_gamma: f64,
    pub r_vega: f64,
    pub eta: f64,
    pub include_delta: bool,
    pub include_curvature_vega: bool,
}

impl Default for SimmEquity {
    fn default() -> Self {
        Self {
            rw_pct: 0.15,
            r_gamma: SIMM_R_GAMMA,
            r_vega: SIMM_R_VEGA,
            eta: 1.0,
            include_delta: true,
            include_curvature_vega: true,
        }
    }
}

/// SIMM equity margin components `(L_delta, L_gamma, L_vega)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimmMargin {
    pub delta: f64,
    pub gamma: f64,
    pub vega: f64,
}

impl SimmMargin {
    pub fn total(&self) -> f64 {
        self.delta + self.gamma + self.vega
    }
}

impl SimmEquity {
    pub fn with_risk_weight(rw_pct: f64) -> Self {
        Self {
            rw_pct,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rw_pct > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rw_pct must be positive, got {}",
                self.rw_pct
            )));
        }
        if !(self.r_gamma >= 0.0) || !(self.r_vega >= 0.0) || !self.eta.is_finite() {
            return Err(Error::InvalidParameter("SIMM coefficients must be non-negative".into()));
        }
        Ok(())
    }
}

/// SIMM equity margin for a position with price sensitivities `delta`,
/// `gamma` at spot `s` and lognormal volatility `sigma`.
pub fn simm_equity_im(
    s: f64,
    delta: f64,
    gamma: f64,
    sigma: f64,
    time_to_expiry: f64,
    spec: &SimmEquity,
) -> SimmMargin {
    let curvature = (0.5 * sigma * sigma * s * s * gamma).abs() * spec.rw_pct / sigma;
    SimmMargin {
        delta: s * delta.abs() * spec.rw_pct * spec.eta,
        gamma: curvature * spec.r_gamma * spec.eta,
        vega: curvature * spec.r_vega * time_to_expiry.max(0.0) * spec.eta,
    }
}

impl MarginRule for SimmEquity {
    fn name(&self) -> &'static str {
        "simm-equity"
    }

    fn linearize(&self, risk: &LocalRisk) -> MarginLinearization {
        let s = risk.underlying;
        let mut lin = MarginLinearization::default();
        if self.include_delta {
            lin.delta = sign(risk.delta) * s * self.rw_pct * self.eta;
        }
        if self.include_curvature_vega && s > 0.0 {
            let sigma = risk.underlying_vol / s;
            if sigma > 0.0 {
                let coeff = 0.5
                    * sigma
                    * s
                    * s
                    * self.rw_pct
                    * (self.r_gamma + self.r_vega * risk.time_to_expiry.max(0.0))
                    * self.eta;
                lin.gamma = sign(risk.gamma) * coeff;
            }
        }
        lin
    }

    fn scaled(&self, factor: f64) -> Arc<dyn MarginRule> {
        Arc::new(Self {
            eta: self.eta * factor,
            ..self.clone()
        })
    }
}

// ---------------------------------------------------------------------------
// Exogenous profile
// ---------------------------------------------------------------------------

/// Margin amount prescribed as a function of time only, piecewise constant
/// between knots (value of the latest knot at or before `t`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExogenousProfile {
    pub knots: Vec<(f64, f64)>,
}

impl ExogenousProfile {
    pub fn new(mut knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidParameter(
                "exogenous profile needs at least one knot".into(),
            ));
        }
        if knots.iter().any(|(t, l)| !t.is_finite() || !l.is_finite()) {
            return Err(Error::InvalidParameter("exogenous profile knots must be finite".into()));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { knots })
    }

    /// Reads a two-column `t,L_I` CSV. A header row is optional.
    pub fn from_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut knots = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::InvalidParameter(format!("profile csv: {e}")))?;
            if rec.len() != 2 {
                return Err(Error::InvalidParameter(format!(
                    "profile csv line {}: expected 2 columns, got {}",
                    line + 1,
                    rec.len()
                )));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(t), Ok(l)) => knots.push((t, l)),
                _ if line == 0 => continue,
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "profile csv line {}: non-numeric entry",
                        line + 1
                    )))
                }
            }
        }
        Self::new(knots)
    }

    pub fn at(&self, t: f64) -> f64 {
        let idx = self.knots.partition_point(|(k, _)| *k <= t);
        self.knots[idx.saturating_sub(1)].1
    }
}

impl MarginRule for ExogenousProfile {
    fn name(&self) -> &'static str {
        "exogenous"
    }

    fn linearize(&self, risk: &LocalRisk) -> MarginLinearization {
        MarginLinearization {
            constant: self.at(risk.t),
            ..Default::default()
        }
    }

    fn shock_estimate(&self, _value: &dyn Fn(f64) -> f64, _state: f64, _state_vol: f64, t: f64) -> Option<f64> {
        Some(self.at(t))
    }

    fn scaled(&self, factor: f64) -> Arc<dyn MarginRule> {
        Arc::new(Self {
            knots: self.knots.iter().map(|&(t, l)| (t, l * factor)).collect(),
        })
    }
}

// ---------------------------------------------------------------------------
// Multipliers and funding
// ---------------------------------------------------------------------------

/// BCBS-IOSCO standardised netting factor `0.4 + 0.6 * NGR`.
pub fn ngr_multiplier(net_replacement: f64, gross_replacement: f64) -> Result<f64> {
    if net_replacement < 0.0 || gross_replacement < 0.0 || net_replacement > gross_replacement {
        if gross_replacement == 0.0 && net_replacement == 0.0 {
            return Ok(1.0);
        }
        return Err(Error::InvalidRatio {
            net: net_replacement,
            gross: gross_replacement,
        });
    }
    let ngr = if gross_replacement == 0.0 {
        1.0
    } else {
        net_replacement / gross_replacement
    };
    Ok(0.4 + 0.6 * ngr)
}

/// Multiplier that scales the model margin (computed at `eta = 1`) onto an
/// external figure; margin is linear in `eta`.
pub fn calibrate_multiplier(external_im: f64, model_im_at_eta1: f64) -> Result<f64> {
    if model_im_at_eta1 == 0.0 || !model_im_at_eta1.is_finite() {
        return Err(Error::DegenerateIm);
    }
    Ok(external_im / model_im_at_eta1)
}

/// How margin is funded: a secured share, with the unsecured remainder split
/// between equity (at a return-on-equity target) and unsecured debt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FundingScenario {
    pub sec_fraction: f64,
    pub sec_rate: f64,
    pub equity_fraction: f64,
    pub roe: f64,
    pub unsec_rate: f64,
}

impl FundingScenario {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sec_fraction", self.sec_fraction),
            ("equity_fraction", self.equity_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

/// Blended margin funding spread `s_l`.
pub fn funding_spread(scenario: &FundingScenario) -> f64 {
    let unsecured = scenario.equity_fraction * scenario.roe + (1.0 - scenario.equity_fraction) * scenario.unsec_rate;
    scenario.sec_fraction * scenario.sec_rate + (1.0 - scenario.sec_fraction) * unsecured
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

pub type MarginFactory = fn(&serde_json::Value) -> Result<Arc<dyn MarginRule>>;

fn parse<T: serde::de::DeserializeOwned>(kind: &str, params: &serde_json::Value) -> Result<T> {
    let params = if params.is_null() {
        serde_json::Value::Object(Default::default())
    } else {
        params.clone()
    };
    serde_json::from_value(params).map_err(|e| Error::InvalidParameter(format!("{kind}: {e}")))
}

/// Registry of the built-in margin models: `delta-var`, `simm-equity`,
/// `exogenous`.
pub fn margin_registry() -> Registry<MarginFactory> {
    let mut reg: Registry<MarginFactory> = Registry::new("margin model");
    reg.register("delta-var", |p| {
        let spec: DeltaVar = parse("delta-var", p)?;
        spec.validate()?;
        Ok(Arc::new(spec))
    });
    reg.register("simm-equity", |p| {
        let spec: SimmEquity = parse("simm-equity", p)?;
        spec.validate()?;
        Ok(Arc::new(spec))
    });
    reg.register("exogenous", |p| {
        let spec: ExogenousProfile = parse("exogenous", p)?;
        Ok(Arc::new(ExogenousProfile::new(spec.knots)?))
    });
    reg
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn risk(delta: f64, gamma: f64) -> LocalRisk {
        LocalRisk {
            t: 0.0,
            time_to_expiry: 1.0,
            underlying: 100.0,
            underlying_vol: 15.0,
            delta,
            gamma,
        }
    }

    #[test]
    fn delta_im_zero_and_linear_in_eta() {
        let spec = DeltaVar::new(2.33, 14.0 / 365.0, 1.0).unwrap();
        assert_eq!(delta_im(0.0, 0.01, &spec), 0.0);
        let double = DeltaVar {
            eta_plus: 2.0,
            eta_minus: 2.0,
            ..spec.clone()
        };
        assert_eq!(delta_im(-0.7, 0.01, &double), 2.0 * delta_im(-0.7, 0.01, &spec));
    }

    #[test]
    fn delta_im_calibrated_to_simm_risk_weight() {
        // sigma = 15%, S = 100 so b = 15; eta = 2.2 lands on the SIMM risk weight 15.
        let spec = DeltaVar::new(2.33, 14.0 / 365.0, 2.2).unwrap();
        let l = delta_im(1.0, 15.0, &spec);
        assert_abs_diff_eq!(l, 15.05, epsilon = 0.01);
    }

    #[test]
    fn asymmetric_multipliers_follow_delta_sign() {
        let spec = DeltaVar {
            eta_plus: 3.0,
            eta_minus: 1.0,
            ..Default::default()
        };
        let up = delta_im(1.0, 0.01, &spec);
        let down = delta_im(-1.0, 0.01, &spec);
        assert_abs_diff_eq!(up, 3.0 * down, epsilon = 1e-15);
        let lin = spec.linearize(&risk(-2.0, 0.0));
        assert!(lin.delta < 0.0);
        assert_abs_diff_eq!(
            lin.amount(&risk(-2.0, 0.0)),
            spec.amount(&risk(-2.0, 0.0)),
            epsilon = 1e-12
        );
    }

    #[test]
    fn simm_delta_only() {
        let spec = SimmEquity::with_risk_weight(0.15);
        let m = simm_equity_im(100.0, 1.0, 0.0, 0.2, 1.0, &spec);
        assert_abs_diff_eq!(m.delta, 15.0, epsilon = 1e-12);
        assert_eq!(m.gamma, 0.0);
        assert_eq!(m.vega, 0.0);
    }

    #[test]
    fn simm_vega_vanishes_at_expiry_and_ratio_holds() {
        let spec = SimmEquity::with_risk_weight(0.15);
        let m0 = simm_equity_im(100.0, 0.5, 0.02, 0.5, 0.0, &spec);
        assert_eq!(m0.vega, 0.0);
        let m = simm_equity_im(100.0, 0.5, -0.02, 0.5, 1.7, &spec);
        assert_abs_diff_eq!(m.vega / m.gamma, SIMM_R_VEGA / SIMM_R_GAMMA * 1.7, epsilon = 1e-12);
    }

    #[test]
    fn simm_rule_linearization_reproduces_amount() {
        let spec = SimmEquity::with_risk_weight(0.25);
        // underlying_vol = sigma * S with sigma = 0.15
        for (d, g) in [(0.6, 0.01), (-0.3, -0.02), (0.0, 0.0)] {
            let r = risk(d, g);
            let direct = simm_equity_im(100.0, d, g, 0.15, 1.0, &spec).total();
            assert_abs_diff_eq!(spec.amount(&r), direct, epsilon = 1e-10);
        }
    }

    #[test]
    fn ngr_examples() {
        assert_abs_diff_eq!(ngr_multiplier(5.0, 5.0).unwrap(), 1.0);
        assert_abs_diff_eq!(ngr_multiplier(0.0, 5.0).unwrap(), 0.4);
        assert_abs_diff_eq!(ngr_multiplier(2.5, 5.0).unwrap(), 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(ngr_multiplier(0.0, 0.0).unwrap(), 1.0);
        assert!(matches!(ngr_multiplier(6.0, 5.0), Err(Error::InvalidRatio { .. })));
    }

    #[test]
    fn multiplier_calibration() {
        assert_eq!(calibrate_multiplier(7.0, 7.0).unwrap(), 1.0);
        assert_eq!(calibrate_multiplier(9.0, 3.0).unwrap(), 3.0);
        assert_eq!(calibrate_multiplier(0.0, 3.0).unwrap(), 0.0);
        assert_eq!(calibrate_multiplier(1.0, 0.0), Err(Error::DegenerateIm));
    }

    #[test]
    fn funding_spread_scenarios() {
        let lev3 = FundingScenario {
            sec_fraction: 0.0,
            sec_rate: 0.0,
            equity_fraction: 0.03,
            roe: 0.15,
            unsec_rate: 0.01,
        };
        assert_abs_diff_eq!(funding_spread(&lev3), 0.0142, epsilon = 1e-15);
        let half_secured = FundingScenario {
            sec_fraction: 0.5,
            sec_rate: 0.005,
            equity_fraction: 0.0,
            roe: 0.15,
            unsec_rate: 0.01,
        };
        assert_abs_diff_eq!(funding_spread(&half_secured), 0.0075, epsilon = 1e-15);
        let ccp = FundingScenario {
            sec_fraction: 0.5,
            sec_rate: 0.004,
            equity_fraction: 1.0 / 25.0,
            roe: 0.10,
            unsec_rate: 0.0125,
        };
        assert_abs_diff_eq!(funding_spread(&ccp), 0.01, epsilon = 1e-15);
    }

    #[test]
    fn exogenous_profile_is_piecewise_constant() {
        let p = ExogenousProfile::from_csv("t,L_I\n0,10\n1,8\n# comment\n2.5,3\n".as_bytes()).unwrap();
        assert_eq!(p.at(0.0), 10.0);
        assert_eq!(p.at(0.99), 10.0);
        assert_eq!(p.at(1.0), 8.0);
        assert_eq!(p.at(7.0), 3.0);
        assert!(ExogenousProfile::from_csv("0,1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn registry_builds_from_params() {
        let reg = margin_registry();
        let rule = (reg.get("delta-var").unwrap())(&serde_json::json!({"eta_plus": 3.0, "eta_minus": 3.0})).unwrap();
        assert_eq!(rule.name(), "delta-var");
        assert!((reg.get("delta-var").unwrap())(&serde_json::json!({"bogus": 1})).is_err());
        assert!(reg.get("historical-var").is_err());
    }

    proptest::proptest! {
        #[test]
        fn delta_im_scales_with_delta_and_eta(d in -50.0..50.0f64, k in 0.0..10.0f64, eta in 0.1..5.0f64, vol in 0.001..1.0f64) {
            let spec = DeltaVar::new(2.33, 10.0 / 365.0, eta).unwrap();
            let base = delta_im(d, vol, &spec);
            proptest::prop_assert!(base >= 0.0);
            proptest::prop_assert!((delta_im(k * d, vol, &spec) - k * base).abs() <= 1e-12 * (1.0 + k * base));
            let doubled = DeltaVar::new(2.33, 10.0 / 365.0, 2.0 * eta).unwrap();
            proptest::prop_assert!((delta_im(d, vol, &doubled) - 2.0 * base).abs() <= 1e-12 * (1.0 + base));
            proptest::prop_assert_eq!(delta_im(d, vol, &spec), delta_im(-d, vol, &spec));
        }

        #[test]
        fn funding_spread_rises_with_costlier_mix(sec in 0.0..1.0f64, eq in 0.0..0.99f64, step in 0.0..0.01f64) {
            let scenario = |equity_fraction| FundingScenario {
                sec_fraction: sec,
                sec_rate: 0.005,
                equity_fraction,
                roe: 0.15,
                unsec_rate: 0.01,
            };
            let lo = funding_spread(&scenario(eq));
            let hi = funding_spread(&scenario(eq + step));
            proptest::prop_assert!(hi >= lo - 1e-15);
            proptest::prop_assert!((0.005 - 1e-15..=0.15 + 1e-15).contains(&lo));
        }
    }
}
