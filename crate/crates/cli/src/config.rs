//! TOML run configuration. Unknown keys are rejected everywhere.

use std::sync::Arc;

use mva_core::im::{margin_registry, DeltaVar, ExogenousProfile, FundingScenario, MarginRule};
use mva_core::instruments::{
    CapFloor, CapFloorKind, Direction, EquityOption, Holding, Instrument, OptionKind, Portfolio, Side, Swap,
    SwapConventions,
};
use mva_core::mc::McConfig;
use mva_core::pde::GridSpec;
use mva_core::ratemodels::{CalibrationSettings, CalibrationTargets, FamilySettings, MeanAnchor, ModelParams};
use mva_core::xva::scenarios::{FundingCase, RatingRow, SimmTableSpec};
use mva_core::xva::{CollateralMode, CurveSet};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub curves: CurveSet,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub instruments: Vec<InstrumentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<ImConfig>,
    #[serde(default)]
    pub engine: EngineConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xva: Option<XvaOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simm: Option<SimmOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisOptions>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn model(&self) -> Result<&ModelConfig, CliError> {
        self.model
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [model] section".into()))
    }

    pub fn portfolio(&self) -> Result<Portfolio, CliError> {
        if self.instruments.is_empty() {
            return Err(CliError::Config("no [[instruments]] configured".into()));
        }
        Ok(Portfolio {
            items: self.instruments.iter().map(InstrumentConfig::holding).collect(),
        })
    }

    pub fn margin_rule(&self) -> Result<Option<Arc<dyn MarginRule>>, CliError> {
        self.im.as_ref().map(ImConfig::build).transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Registered family name; required when calibrating.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<CalibrationTargets>,
    /// Explicit parameters; skip calibration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ModelParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub long_term_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bk_anchor: Option<MeanAnchor>,
    /// LIBOR-OIS spread in bp when `params` are given without targets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub libor_ois: Option<f64>,
}

impl ModelConfig {
    pub fn family_settings(&self) -> FamilySettings {
        let mut s = FamilySettings::default();
        if let Some(m) = self.long_term_mean {
            s.long_term_mean = m;
        }
        if let Some(a) = self.bk_anchor {
            s.bk_anchor = a;
        }
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineConfig {
    pub grid: GridSpec,
    pub mc: McConfig,
    pub conventions: SwapConventions,
    pub calibration: CalibrationOptions,
}

impl EngineConfig {
    pub fn calibration_settings(&self) -> CalibrationSettings {
        CalibrationSettings {
            grid: self.grid,
            conventions: self.conventions,
            tenor: self.calibration.tenor,
            tolerance_bp: self.calibration.tolerance_bp,
            max_iterations: self.calibration.max_iterations,
            step_tolerance: self.calibration.step_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationOptions {
    pub tenor: f64,
    pub tolerance_bp: f64,
    pub max_iterations: usize,
    pub step_tolerance: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        let s = CalibrationSettings::default();
        Self {
            tenor: s.tenor,
            tolerance_bp: s.tolerance_bp,
            max_iterations: s.max_iterations,
            step_tolerance: s.step_tolerance,
        }
    }
}

/// Margin model by registered name with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImConfig {
    pub kind: String,
    #[serde(default = "empty_table")]
    pub params: toml::Table,
}

fn empty_table() -> toml::Table {
    toml::Table::new()
}

impl ImConfig {
    pub fn build(&self) -> Result<Arc<dyn MarginRule>, CliError> {
        if self.kind == "exogenous" {
            if let Some(file) = self.params.get("file") {
                let path = file
                    .as_str()
                    .ok_or_else(|| CliError::Config("im.params.file must be a path".into()))?;
                if self.params.len() > 1 {
                    return Err(CliError::Config(
                        "im.params.file excludes other exogenous parameters".into(),
                    ));
                }
                let reader = std::fs::File::open(path)
                    .map_err(|e| CliError::Config(format!("cannot open margin profile {path}: {e}")))?;
                let profile = ExogenousProfile::from_csv(reader).map_err(|e| CliError::Config(e.to_string()))?;
                return Ok(Arc::new(profile));
            }
        }
        let registry = margin_registry();
        let factory = registry.get(&self.kind).map_err(|e| CliError::Config(e.to_string()))?;
        let params = serde_json::to_value(&self.params).map_err(|e| CliError::Config(e.to_string()))?;
        factory(&params).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// A fixed rate or strike, or `"par"` for the model's par swap rate of the
/// instrument's tenor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateQuote {
    Value(f64),
    Keyword(ParKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParKeyword {
    Par,
}

impl RateQuote {
    fn value_or_nan(self) -> f64 {
        match self {
            Self::Value(v) => v,
            Self::Keyword(_) => f64::NAN,
        }
    }

    pub fn is_par(self) -> bool {
        matches!(self, Self::Keyword(_))
    }
}

fn one() -> f64 {
    1.0
}

fn two() -> u32 {
    2
}

fn four() -> u32 {
    4
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum InstrumentConfig {
    Swap(SwapConfig),
    CapFloor(CapFloorConfig),
    EquityOption(EquityOptionConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwapConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub weight: f64,
    #[serde(default = "one")]
    pub notional: f64,
    pub fixed_rate: RateQuote,
    pub direction: Direction,
    #[serde(default)]
    pub start: f64,
    pub maturity: f64,
    #[serde(default = "two")]
    pub fixed_freq: u32,
    #[serde(default = "four")]
    pub float_freq: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapFloorConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub weight: f64,
    #[serde(default = "one")]
    pub notional: f64,
    pub strike: RateQuote,
    pub kind: CapFloorKind,
    pub position: Side,
    #[serde(default)]
    pub start: f64,
    pub maturity: f64,
    #[serde(default = "four")]
    pub freq: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquityOptionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub weight: f64,
    #[serde(default = "one")]
    pub notional: f64,
    pub spot: f64,
    pub strike: f64,
    pub expiry: f64,
    pub kind: OptionKind,
    pub position: Side,
    pub vol: f64,
    pub rate: f64,
}

impl InstrumentConfig {
    /// Core holding; `"par"` quotes are left as NaN until resolved.
    pub fn holding(&self) -> Holding {
        let (instrument, weight) = match self {
            Self::Swap(s) => (
                Instrument::Swap(Swap {
                    notional: s.notional,
                    fixed_rate: s.fixed_rate.value_or_nan(),
                    direction: s.direction,
                    start: s.start,
                    maturity: s.maturity,
                    fixed_freq: s.fixed_freq,
                    float_freq: s.float_freq,
                }),
                s.weight,
            ),
            Self::CapFloor(c) => (
                Instrument::CapFloor(CapFloor {
                    notional: c.notional,
                    strike: c.strike.value_or_nan(),
                    kind: c.kind,
                    position: c.position,
                    start: c.start,
                    maturity: c.maturity,
                    freq: c.freq,
                }),
                c.weight,
            ),
            Self::EquityOption(o) => (
                Instrument::EquityOption(EquityOption {
                    notional: o.notional,
                    spot: o.spot,
                    strike: o.strike,
                    expiry: o.expiry,
                    kind: o.kind,
                    position: o.position,
                    vol: o.vol,
                    rate: o.rate,
                }),
                o.weight,
            ),
        };
        Holding { instrument, weight }
    }

    pub fn label(&self, index: usize) -> String {
        let (label, default) = match self {
            Self::Swap(s) => (
                &s.label,
                format!(
                    "{}y {}",
                    s.maturity,
                    match s.direction {
                        Direction::Payer => "payer",
                        Direction::Receiver => "receiver",
                    }
                ),
            ),
            Self::CapFloor(c) => (
                &c.label,
                format!(
                    "{}y {} {}",
                    c.maturity,
                    match c.position {
                        Side::Long => "long",
                        Side::Short => "short",
                    },
                    match c.kind {
                        CapFloorKind::Cap => "cap",
                        CapFloorKind::Floor => "floor",
                    }
                ),
            ),
            Self::EquityOption(o) => (&o.label, format!("{}y option", o.expiry)),
        };
        label.clone().unwrap_or_else(|| format!("#{} {default}", index + 1))
    }

    pub fn needs_par(&self) -> bool {
        match self {
            Self::Swap(s) => s.fixed_rate.is_par(),
            Self::CapFloor(c) => c.strike.is_par(),
            Self::EquityOption(_) => false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XvaOptions {
    #[serde(default)]
    pub mode: CollateralMode,
    /// One output row per counterparty; otherwise one row for `[curves]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<RatingRow>>,
    /// Use the built-in six-counterparty ladder.
    #[serde(default)]
    pub standard_ladder: bool,
    /// Standalone rows, their sum, the portfolio and the difference.
    #[serde(default)]
    pub netting: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimmOptions {
    #[serde(default)]
    pub option: SimmTableSpec,
    /// Funding scenarios; the five built-in cases when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cases: Option<Vec<FundingCase>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisOptions {
    #[serde(default = "ten")]
    pub tenor: f64,
    /// Funding spread in bp; overrides `funding` when both are set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub funding: Option<FundingScenario>,
    pub etas: EtaSweep,
    /// Margin model at unit multiplier; the CME preset when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<DeltaVar>,
}

fn ten() -> f64 {
    10.0
}

/// Explicit multipliers or an evenly spaced sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaSweep {
    List(Vec<f64>),
    Range { from: f64, to: f64, steps: usize },
}

impl EtaSweep {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match self {
            Self::List(v) if !v.is_empty() => Ok(v.clone()),
            Self::List(_) => Err(CliError::Config("basis.etas is empty".into())),
            Self::Range { from, to, steps } => {
                if *steps < 1 || to.is_nan() || from.is_nan() || to < from {
                    return Err(CliError::Config(
                        "basis.etas range needs from <= to and steps >= 1".into(),
                    ));
                }
                Ok((0..=*steps)
                    .map(|k| from + (to - from) * k as f64 / *steps as f64)
                    .collect())
            }
        }
    }
}
