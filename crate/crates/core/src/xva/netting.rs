use std::sync::Arc;

use serde::Serialize;

use super::{decompose, Adjustments, CollateralMode, CurveSet, PricingSetup, XvaReport};
use crate::error::{Error, Result};
use crate::im::MarginRule;
use crate::instruments::Portfolio;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NettingReport {
    /// Standalone report per holding.
    pub standalone: Vec<XvaReport>,
    /// Sum of the standalone figures.
    pub sum: Adjustments,
    pub portfolio: XvaReport,
    /// Portfolio less sum: the netting effect.
    pub difference: Adjustments,
}

/// Decomposes each holding on its own and the portfolio as a whole. All
/// rows share the portfolio's annuity so the difference row is meaningful.
pub fn netting_report(
    portfolio: &Portfolio,
    setup_for: impl Fn(&Portfolio) -> Result<PricingSetup>,
    curves: &CurveSet,
    rule: Option<&Arc<dyn MarginRule>>,
    mode: CollateralMode,
) -> Result<NettingReport> {
    if portfolio.items.is_empty() {
        return Err(Error::IncompatiblePortfolio("portfolio is empty".into()));
    }
    let whole = setup_for(portfolio)?;
    let annuity = whole.annuity;
    let total = decompose(&whole, curves, rule, mode)?;
    let mut standalone = Vec::with_capacity(portfolio.items.len());
    let mut sum = Adjustments::default();
    for h in &portfolio.items {
        let single = Portfolio { items: vec![h.clone()] };
        let setup = setup_for(&single)?.with_annuity(annuity);
        let report = decompose(&setup, curves, rule, mode)?;
        sum = sum.plus(&report.preferred());
        standalone.push(report);
    }
    Ok(NettingReport {
        difference: total.preferred().minus(&sum),
        standalone,
        sum,
        portfolio: total,
    })
}
