use std::fmt::Write as _;

use mva_core::im::{funding_spread, DeltaVar};
use mva_core::instruments::{annuity, float_leg_pv, Instrument, Portfolio, RiskFactor};
use mva_core::mc::mc_xva;
use mva_core::ratemodels::{calibrate as fit, model_registry, CalibrationOutcome, RateEngine};
use mva_core::xva::scenarios::{rating_ladder, simm_table, standard_funding_cases, standard_rating_ladder, RatingRow};
use mva_core::xva::{
    ccp_basis, decompose, netting_report, write_adjustments_csv, CurveSet, PricingSetup, ReportRow, XvaReport,
};

use crate::config::{RunConfig, XvaOptions};
use crate::CliError;

/// Command result: `body` goes to `--out` (or stdout), `report` to stdout.
pub struct Output {
    pub body: String,
    pub report: String,
}

fn csv_text(write: impl FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>) -> Result<String, CliError> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        write(&mut w).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
        w.flush()?;
    }
    String::from_utf8(buf).map_err(|e| CliError::Io(std::io::Error::other(e)))
}

fn bp(x: f64) -> String {
    format!("{x:.2}")
}

fn raw(x: f64) -> String {
    format!("{x:e}")
}

fn run_calibration(cfg: &RunConfig) -> Result<CalibrationOutcome, CliError> {
    let model = cfg.model()?;
    let kind = model
        .kind
        .as_deref()
        .ok_or_else(|| CliError::Config("model.kind is required for calibration".into()))?;
    let targets = model
        .targets
        .ok_or_else(|| CliError::Config("model.targets is required for calibration".into()))?;
    let registry = model_registry();
    let family = registry.get(kind)?(&model.family_settings());
    Ok(fit(family.as_ref(), &targets, &cfg.engine.calibration_settings())?)
}

/// Rate engine from explicit parameters or a fresh calibration. The curve
/// set's LIBOR-OIS spread must agree with the engine's.
fn rate_engine(cfg: &RunConfig) -> Result<RateEngine, CliError> {
    let model = cfg.model()?;
    let (params, libor_ois) = match (&model.params, &model.targets) {
        (Some(p), targets) => (p.clone(), targets.map_or(cfg.curves.libor_ois, |t| t.libor_ois)),
        (None, Some(t)) => (run_calibration(cfg)?.params, t.libor_ois),
        (None, None) => return Err(CliError::Config("model needs either params or targets".into())),
    };
    if (libor_ois - cfg.curves.libor_ois).abs() > 1e-12 {
        return Err(CliError::Config(format!(
            "curves.libor_ois ({}) must equal the model's LIBOR-OIS spread ({libor_ois})",
            cfg.curves.libor_ois
        )));
    }
    Ok(RateEngine::new(params.build()?, libor_ois * 1e-4, cfg.engine.grid)?)
}

/// Portfolio with every `"par"` quote replaced by the model par rate of the
/// instrument's own schedule.
fn resolve_portfolio(cfg: &RunConfig, engine: Option<&RateEngine>) -> Result<Portfolio, CliError> {
    let mut portfolio = cfg.portfolio()?;
    for (h, ic) in portfolio.items.iter_mut().zip(&cfg.instruments) {
        if !ic.needs_par() {
            continue;
        }
        let engine = engine.ok_or_else(|| CliError::Config("\"par\" quotes need a rate model".into()))?;
        match &mut h.instrument {
            Instrument::Swap(s) => {
                s.fixed_rate = float_leg_pv(engine, s.start, s.maturity, s.float_freq)?
                    / annuity(engine, s.start, s.maturity, s.fixed_freq)?;
            }
            Instrument::CapFloor(c) => {
                let conv = cfg.engine.conventions;
                c.strike = float_leg_pv(engine, c.start, c.maturity, conv.float_freq)?
                    / annuity(engine, c.start, c.maturity, conv.fixed_freq)?;
            }
            Instrument::EquityOption(_) => {}
        }
    }
    Ok(portfolio)
}

enum Market {
    Rates(RateEngine),
    Equity,
}

impl Market {
    fn setup(&self, cfg: &RunConfig, p: &Portfolio) -> Result<PricingSetup, mva_core::Error> {
        match self {
            Self::Rates(engine) => PricingSetup::rates(engine, p, &cfg.engine.conventions),
            Self::Equity => PricingSetup::equity(p, cfg.engine.grid),
        }
    }
}

fn market(cfg: &RunConfig) -> Result<(Market, Portfolio), CliError> {
    let first = cfg.portfolio()?;
    match first.factor()? {
        RiskFactor::Rate => {
            let engine = rate_engine(cfg)?;
            let portfolio = resolve_portfolio(cfg, Some(&engine))?;
            Ok((Market::Rates(engine), portfolio))
        }
        RiskFactor::Equity { .. } => Ok((Market::Equity, resolve_portfolio(cfg, None)?)),
    }
}

fn ladder_rows(opts: &XvaOptions) -> Option<Vec<RatingRow>> {
    if let Some(rows) = &opts.ladder {
        Some(rows.clone())
    } else if opts.standard_ladder {
        Some(standard_rating_ladder())
    } else {
        None
    }
}

fn row(label: String, report: &XvaReport) -> ReportRow {
    ReportRow {
        label,
        shown: report.preferred(),
        pv: Some(report.pv),
    }
}

pub fn calibrate(cfg: &RunConfig) -> Result<Output, CliError> {
    let outcome = run_calibration(cfg)?;
    let mut report = String::new();
    for (name, r) in ["libor3m", "par10y", "cap10y_yv"].iter().zip(outcome.residuals_bp) {
        let _ = writeln!(report, "{name:<10} residual {r:+.6} bp");
    }
    let _ = writeln!(report, "iterations {}", outcome.iterations);
    let body = toml::to_string(&outcome.params).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(Output { body, report })
}

pub fn xva(cfg: &RunConfig) -> Result<Output, CliError> {
    let opts = cfg.xva.clone().unwrap_or_default();
    let (market, portfolio) = market(cfg)?;
    let rule = cfg.margin_rule()?;
    let mut rows = Vec::new();
    let with_tva = opts.netting;
    if opts.netting {
        if ladder_rows(&opts).is_some() {
            return Err(CliError::Config("xva.netting and a rating ladder are exclusive".into()));
        }
        let report = netting_report(
            &portfolio,
            |p| market.setup(cfg, p),
            &cfg.curves,
            rule.as_ref(),
            opts.mode,
        )?;
        for (i, (r, ic)) in report.standalone.iter().zip(&cfg.instruments).enumerate() {
            rows.push(row(ic.label(i), r));
        }
        rows.push(ReportRow {
            label: "Sum".into(),
            shown: report.sum,
            pv: None,
        });
        rows.push(row("Portfolio".into(), &report.portfolio));
        rows.push(ReportRow {
            label: "Difference".into(),
            shown: report.difference,
            pv: None,
        });
    } else {
        let setup = market.setup(cfg, &portfolio)?;
        match ladder_rows(&opts) {
            Some(ladder) => {
                let reports = rating_ladder(&setup, &cfg.curves, &ladder, rule.as_ref(), opts.mode)?;
                for (r, l) in reports.iter().zip(&ladder) {
                    rows.push(row(l.label.clone(), r));
                }
            }
            None => {
                let r = decompose(&setup, &cfg.curves, rule.as_ref(), opts.mode)?;
                rows.push(row("portfolio".into(), &r));
            }
        }
    }
    let mut buf = Vec::new();
    write_adjustments_csv(&mut buf, &rows, with_tva)?;
    Ok(Output {
        body: String::from_utf8(buf).expect("csv output is utf-8"),
        report: String::new(),
    })
}

pub fn simm(cfg: &RunConfig) -> Result<Output, CliError> {
    let opts = cfg.simm.clone().unwrap_or_default();
    let cases = opts.cases.clone().unwrap_or_else(standard_funding_cases);
    let rows = simm_table(&opts.option, &cases, cfg.engine.grid)?;
    let spec = &opts.option;
    let body = csv_text(|w| {
        w.write_record([
            "label".to_string(),
            "Sprd (%)".into(),
            "MVA-dgv".into(),
            "MVA-gv".into(),
            format!("MVA-M{}", spec.allocated_eta),
            format!("MVA {}y dgv", spec.long_expiry),
            "Bid".into(),
            "Ask".into(),
            "riskfree".into(),
            "raw_mva_dgv".into(),
            "raw_mva_gv".into(),
            "raw_mva_allocated".into(),
            "raw_mva_long".into(),
            "raw_bid".into(),
            "raw_ask".into(),
        ])?;
        for r in &rows {
            w.write_record([
                r.label.clone(),
                bp(100.0 * r.spread),
                bp(r.mva_dgv),
                bp(r.mva_gv),
                bp(r.mva_allocated),
                bp(r.mva_long),
                bp(r.bid),
                bp(r.ask),
                raw(r.riskfree),
                raw(r.mva_dgv),
                raw(r.mva_gv),
                raw(r.mva_allocated),
                raw(r.mva_long),
                raw(r.bid),
                raw(r.ask),
            ])?;
        }
        Ok(())
    })?;
    Ok(Output {
        body,
        report: String::new(),
    })
}

pub fn basis(cfg: &RunConfig) -> Result<Output, CliError> {
    let opts = cfg
        .basis
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [basis] section".into()))?;
    let s_l = match (opts.s_l, &opts.funding) {
        (Some(s), _) => s,
        (None, Some(f)) => {
            f.validate()?;
            1e4 * funding_spread(f)
        }
        (None, None) => return Err(CliError::Config("basis needs s_l or a funding scenario".into())),
    };
    let engine = rate_engine(cfg)?;
    let margin = opts.margin.clone().unwrap_or_else(|| DeltaVar::cme(1.0));
    margin.validate()?;
    let points = ccp_basis(
        &engine,
        opts.tenor,
        &opts.etas.values()?,
        s_l,
        &margin,
        &cfg.engine.conventions,
    )?;
    let body = csv_text(|w| {
        w.write_record([
            "eta_p",
            "receiver_mva_bp",
            "payer_mva_bp",
            "basis_bp",
            "raw_receiver_mva_bp",
            "raw_payer_mva_bp",
            "raw_basis_bp",
        ])?;
        for p in &points {
            w.write_record([
                format!("{}", p.eta_p),
                bp(p.receiver_mva_bp),
                bp(p.payer_mva_bp),
                bp(p.basis_bp),
                raw(p.receiver_mva_bp),
                raw(p.payer_mva_bp),
                raw(p.basis_bp),
            ])?;
        }
        Ok(())
    })?;
    Ok(Output {
        body,
        report: format!("margin funding spread {s_l} bp\n"),
    })
}

pub fn mc_check(cfg: &RunConfig) -> Result<Output, CliError> {
    let opts = cfg.xva.clone().unwrap_or_default();
    let (market, portfolio) = market(cfg)?;
    let Market::Rates(engine) = &market else {
        return Err(CliError::Config("mc-check supports rate portfolios only".into()));
    };
    let rule = cfg.margin_rule()?;
    let conv = cfg.engine.conventions;
    let setup = market.setup(cfg, &portfolio)?;
    let ladder = ladder_rows(&opts).unwrap_or_else(|| {
        vec![RatingRow {
            label: "portfolio".into(),
            cds_c: cfg.curves.cds_c,
            basis_c: cfg.curves.basis_c,
        }]
    });
    let mut records = Vec::new();
    for l in &ladder {
        let curves = CurveSet {
            cds_c: l.cds_c,
            basis_c: l.basis_c,
            ..cfg.curves
        };
        let fd = decompose(&setup, &curves, rule.as_ref(), opts.mode)?;
        let mc = mc_xva(
            engine,
            &portfolio,
            &conv,
            &curves,
            rule.as_ref(),
            opts.mode,
            &cfg.engine.mc,
        )?;
        let fd_bp = fd.preferred();
        let npv = mc.bp(&mc.npv).unwrap_or(mc.npv);
        let mva = mc.bp(&mc.mva).unwrap_or(mc.mva);
        records.push(vec![
            l.label.clone(),
            bp(fd_bp.npv),
            bp(npv.mean),
            format!("{:.3}", npv.se),
            format!("{:.3}", npv.mean - fd_bp.npv),
            bp(fd_bp.mva),
            bp(mva.mean),
            format!("{:.3}", mva.se),
            format!("{:.3}", mva.mean - fd_bp.mva),
        ]);
    }
    let body = csv_text(|w| {
        w.write_record([
            "label",
            "fd_npv_bp",
            "mc_npv_bp",
            "mc_npv_se_bp",
            "npv_diff_bp",
            "fd_mva_bp",
            "mc_mva_bp",
            "mc_mva_se_bp",
            "mva_diff_bp",
        ])?;
        for r in &records {
            w.write_record(r)?;
        }
        Ok(())
    })?;
    Ok(Output {
        body,
        report: String::new(),
    })
}
