use std::io::Write;

use super::Adjustments;
use crate::error::{Error, Result};

/// One labelled line of an adjustment table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    /// Figures shown in the table (yield values where available).
    pub shown: Adjustments,
    /// Raw present values.
    pub pv: Option<Adjustments>,
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::Unsupported(format!("report output failed: {e}"))
}

/// Writes `label,NPV,CVA,DVA,CFA,DFA,MVA[,TVA]` at two decimals followed by
/// the full-precision present values.
pub fn write_adjustments_csv<W: Write>(out: W, rows: &[ReportRow], with_tva: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["label", "NPV", "CVA", "DVA", "CFA", "DFA", "MVA"];
    if with_tva {
        header.push("TVA");
    }
    header.extend([
        "pv_npv",
        "pv_cva",
        "pv_dva",
        "pv_cfa",
        "pv_dfa",
        "pv_mva",
        "pv_tva",
        "pv_residual",
    ]);
    w.write_record(&header).map_err(io)?;
    for row in rows {
        let a = &row.shown;
        let mut rec = vec![row.label.clone()];
        let mut shown = vec![a.npv, a.cva, a.dva, a.cfa, a.dfa, a.mva];
        if with_tva {
            shown.push(a.tva);
        }
        rec.extend(shown.into_iter().map(|x| format!("{x:.2}")));
        match &row.pv {
            Some(p) => rec.extend(
                [p.npv, p.cva, p.dva, p.cfa, p.dfa, p.mva, p.tva, p.residual]
                    .into_iter()
                    .map(|x| format!("{x:e}")),
            ),
            None => rec.extend(std::iter::repeat_n(String::new(), 8)),
        }
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_decimal_table_then_raw_values() {
        let shown = Adjustments {
            npv: -2.834,
            mva: 2.2651,
            tva: 1.0,
            ..Default::default()
        };
        let rows = [
            ReportRow {
                label: "AAA".into(),
                shown,
                pv: Some(Adjustments {
                    npv: -0.0025,
                    ..Default::default()
                }),
            },
            ReportRow {
                label: "Sum".into(),
                shown,
                pv: None,
            },
        ];
        let mut out = Vec::new();
        write_adjustments_csv(&mut out, &rows, true).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("label,NPV,CVA,DVA,CFA,DFA,MVA,TVA,pv_npv"));
        assert_eq!(
            lines[1],
            "AAA,-2.83,0.00,0.00,0.00,0.00,2.27,1.00,-2.5e-3,0e0,0e0,0e0,0e0,0e0,0e0,0e0"
        );
        assert_eq!(lines[2], "Sum,-2.83,0.00,0.00,0.00,0.00,2.27,1.00,,,,,,,,");
    }
}
