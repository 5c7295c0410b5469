use crate::error::{Error, Result};

/// Observed spatial order from a refinement ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub nodes: Vec<usize>,
    pub values: Vec<f64>,
    /// Order estimated from each consecutive triple of the ladder.
    pub orders: Vec<f64>,
    /// True when every rung returns the same value (to rounding).
    pub exact: bool,
}

impl ConvergenceReport {
    /// Order from the finest triple; `None` when the ladder is exact.
    pub fn observed_order(&self) -> Option<f64> {
        if self.exact {
            None
        } else {
            self.orders.last().copied()
        }
    }
}

/// Richardson estimate of the spatial order. `value_for(n)` runs the solve
/// with `n` space nodes and returns the quantity of interest; rungs should
/// share the refinement ratio `(n_{k+1} - 1) / (n_k - 1)`.
pub fn convergence_study<F>(ladder: &[usize], mut value_for: F) -> Result<ConvergenceReport>
where
    F: FnMut(usize) -> Result<f64>,
{
    if ladder.len() < 3 {
        return Err(Error::InvalidParameter(
            "convergence study needs at least 3 grids".into(),
        ));
    }
    let values = ladder.iter().map(|&n| value_for(n)).collect::<Result<Vec<_>>>()?;
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let exact = values.windows(2).all(|w| (w[1] - w[0]).abs() <= 1e-13 * scale);
    let mut orders = Vec::new();
    for k in 0..ladder.len() - 2 {
        let ratio = (ladder[k + 1] - 1) as f64 / (ladder[k] - 1) as f64;
        let coarse = values[k + 1] - values[k];
        let fine = values[k + 2] - values[k + 1];
        orders.push(if fine == 0.0 {
            f64::INFINITY
        } else {
            (coarse / fine).abs().ln() / ratio.ln()
        });
    }
    Ok(ConvergenceReport {
        nodes: ladder.to_vec(),
        values,
        orders,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_synthetic_order() {
        let r = convergence_study(&[101, 201, 401], |n| Ok(1.0 + 3.0 / ((n - 1) as f64).powi(2))).unwrap();
        assert!((r.observed_order().unwrap() - 2.0).abs() < 1e-9);
        let z = convergence_study(&[11, 21, 41], |_| Ok(0.0)).unwrap();
        assert!(z.exact && z.observed_order().is_none());
        assert!(convergence_study(&[11, 21], |_| Ok(0.0)).is_err());
    }
}
