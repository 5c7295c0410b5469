use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Least-squares polynomial in the standardized state.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    center: f64,
    scale: f64,
    coeffs: Vec<f64>,
}

impl PolyFit {
    /// Fits `y ~ sum c_j z^j`, `z = (x - mean) / sd`, through the normal
    /// equations. `time` is only used for error reporting.
    pub fn fit(x: &[f64], y: &[f64], degree: usize, time: f64) -> Result<Self> {
        let n = x.len() as f64;
        let center = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - center).powi(2)).sum::<f64>() / n;
        let scale = var.sqrt();
        if !(scale > 1e-14 * center.abs().max(1.0)) || x.len() <= degree {
            return Err(Error::RegressionSingular { time });
        }
        let m = degree + 1;
        let mut gram = DMatrix::<f64>::zeros(m, m);
        let mut rhs = DVector::<f64>::zeros(m);
        let mut pow = vec![0.0; 2 * m - 1];
        for (&xi, &yi) in x.iter().zip(y) {
            let z = (xi - center) / scale;
            pow[0] = 1.0;
            for j in 1..pow.len() {
                pow[j] = pow[j - 1] * z;
            }
            for i in 0..m {
                rhs[i] += pow[i] * yi;
                for j in 0..=i {
                    gram[(i, j)] += pow[i + j];
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                gram[(j, i)] = gram[(i, j)];
            }
        }
        let coeffs = gram.cholesky().ok_or(Error::RegressionSingular { time })?.solve(&rhs);
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::RegressionSingular { time });
        }
        Ok(Self {
            center,
            scale,
            coeffs: coeffs.iter().copied().collect(),
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.scale;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c)
    }

    /// Derivative in `x`.
    pub fn slope(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.scale;
        let d = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (j, c)| acc * z + j as f64 * c);
        d / self.scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_a_cubic() {
        let x: Vec<f64> = (0..200).map(|i| 0.01 + i as f64 * 1e-4).collect();
        let f = |v: f64| 1.0 - 3.0 * v + 40.0 * v * v - 500.0 * v * v * v;
        let y: Vec<f64> = x.iter().map(|&v| f(v)).collect();
        let fit = PolyFit::fit(&x, &y, 4, 0.0).unwrap();
        for &v in &[0.012, 0.02, 0.029] {
            assert!((fit.eval(v) - f(v)).abs() < 1e-9);
            let d = -3.0 + 80.0 * v - 1500.0 * v * v;
            assert!((fit.slope(v) - d).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_state_is_singular() {
        let x = vec![0.02; 50];
        let y = vec![1.0; 50];
        assert!(matches!(
            PolyFit::fit(&x, &y, 3, 1.5),
            Err(Error::RegressionSingular { .. })
        ));
    }
}
