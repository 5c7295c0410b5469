use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resolution and iteration settings for a finite-difference run.
///
/// State bounds are optional; when absent the caller's model-specific default
/// domain is used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub n_space: usize,
    pub n_time_per_year: usize,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub rannacher_steps: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_min: None,
            x_max: None,
            n_space: 600,
            n_time_per_year: 120,
            picard_tol: 1e-10,
            picard_max: 50,
            rannacher_steps: 2,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_space < 3 {
            return Err(Error::InvalidParameter(format!(
                "n_space must be at least 3, got {}",
                self.n_space
            )));
        }
        if self.n_time_per_year == 0 {
            return Err(Error::InvalidParameter("n_time_per_year must be positive".into()));
        }
        if !(self.picard_tol > 0.0) {
            return Err(Error::InvalidParameter("picard_tol must be positive".into()));
        }
        if self.picard_max == 0 {
            return Err(Error::InvalidParameter("picard_max must be positive".into()));
        }
        if let (Some(lo), Some(hi)) = (self.x_min, self.x_max) {
            if !(lo < hi) {
                return Err(Error::InvalidParameter(format!("x_min {lo} must be below x_max {hi}")));
            }
        }
        Ok(())
    }

    pub fn with_space_nodes(&self, n_space: usize) -> Self {
        Self { n_space, ..*self }
    }

    /// Builds the state grid, falling back to `default_bounds` where the spec
    /// leaves a bound open. When `anchor` lies inside the domain the grid is
    /// shifted by less than half a cell so that it falls exactly on a node.
    pub fn state_grid(&self, default_bounds: (f64, f64), anchor: Option<f64>) -> Result<StateGrid> {
        self.validate()?;
        let lo = self.x_min.unwrap_or(default_bounds.0);
        let hi = self.x_max.unwrap_or(default_bounds.1);
        match anchor {
            Some(a) => StateGrid::anchored(lo, hi, self.n_space, a),
            None => StateGrid::uniform(lo, hi, self.n_space),
        }
    }
}

/// Uniform grid over the engine's state variable.
#[derive(Debug, Clone, PartialEq)]
pub struct StateGrid {
    x_min: f64,
    step: f64,
    len: usize,
}

impl StateGrid {
    pub fn uniform(x_min: f64, x_max: f64, len: usize) -> Result<Self> {
        if len < 3 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 3 nodes, got {len}"
            )));
        }
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidParameter(format!("bad grid bounds [{x_min}, {x_max}]")));
        }
        Ok(Self {
            x_min,
            step: (x_max - x_min) / (len - 1) as f64,
            len,
        })
    }

    pub fn anchored(x_min: f64, x_max: f64, len: usize, anchor: f64) -> Result<Self> {
        let mut grid = Self::uniform(x_min, x_max, len)?;
        if anchor > x_min && anchor < x_max {
            let k = ((anchor - x_min) / grid.step).round();
            grid.x_min = anchor - k * grid.step;
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.node(self.len - 1)
    }

    pub fn node(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.step
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.node(i)).collect()
    }

    /// Index of the node nearest to `x`, if `x` sits on a node to within
    /// `1e-9` of a cell.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let k = (x - self.x_min) / self.step;
        let r = k.round();
        ((k - r).abs() < 1e-9 && r >= 0.0 && (r as usize) < self.len).then_some(r as usize)
    }

    /// Cubic Lagrange interpolation of nodal `values` at `x`; values outside
    /// the domain are linearly extrapolated from the boundary cell.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        debug_assert_eq!(values.len(), self.len);
        if let Some(i) = self.node_index(x) {
            return values[i];
        }
        let k = (x - self.x_min) / self.step;
        if k <= 0.0 {
            return values[0] + (values[1] - values[0]) * k;
        }
        let last = (self.len - 1) as f64;
        if k >= last {
            let n = self.len;
            return values[n - 1] + (values[n - 1] - values[n - 2]) * (k - last);
        }
        if self.len < 4 {
            let i = (k.floor() as usize).min(self.len - 2);
            let w = k - i as f64;
            return values[i] * (1.0 - w) + values[i + 1] * w;
        }
        let base = (k.floor() as isize - 1).clamp(0, self.len as isize - 4) as usize;
        let s = k - base as f64;
        let mut acc = 0.0;
        for j in 0..4 {
            let mut w = 1.0;
            for m in 0..4 {
                if m != j {
                    w *= (s - m as f64) / (j as f64 - m as f64);
                }
            }
            acc += w * values[base + j];
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchored_grid_contains_anchor() {
        let g = StateGrid::anchored(-0.01, 0.20, 600, 0.0031).unwrap();
        let i = g.node_index(0.0031).expect("anchor on node");
        assert!((g.node(i) - 0.0031).abs() < 1e-14);
        assert!((g.step() - 0.21 / 599.0).abs() < 1e-15);
    }

    #[test]
    fn cubic_interpolation_is_exact_for_cubics() {
        let g = StateGrid::uniform(0.0, 1.0, 11).unwrap();
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - 3.0 * x * x * x;
        let v: Vec<f64> = g.nodes().into_iter().map(f).collect();
        for x in [0.03, 0.37, 0.5, 0.91, 0.999] {
            assert!((g.interpolate(&v, x) - f(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_degenerate_specs() {
        assert!(GridSpec {
            n_space: 2,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(GridSpec {
            picard_tol: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(StateGrid::uniform(1.0, 1.0, 10).is_err());
    }
}
