use crate::error::{Error, Result};
use crate::im::LocalRisk;

use super::grid::{GridSpec, StateGrid};
use super::tridiag::solve_tridiagonal;
use super::PdeProblem;

/// Value over the state grid at `t = 0` together with its Greeks.
#[derive(Debug, Clone)]
pub struct ValueSurface {
    pub grid: StateGrid,
    pub values: Vec<f64>,
    pub delta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub slices: Vec<Slice>,
    pub jumps: Vec<JumpRecord>,
    pub stats: SolveStats,
}

impl ValueSurface {
    pub fn value_at(&self, x: f64) -> f64 {
        self.grid.interpolate(&self.values, x)
    }

    pub fn delta_at(&self, x: f64) -> f64 {
        self.grid.interpolate(&self.delta, x)
    }

    pub fn gamma_at(&self, x: f64) -> f64 {
        self.grid.interpolate(&self.gamma, x)
    }

    pub fn slice_at(&self, t: f64) -> Option<&Slice> {
        self.slices.iter().find(|s| (s.time - t).abs() < 1e-12)
    }

    /// Writes `state,value,delta,gamma` rows for the `t = 0` surface.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "state,value,delta,gamma")?;
        for i in 0..self.grid.len() {
            writeln!(
                out,
                "{},{},{},{}",
                self.grid.node(i),
                self.values[i],
                self.delta[i],
                self.gamma[i]
            )?;
        }
        Ok(())
    }
}

/// Retained value slice, taken after any cashflow at `time` is included.
#[derive(Debug, Clone)]
pub struct Slice {
    pub time: f64,
    pub values: Vec<f64>,
}

/// Value immediately after (`ex_flow`) and before (`cum_flow`) a cashflow date.
#[derive(Debug, Clone)]
pub struct JumpRecord {
    pub time: f64,
    pub ex_flow: Vec<f64>,
    pub cum_flow: Vec<f64>,
    pub amount: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub steps: usize,
    pub linear_solves: usize,
    pub max_iterations: usize,
    /// Largest node change at the accepting Picard iteration over all steps.
    pub max_residual: f64,
    /// Largest node change produced by one extra Picard pass after
    /// convergence, when verification was requested.
    pub extra_pass_change: Option<f64>,
}

/// Crank-Nicolson solver with Rannacher start-up and per-step Picard
/// iteration on the switching terms.
#[derive(Debug, Clone)]
pub struct Solver {
    spec: GridSpec,
    retain_jumps: bool,
    verify_fixed_point: bool,
}

pub fn solve(problem: &PdeProblem, spec: &GridSpec) -> Result<ValueSurface> {
    Solver::new(*spec).solve(problem)
}

/// Central differences inside, second-order one-sided at the two ends.
pub fn greeks(grid: &StateGrid, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = values.len();
    let h = grid.step();
    let mut delta = vec![0.0; n];
    let mut gamma = vec![0.0; n];
    for i in 1..n - 1 {
        delta[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
        gamma[i] = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h);
    }
    delta[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    delta[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    gamma[0] = (values[0] - 2.0 * values[1] + values[2]) / (h * h);
    gamma[n - 1] = (values[n - 1] - 2.0 * values[n - 2] + values[n - 3]) / (h * h);
    (delta, gamma)
}

/// Time nodes from `0` to `horizon` with every entry of `mandatory` included
/// and at most `1 / per_year` between neighbours.
pub(crate) fn time_nodes(horizon: f64, mandatory: &[f64], per_year: usize) -> Vec<f64> {
    let mut knots: Vec<f64> = mandatory.iter().copied().filter(|t| *t > 0.0 && *t < horizon).collect();
    knots.push(0.0);
    knots.push(horizon);
    knots.sort_by(f64::total_cmp);
    knots.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
    let mut nodes = vec![knots[0]];
    for w in knots.windows(2) {
        let len = w[1] - w[0];
        let steps = ((len * per_year as f64) - 1e-9).ceil().max(1.0) as usize;
        for k in 1..=steps {
            nodes.push(if k == steps {
                w[1]
            } else {
                w[0] + len * k as f64 / steps as f64
            });
        }
    }
    nodes
}

struct NodeData {
    drift: Vec<f64>,
    half_var: Vec<f64>,
    underlying: Vec<f64>,
    du: Vec<f64>,
    d2u: Vec<f64>,
    underlying_vol: Vec<f64>,
}

#[derive(Clone, PartialEq)]
struct Coeffs {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    source: Vec<f64>,
}

impl Coeffs {
    fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            source: vec![0.0; n],
        }
    }
}

struct Workspace {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl Solver {
    pub fn new(spec: GridSpec) -> Self {
        Self {
            spec,
            retain_jumps: false,
            verify_fixed_point: false,
        }
    }

    pub fn retain_jumps(mut self, yes: bool) -> Self {
        self.retain_jumps = yes;
        self
    }

    pub fn verify_fixed_point(mut self, yes: bool) -> Self {
        self.verify_fixed_point = yes;
        self
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn solve(&self, problem: &PdeProblem) -> Result<ValueSurface> {
        self.spec.validate()?;
        problem.validate()?;
        let grid = &problem.grid;
        let n = grid.len();
        let map = problem.diffusion.state_map();
        let mut data = NodeData {
            drift: Vec::with_capacity(n),
            half_var: Vec::with_capacity(n),
            underlying: Vec::with_capacity(n),
            du: Vec::with_capacity(n),
            d2u: Vec::with_capacity(n),
            underlying_vol: Vec::with_capacity(n),
        };
        for x in grid.nodes() {
            let b = problem.diffusion.vol(x);
            let (d1, d2) = map.derivatives(x);
            data.drift.push(problem.diffusion.drift(x));
            data.half_var.push(0.5 * b * b);
            data.underlying.push(map.underlying(x));
            data.du.push(d1);
            data.d2u.push(d2);
            data.underlying_vol.push(b * d1);
        }
        let g = map.boundary_ratio();

        let mut mandatory: Vec<f64> = problem.events.iter().map(|e| e.time).collect();
        mandatory.extend(problem.slice_times.iter().copied());
        let times = time_nodes(problem.horizon, &mandatory, self.spec.n_time_per_year);

        let mut run = Run {
            solver: self,
            problem,
            data,
            g,
            stats: SolveStats::default(),
            ws: Workspace {
                lower: vec![0.0; n],
                diag: vec![0.0; n],
                upper: vec![0.0; n],
                rhs: vec![0.0; n],
                scratch: Vec::with_capacity(n),
            },
        };
        if self.verify_fixed_point {
            run.stats.extra_pass_change = Some(0.0);
        }

        let mut v = problem.terminal.clone();
        let mut jumps = Vec::new();
        let mut slices = Vec::new();
        let last = times.len() - 1;
        let mut rannacher_left = self.spec.rannacher_steps;
        let apply_events = |t: f64, v: &mut Vec<f64>, jumps: &mut Vec<JumpRecord>| -> bool {
            let mut any = false;
            for ev in problem.events.iter().filter(|e| (e.time - t).abs() < 1e-10) {
                let ex = v.clone();
                for (vi, a) in v.iter_mut().zip(&ev.amount) {
                    *vi += a;
                }
                if self.retain_jumps {
                    jumps.push(JumpRecord {
                        time: ev.time,
                        ex_flow: ex,
                        cum_flow: v.clone(),
                        amount: ev.amount.clone(),
                    });
                }
                any = true;
            }
            any
        };
        let record_slice = |t: f64, v: &[f64], slices: &mut Vec<Slice>| {
            if problem.slice_times.iter().any(|s| (s - t).abs() < 1e-10) {
                slices.push(Slice {
                    time: t,
                    values: v.to_vec(),
                });
            }
        };

        if apply_events(times[last], &mut v, &mut jumps) {
            rannacher_left = self.spec.rannacher_steps;
        }
        record_slice(times[last], &v, &mut slices);
        for k in (0..last).rev() {
            let (t_lo, t_hi) = (times[k], times[k + 1]);
            let step = last - k;
            v = if rannacher_left > 0 {
                rannacher_left -= 1;
                let mid = 0.5 * (t_lo + t_hi);
                let half = run.advance(&v, t_hi, mid, 1.0, step)?;
                run.advance(&half, mid, t_lo, 1.0, step)?
            } else {
                run.advance(&v, t_hi, t_lo, 0.5, step)?
            };
            run.stats.steps += 1;
            if apply_events(t_lo, &mut v, &mut jumps) {
                rannacher_left = self.spec.rannacher_steps;
            }
            record_slice(t_lo, &v, &mut slices);
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteValue { step: last, time: 0.0 });
        }
        let (delta, gamma) = greeks(grid, &v);
        slices.reverse();
        jumps.reverse();
        Ok(ValueSurface {
            grid: grid.clone(),
            values: v,
            delta,
            gamma,
            slices,
            jumps,
            stats: run.stats,
        })
    }
}

struct Run<'a> {
    solver: &'a Solver,
    problem: &'a PdeProblem,
    data: NodeData,
    g: f64,
    stats: SolveStats,
    ws: Workspace,
}

impl Run<'_> {
    /// Spatial operator with switches frozen at `v`, time `t`.
    fn assemble(&self, v: &[f64], t: f64, out: &mut Coeffs) {
        let n = v.len();
        let h = self.problem.grid.step();
        let h2 = h * h;
        let d = &self.data;
        let tte = self.problem.horizon - t;
        for i in 1..n - 1 {
            let mut a = d.drift[i];
            let mut diff = d.half_var[i];
            let mut src = 0.0;
            if let Some(margin) = &self.problem.margin {
                let vx = (v[i + 1] - v[i - 1]) / (2.0 * h);
                let vxx = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
                let (du, d2u) = (d.du[i], d.d2u[i]);
                let v_u = vx / du;
                let v_uu = (vxx - v_u * d2u) / (du * du);
                let lin = margin.rule.linearize(&LocalRisk {
                    t,
                    time_to_expiry: tte,
                    underlying: d.underlying[i],
                    underlying_vol: d.underlying_vol[i],
                    delta: v_u,
                    gamma: v_uu,
                });
                let cx = lin.delta / du - lin.gamma * d2u / (du * du * du);
                let cxx = lin.gamma / (du * du);
                a += margin.scale * cx;
                diff = (diff + margin.scale * cxx).max(0.0);
                src = margin.scale * lin.constant;
            }
            let r = self.problem.discount.rate(i, v[i]);
            let (lo, up, mid) = if a.abs() * h <= 2.0 * diff {
                (diff / h2 - a / (2.0 * h), diff / h2 + a / (2.0 * h), -2.0 * diff / h2)
            } else if a > 0.0 {
                (diff / h2, diff / h2 + a / h, -2.0 * diff / h2 - a / h)
            } else {
                (diff / h2 - a / h, diff / h2, -2.0 * diff / h2 + a / h)
            };
            out.lower[i] = lo;
            out.upper[i] = up;
            out.diag[i] = mid - r;
            out.source[i] = src;
        }
    }

    /// Implicit solve `(I - theta dt M) V = rhs + theta dt S`, boundaries
    /// eliminated through the far-field linearity condition.
    fn implicit_solve(&mut self, c: &Coeffs, rhs: &[f64], theta_dt: f64, prev: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let h = self.problem.grid.step();
        let gh = self.g * h;
        let mut out = vec![0.0; n];
        if n == 3 {
            // No room for the far-field stencil: boundaries keep their previous values.
            out[0] = prev[0];
            out[2] = prev[2];
            let lhs = 1.0 - theta_dt * c.diag[1];
            out[1] = (rhs[1] + theta_dt * (c.source[1] + c.lower[1] * out[0] + c.upper[1] * out[2])) / lhs;
            return out;
        }
        let (p1, p2) = (
            (2.0 + 2.0 * gh) / (1.0 + 1.5 * gh),
            -(1.0 + 0.5 * gh) / (1.0 + 1.5 * gh),
        );
        let (q1, q2) = (
            (2.0 - 2.0 * gh) / (1.0 - 1.5 * gh),
            -(1.0 - 0.5 * gh) / (1.0 - 1.5 * gh),
        );
        let m = n - 2;
        let ws = &mut self.ws;
        ws.lower.resize(m, 0.0);
        ws.diag.resize(m, 0.0);
        ws.upper.resize(m, 0.0);
        ws.rhs.resize(m, 0.0);
        for j in 0..m {
            let i = j + 1;
            ws.lower[j] = -theta_dt * c.lower[i];
            ws.diag[j] = 1.0 - theta_dt * c.diag[i];
            ws.upper[j] = -theta_dt * c.upper[i];
            ws.rhs[j] = rhs[i] + theta_dt * c.source[i];
        }
        // V_0 = p1 V_1 + p2 V_2
        let l0 = ws.lower[0];
        ws.diag[0] += l0 * p1;
        ws.upper[0] += l0 * p2;
        ws.lower[0] = 0.0;
        // V_{n-1} = q1 V_{n-2} + q2 V_{n-3}
        let ul = ws.upper[m - 1];
        ws.diag[m - 1] += ul * q1;
        if m >= 2 {
            ws.lower[m - 1] += ul * q2;
        }
        ws.upper[m - 1] = 0.0;
        solve_tridiagonal(&ws.lower, &ws.diag, &ws.upper, &mut ws.rhs, &mut ws.scratch);
        out[1..n - 1].copy_from_slice(&ws.rhs[..m]);
        out[0] = p1 * out[1] + p2 * out[2];
        out[n - 1] = q1 * out[n - 2] + q2 * out[n - 3];
        self.stats.linear_solves += 1;
        out
    }

    fn advance(&mut self, v_hi: &[f64], t_hi: f64, t_lo: f64, theta: f64, step: usize) -> Result<Vec<f64>> {
        let n = v_hi.len();
        let dt = t_hi - t_lo;
        let mut rhs = v_hi.to_vec();
        let mut coeffs = Coeffs::zeros(n);
        if theta < 1.0 {
            self.assemble(v_hi, t_hi, &mut coeffs);
            let w = (1.0 - theta) * dt;
            for i in 1..n - 1 {
                rhs[i] += w
                    * (coeffs.lower[i] * v_hi[i - 1]
                        + coeffs.diag[i] * v_hi[i]
                        + coeffs.upper[i] * v_hi[i + 1]
                        + coeffs.source[i]);
            }
        }
        let tol = self.solver.spec.picard_tol;
        let max_iter = self.solver.spec.picard_max;
        let mut iterate = v_hi.to_vec();
        let mut prev: Option<Coeffs> = None;
        let mut last_change = f64::INFINITY;
        for k in 1..=max_iter {
            self.assemble(&iterate, t_lo, &mut coeffs);
            if prev.as_ref() == Some(&coeffs) {
                // Same frozen switches as the last solve: exact fixed point.
                self.finish(k - 1, 0.0);
                return Ok(iterate);
            }
            let next = self.implicit_solve(&coeffs, &rhs, theta * dt, &iterate);
            if next.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteValue { step, time: t_lo });
            }
            last_change = next
                .iter()
                .zip(&iterate)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            iterate = next;
            if last_change < tol {
                if self.solver.verify_fixed_point {
                    self.assemble(&iterate, t_lo, &mut coeffs);
                    let again = self.implicit_solve(&coeffs, &rhs, theta * dt, &iterate);
                    let extra = again
                        .iter()
                        .zip(&iterate)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    let slot = self.stats.extra_pass_change.get_or_insert(0.0);
                    *slot = slot.max(extra);
                }
                self.finish(k, last_change);
                return Ok(iterate);
            }
            prev = Some(coeffs.clone());
        }
        Err(Error::NoConvergence {
            step,
            time: t_lo,
            residual: last_change,
        })
    }

    fn finish(&mut self, iterations: usize, residual: f64) {
        self.stats.max_iterations = self.stats.max_iterations.max(iterations);
        self.stats.max_residual = self.stats.max_residual.max(residual);
    }
}
