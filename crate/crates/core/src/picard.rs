//! Semilinear problem by Picard iteration on the integral equation
//!
//! ```text
//! u = u_{h1} + u*_{h0} - int_0^t int_0^l G(x, xi, t - tau) F(xi, tau, u(xi, tau)) dxi dtau
//! ```
//!
//! together with the a priori bound, continuous-dependence and windowing diagnostics.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Field, Grid, Provenance};
use crate::kernel::{mode_kernel_unchecked, GreenEvaluator};
use crate::modal::{check_projection, par_map, propagate, ModalBasis, StepCache, TimeMesh};
use crate::model::{decay_constants, Parameters, ENDPOINT_TOL};
use crate::profile::{Profile, Regularity, SourceFn};
use crate::quadrature::QuadratureSpec;

/// Starting point of the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum InitialIterate {
    /// The linear solution with `F` frozen at `u = 0`.
    #[default]
    Linear,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PicardConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Window length; `None` picks one from the kernel envelope, `f64::INFINITY` disables windowing.
    pub window: Option<f64>,
    pub damping: f64,
    pub initial: InitialIterate,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            tol: 1e-10,
            max_iter: 200,
            window: None,
            damping: 1.0,
            initial: InitialIterate::Linear,
        }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidPicardConfig(format!(
                "tol = {} must be positive",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidPicardConfig("max_iter must be positive".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidPicardConfig(format!(
                "damping = {} outside (0, 1]",
                self.damping
            )));
        }
        if let Some(w) = self.window {
            if !(w > 0.0) {
                return Err(Error::InvalidPicardConfig(format!("window = {w} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowReport {
    pub t_start: f64,
    pub t_end: f64,
    pub iterations: usize,
    pub change_history: Vec<f64>,
    pub contraction_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardReport {
    /// Largest number of sweeps spent in one window.
    pub iterations: usize,
    pub final_change: f64,
    /// Changes of all windows in order.
    pub change_history: Vec<f64>,
    /// Largest fitted ratio over the windows.
    pub contraction_ratio: f64,
    /// Sup-norm defect of the integral equation over the whole horizon.
    pub residual: f64,
    pub converged: bool,
    pub window_length: f64,
    pub windows: Vec<WindowReport>,
}

impl PicardReport {
    /// `key: value` lines.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "iterations: {}", self.iterations);
        let _ = writeln!(s, "final_change: {:e}", self.final_change);
        let _ = writeln!(s, "contraction_ratio: {:e}", self.contraction_ratio);
        let _ = writeln!(s, "residual: {:e}", self.residual);
        let _ = writeln!(s, "converged: {}", self.converged);
        let _ = writeln!(s, "window_length: {:e}", self.window_length);
        let _ = writeln!(s, "windows: {}", self.windows.len());
        let hist: Vec<String> = self.change_history.iter().map(|c| format!("{c:e}")).collect();
        let _ = writeln!(s, "change_history: {}", hist.join(" "));
        s
    }
}

/// Fitted geometric ratio of the last (up to five) positive changes.
pub fn fitted_contraction_ratio(history: &[f64]) -> f64 {
    let tail: Vec<f64> = history.iter().rev().take(5).rev().copied().collect();
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .enumerate()
        .filter(|(_, c)| **c > 0.0)
        .map(|(k, c)| (k as f64, c.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    crate::decay::fit_line(&xs, &ys).slope.exp()
}

/// `F(x, t, u) = sin u - gamma`.
pub fn sine_gordon_source(gamma_bias: f64) -> SourceFn {
    SourceFn::nonlinear(move |_, _, u| u.sin() - gamma_bias, 1.0)
        .with_sup_bound(1.0 + gamma_bias.abs())
        .with_label(format!("sine-gordon(gamma={gamma_bias})"))
}

/// Initial data and source of one problem instance.
#[derive(Debug, Clone)]
pub struct ProblemData {
    pub h0: Profile,
    pub h1: Profile,
    pub source: SourceFn,
}

/// `sup_{x, xi, t} |G(x, xi, t)| e^{delta t}` bounded mode by mode on `[0, horizon]`.
pub fn kernel_envelope(ev: &GreenEvaluator, n_modes: usize, horizon: f64) -> f64 {
    let p = ev.params();
    let delta = decay_constants(p).delta;
    const SAMPLES: usize = 400;
    let sum: f64 = ev.modes()[..n_modes.min(ev.n_max())]
        .iter()
        .map(|m| {
            (0..=SAMPLES)
                .map(|k| {
                    let t = horizon * k as f64 / SAMPLES as f64;
                    mode_kernel_unchecked(m, t).value.abs() * (delta * t).exp()
                })
                .fold(0.0, f64::max)
        })
        .sum();
    2.0 / p.length() * (0.5 * p.lambda() * p.length()).exp() * sum
}

/// Window over which the integral map contracts by at least one half:
/// `min(horizon, 1 / (2 C_F l M))` with `M` from [`kernel_envelope`].
pub fn default_window(ev: &GreenEvaluator, q: &QuadratureSpec, source: &SourceFn, horizon: f64) -> f64 {
    let cf = source.lipschitz_const();
    if cf <= 0.0 {
        return horizon;
    }
    let envelope = kernel_envelope(ev, q.max_resolved_mode(), horizon);
    horizon.min(1.0 / (2.0 * cf * ev.params().length() * envelope))
}

struct Engine<'a> {
    basis: ModalBasis,
    source: &'a SourceFn,
    cache: StepCache,
}

/// One application of the integral map on a mesh slice.
struct Sweep {
    values: Vec<Vec<f64>>,
    rates: Vec<Vec<f64>>,
    nodal: Vec<Vec<f64>>,
}

impl Engine<'_> {
    fn forcing(&self, times: &[f64], nodal: Option<&[Vec<f64>]>) -> Vec<Vec<f64>> {
        let nodes = self.basis.nodes();
        par_map(times.len(), |k| {
            let vals: Vec<f64> = nodes
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let u = nodal.map_or(0.0, |n| n[k][i]);
                    -self.source.eval(x, times[k], u)
                })
                .collect();
            self.basis.project_values(&vals)
        })
    }

    fn sweep(&mut self, times: &[f64], y0: &[f64], yp0: &[f64], nodal: Option<&[Vec<f64>]>) -> Sweep {
        let forcing = self.forcing(times, nodal);
        let tr = propagate(self.basis.modes(), &mut self.cache, times, y0, yp0, Some(&forcing));
        let basis = &self.basis;
        let nodal = par_map(tr.values.len(), |k| basis.synthesize_nodes(&tr.values[k]));
        Sweep {
            values: tr.values,
            rates: tr.rates,
            nodal,
        }
    }
}

fn sup_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

fn mix(into: &mut [Vec<f64>], from: &[Vec<f64>], theta: f64) {
    for (r, s) in into.iter_mut().zip(from) {
        for (x, y) in r.iter_mut().zip(s) {
            *x = (1.0 - theta) * *x + theta * y;
        }
    }
}

fn check_data(h0: &Profile, h1: &Profile) -> Result<()> {
    if h0.regularity() < Regularity::C2 {
        return Err(Error::ProfileRegularityViolation(format!(
            "initial value `{}` declared {:?}, needs C2",
            h0.label(),
            h0.regularity()
        )));
    }
    for h in [h0, h1] {
        let (left, right) = h.endpoint_values();
        if left.abs() > ENDPOINT_TOL || right.abs() > ENDPOINT_TOL {
            return Err(Error::ProfileEndpointViolation {
                left: left.abs(),
                right: right.abs(),
            });
        }
    }
    Ok(())
}

/// Solves the semilinear problem on `grid`, marching over time windows.
///
/// Each window restarts from the exact mode amplitudes and rates reached at
/// the end of the previous one.
pub fn picard_solve(
    h0: &Profile,
    h1: &Profile,
    source: &SourceFn,
    ev: &GreenEvaluator,
    q: &QuadratureSpec,
    grid: &Grid,
    cfg: &PicardConfig,
) -> Result<(Field, PicardReport)> {
    cfg.validate()?;
    check_data(h0, h1)?;
    let basis = ModalBasis::new(ev, q)?;
    check_projection(ev, q, &|x| h0.eval(x))?;
    check_projection(ev, q, &|x| h1.eval(x))?;
    let c0 = basis.project(|x| h0.eval(x));
    let c1 = basis.project(|x| h1.eval(x));
    let mesh = TimeMesh::new(&grid.t, q.tau_points)?;
    let horizon = *mesh.times.last().unwrap();
    let window = match cfg.window {
        Some(w) => w,
        None => default_window(ev, q, source, horizon.max(f64::MIN_POSITIVE)),
    };

    let mut engine = Engine {
        basis,
        source,
        cache: StepCache::new(),
    };
    let n_modes = engine.basis.n_modes();
    let n_nodes = engine.basis.nodes().len();
    let len = mesh.len();
    let mut amplitudes = vec![Vec::new(); len];
    let mut nodal_all = vec![Vec::new(); len];
    amplitudes[0] = c0.clone();
    nodal_all[0] = engine.basis.synthesize_nodes(&c0);

    let mut y = c0.clone();
    let mut yp = c1.clone();
    let mut windows = Vec::new();
    let mut start = 0usize;
    while start + 1 < len || windows.is_empty() {
        let t0 = mesh.times[start];
        let mut end = start;
        while end + 1 < len && (end == start || mesh.times[end] < t0 + window * (1.0 - 1e-12)) {
            end += 1;
        }
        let times = &mesh.times[start..=end];

        let (mut vals, mut rates, mut nodal) = match cfg.initial {
            InitialIterate::Linear => {
                let s = engine.sweep(times, &y, &yp, None);
                (s.values, s.rates, s.nodal)
            }
            InitialIterate::Zero => {
                // Zero away from the window start, which is pinned by the restart state.
                let mut vals = vec![vec![0.0; n_modes]; times.len()];
                let mut rates = vec![vec![0.0; n_modes]; times.len()];
                let mut nodal = vec![vec![0.0; n_nodes]; times.len()];
                vals[0] = y.clone();
                rates[0] = yp.clone();
                nodal[0] = engine.basis.synthesize_nodes(&y);
                (vals, rates, nodal)
            }
        };

        let mut history = Vec::new();
        let mut converged = false;
        for _ in 0..cfg.max_iter {
            let s = engine.sweep(times, &y, &yp, Some(&nodal));
            // Fixed-point defect |T(u) - u|, not the damped step, so damping cannot stop early.
            let change = sup_diff(&s.nodal, &nodal);
            mix(&mut vals, &s.values, cfg.damping);
            mix(&mut rates, &s.rates, cfg.damping);
            mix(&mut nodal, &s.nodal, cfg.damping);
            history.push(change);
            if change <= cfg.tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                iterations: history.len(),
                last_change: *history.last().unwrap_or(&f64::NAN),
            });
        }

        let last = vals.len() - 1;
        y = vals[last].clone();
        yp = rates[last].clone();
        if y.iter().chain(&yp).any(|v| !v.is_finite()) {
            return Err(Error::WindowRestartFailure(mesh.times[end]));
        }
        for (k, idx) in (start..=end).enumerate() {
            amplitudes[idx] = std::mem::take(&mut vals[k]);
            nodal_all[idx] = std::mem::take(&mut nodal[k]);
        }
        windows.push(WindowReport {
            t_start: t0,
            t_end: mesh.times[end],
            iterations: history.len(),
            contraction_ratio: fitted_contraction_ratio(&history),
            change_history: history,
        });
        if end == start {
            break;
        }
        start = end;
    }

    let global = engine.sweep(&mesh.times, &c0, &c1, Some(&nodal_all));
    let residual = sup_diff(&global.nodal, &nodal_all);

    let table = engine.basis.synthesis_table(&grid.x);
    let mut field = Field::zeros(grid, Provenance::Picard);
    for (j, &idx) in mesh.marks.iter().enumerate() {
        for (i, v) in table.eval(&amplitudes[idx]).into_iter().enumerate() {
            field.set(i, j, v);
        }
    }

    let final_change = windows
        .iter()
        .map(|w| *w.change_history.last().unwrap())
        .fold(0.0, f64::max);
    let report = PicardReport {
        iterations: windows.iter().map(|w| w.iterations).max().unwrap_or(0),
        final_change,
        change_history: windows.iter().flat_map(|w| w.change_history.iter().copied()).collect(),
        contraction_ratio: windows.iter().map(|w| w.contraction_ratio).fold(0.0, f64::max),
        residual,
        converged: final_change <= cfg.tol && residual <= 10.0 * cfg.tol,
        window_length: window,
        windows,
    };
    Ok((field, report))
}

/// Sup-norm defect of the integral equation for a field sampled at the quadrature nodes.
///
/// The time axis must start at 0; between grid times `u` is interpolated linearly.
pub fn integral_residual(
    u: &Field,
    h0: &Profile,
    h1: &Profile,
    source: &SourceFn,
    ev: &GreenEvaluator,
    q: &QuadratureSpec,
) -> Result<f64> {
    let basis = ModalBasis::new(ev, q)?;
    let nodes = basis.nodes();
    let tol = 1e-12 * ev.params().length();
    if u.x_grid.len() != nodes.len() || u.x_grid.iter().zip(nodes).any(|(a, b)| (a - b).abs() > tol) {
        return Err(Error::GridMismatch(
            "residual needs the field sampled at the quadrature nodes".into(),
        ));
    }
    if u.t_grid[0].abs() > 1e-14 {
        return Err(Error::GridMismatch("residual needs a time axis starting at 0".into()));
    }
    let mesh = TimeMesh::new(&u.t_grid, q.tau_points)?;
    // nodal values on the mesh, linear in time between grid times
    let mut nodal = vec![Vec::new(); mesh.len()];
    nodal[0] = u.time_slice(0);
    for j in 0..u.nt() - 1 {
        let (ta, tb) = (u.t_grid[j], u.t_grid[j + 1]);
        let span = mesh.marks[j] + 1..=mesh.marks[j + 1];
        for (slot, &tk) in nodal[span.clone()].iter_mut().zip(&mesh.times[span]) {
            let w = (tk - ta) / (tb - ta);
            *slot = (0..u.nx())
                .map(|i| (1.0 - w) * u.get(i, j) + w * u.get(i, j + 1))
                .collect();
        }
    }
    let c0 = basis.project(|x| h0.eval(x));
    let c1 = basis.project(|x| h1.eval(x));
    let mut engine = Engine {
        basis,
        source,
        cache: StepCache::new(),
    };
    let s = engine.sweep(&mesh.times, &c0, &c1, Some(&nodal));
    let mut worst: f64 = 0.0;
    for (j, &k) in mesh.marks.iter().enumerate() {
        for i in 0..u.nx() {
            worst = worst.max((s.nodal[k][i] - u.get(i, j)).abs());
        }
    }
    Ok(worst)
}

/// Theorem-style a priori estimate checked against a computed field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub delta: f64,
    pub sup_f: f64,
    /// `(|h1|, |h0|, |h0''|)` in the sup norm.
    pub data_norms: (f64, f64, f64),
    pub fitted_k: f64,
    pub bound_satisfied: bool,
    /// `min_t (bound(t) - sup_x |u(., t)|)`.
    pub margin: f64,
}

impl BoundReport {
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "delta: {:e}", self.delta);
        let _ = writeln!(s, "sup_f: {:e}", self.sup_f);
        let _ = writeln!(s, "norm_h1: {:e}", self.data_norms.0);
        let _ = writeln!(s, "norm_h0: {:e}", self.data_norms.1);
        let _ = writeln!(s, "norm_h0_second: {:e}", self.data_norms.2);
        let _ = writeln!(s, "fitted_k: {:e}", self.fitted_k);
        let _ = writeln!(s, "bound_satisfied: {}", self.bound_satisfied);
        let _ = writeln!(s, "margin: {:e}", self.margin);
        s
    }

    /// Right-hand side of the estimate at time `t`.
    pub fn bound_at(&self, t: f64) -> f64 {
        let (a, b, c) = self.data_norms;
        (1.0 - (-self.delta * t).exp()) / self.delta * self.sup_f
            + self.fitted_k * (a + b + c) * (-self.delta * t).exp()
    }
}

/// `sup |h''|`, by central differences when no analytic derivative is attached.
fn second_derivative_norm(h: &Profile) -> f64 {
    if let Ok(v) = h.second_derivative_sup_norm() {
        return v;
    }
    const N: usize = 2048;
    let l = h.length();
    let dx = l / N as f64;
    (1..N)
        .map(|k| {
            let x = k as f64 * dx;
            ((h.eval(x + dx) - 2.0 * h.eval(x) + h.eval(x - dx)) / (dx * dx)).abs()
        })
        .fold(0.0, f64::max)
}

/// Fits `K` on the first three positive grid times, then checks
/// `sup_x |u| <= (1 - e^{-delta t}) / delta * sup_F + K (|h1| + |h0| + |h0''|) e^{-delta t}` at every grid time.
///
/// `sup_F` is the declared bound of the source when present, otherwise its
/// largest value along the field.
pub fn apriori_bound(u: &Field, data: &ProblemData, p: &Parameters) -> BoundReport {
    let delta = decay_constants(p).delta;
    let sup_f = data.source.sup_bound().unwrap_or_else(|| {
        let mut s: f64 = 0.0;
        for (i, &x) in u.x_grid.iter().enumerate() {
            for (j, &t) in u.t_grid.iter().enumerate() {
                s = s.max(data.source.eval(x, t, u.get(i, j)).abs());
            }
        }
        s
    });
    let norms = (data.h1.sup_norm(), data.h0.sup_norm(), second_derivative_norm(&data.h0));
    let total = norms.0 + norms.1 + norms.2;
    let sups = u.sup_in_space();
    let forced = |t: f64| (1.0 - (-delta * t).exp()) / delta * sup_f;
    let fitted_k = if total > 0.0 {
        u.t_grid
            .iter()
            .zip(&sups)
            .filter(|(t, _)| **t > 0.0)
            .take(3)
            .map(|(&t, &s)| (s - forced(t)) / (total * (-delta * t).exp()))
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    let mut report = BoundReport {
        delta,
        sup_f,
        data_norms: norms,
        fitted_k,
        bound_satisfied: true,
        margin: f64::INFINITY,
    };
    for (&t, &s) in u.t_grid.iter().zip(&sups) {
        let b = report.bound_at(t);
        report.margin = report.margin.min(b - s);
        if s > b + 1e-12 * b.max(1.0) {
            report.bound_satisfied = false;
        }
    }
    report
}

fn profile_distance(a: &Profile, b: &Profile) -> f64 {
    const N: usize = 2048;
    let l = a.length();
    (0..=N)
        .map(|k| {
            let x = l * k as f64 / N as f64;
            (a.eval(x) - b.eval(x)).abs()
        })
        .fold(0.0, f64::max)
}

/// `|u1 - u2| / (|h0 - g0| + |h1 - g1| + |F1 - F2|)` in sup norms.
///
/// The source difference is taken along both fields.
pub fn continuous_dependence_ratio(run1: (&ProblemData, &Field), run2: (&ProblemData, &Field)) -> Result<f64> {
    let (d1, u1) = run1;
    let (d2, u2) = run2;
    let numerator = u1.max_abs_diff(u2)?;
    let mut source_gap: f64 = 0.0;
    for (i, &x) in u1.x_grid.iter().enumerate() {
        for (j, &t) in u1.t_grid.iter().enumerate() {
            for u in [u1.get(i, j), u2.get(i, j)] {
                source_gap = source_gap.max((d1.source.eval(x, t, u) - d2.source.eval(x, t, u)).abs());
            }
        }
    }
    let denominator = profile_distance(&d1.h0, &d2.h0) + profile_distance(&d1.h1, &d2.h1) + source_gap;
    if denominator < 1e-14 {
        return Err(Error::ZeroPerturbation(denominator));
    }
    Ok(numerator / denominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::WeightMode;
    use crate::linear::linear_solve;
    use std::f64::consts::PI;

    fn setup(horizon: f64) -> (Parameters, GreenEvaluator, QuadratureSpec) {
        let p = Parameters::new(1.0, 1.0, 0.0, PI, horizon).unwrap();
        let ev = GreenEvaluator::fixed(p, 64, WeightMode::SelfAdjoint);
        let q = QuadratureSpec::new(64, 50, Default::default()).unwrap();
        (p, ev, q)
    }

    #[test]
    fn sine_gordon_values() {
        let f = sine_gordon_source(0.5);
        assert_eq!(sine_gordon_source(0.0).eval(0.3, 0.1, 0.0), 0.0);
        assert!((f.eval(0.0, 0.0, PI / 2.0) - 0.5).abs() < 1e-15);
        assert!(f.check_lipschitz(PI, 1.0, 10.0, 1000, 7).is_ok());
    }

    #[test]
    fn config_validation() {
        let bad = PicardConfig {
            damping: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = PicardConfig {
            tol: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(PicardConfig::default().validate().is_ok());
    }

    #[test]
    fn zero_source_converges_in_one_sweep() {
        let (_, ev, _) = setup(1.0);
        let q = QuadratureSpec::default();
        let grid = Grid::uniform(PI, 9, 1.0, 11);
        let h0 = Profile::bump(PI, 0.5, 3);
        let h1 = Profile::sine_mode(PI, 2, 0.2);
        let (u, rep) = picard_solve(&h0, &h1, &SourceFn::zero(), &ev, &q, &grid, &PicardConfig::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        let lin = linear_solve(&h0, &h1, &SourceFn::zero(), &ev, &q, &grid).unwrap();
        assert!(u.max_abs_diff(&lin).unwrap() < 1e-12);
    }

    #[test]
    fn windows_and_initial_iterates_agree() {
        let (_, ev, q) = setup(2.0);
        let grid = Grid::uniform(PI, 9, 2.0, 21);
        let h0 = Profile::sine_mode(PI, 1, 0.5);
        let h1 = Profile::zero(PI);
        let f = sine_gordon_source(0.3);
        let base = PicardConfig {
            tol: 1e-11,
            ..Default::default()
        };
        let (a, ra) = picard_solve(&h0, &h1, &f, &ev, &q, &grid, &base).unwrap();
        let whole = PicardConfig {
            window: Some(f64::INFINITY),
            ..base
        };
        let (b, _) = picard_solve(&h0, &h1, &f, &ev, &q, &grid, &whole).unwrap();
        let zero = PicardConfig {
            initial: InitialIterate::Zero,
            ..base
        };
        let (c, _) = picard_solve(&h0, &h1, &f, &ev, &q, &grid, &zero).unwrap();
        assert!(ra.converged && ra.windows.len() > 1);
        assert!(a.max_abs_diff(&b).unwrap() < 1e-9);
        assert!(a.max_abs_diff(&c).unwrap() < 1e-9);
    }

    #[test]
    fn zero_perturbation_is_an_error() {
        let grid = Grid::uniform(PI, 5, 1.0, 3);
        let u = Field::zeros(&grid, Provenance::Picard);
        let d = ProblemData {
            h0: Profile::zero(PI),
            h1: Profile::zero(PI),
            source: SourceFn::zero(),
        };
        assert!(matches!(
            continuous_dependence_ratio((&d, &u), (&d, &u)),
            Err(Error::ZeroPerturbation(_))
        ));
    }

    #[test]
    fn trivial_bound() {
        let (p, _, _) = setup(1.0);
        let grid = Grid::uniform(PI, 5, 1.0, 5);
        let u = Field::zeros(&grid, Provenance::Picard);
        let d = ProblemData {
            h0: Profile::zero(PI),
            h1: Profile::zero(PI),
            source: SourceFn::zero(),
        };
        let r = apriori_bound(&u, &d, &p);
        assert!(r.bound_satisfied);
        assert_eq!(r.margin, 0.0);
        assert!(r.to_key_value().contains("bound_satisfied: true"));
    }

    #[test]
    fn contraction_ratio_fit() {
        let h: Vec<f64> = (0..8).map(|k| 0.3f64.powi(k)).collect();
        assert!((fitted_contraction_ratio(&h) - 0.3).abs() < 1e-12);
        assert_eq!(fitted_contraction_ratio(&[1.0, 0.0]), 0.0);
    }
}
