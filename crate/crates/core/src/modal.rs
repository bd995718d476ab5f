//! Projection onto the sine modes and exact per-mode time stepping.
//!
//! A field is represented by amplitudes `y_n(t)` with
//! `u(x, t) = exp(lambda x / 2) sum_n y_n(t) sin(gamma_n x)`.
//! Each amplitude solves `y'' + 2 g_n y' + b_n y = r_n(t)`; over a step the
//! forcing `r_n` is taken linear in time and the step is integrated exactly,
//! which is the product trapezoid rule for the Volterra convolution.

use crate::error::{Error, Result};
use crate::kernel::{mode_kernel_unchecked, GreenEvaluator, WeightMode};
use crate::model::ModeData;
use crate::quadrature::QuadratureSpec;

/// Relative tolerance of the doubled-resolution projection check.
pub const PROJECTION_TOL: f64 = 1e-5;

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Mode set and quadrature tables for one evaluator and one spatial rule.
#[derive(Debug, Clone)]
pub struct ModalBasis {
    modes: Vec<ModeData>,
    nodes: Vec<f64>,
    /// `proj[n * K + k] = (2/l) w_k s(xi_k) sin(gamma_n xi_k)`.
    proj: Vec<f64>,
    /// `synth[k * N + n] = exp(lambda xi_k / 2) sin(gamma_n xi_k)`.
    synth: Vec<f64>,
    half_lambda: f64,
    weight: WeightMode,
}

impl ModalBasis {
    /// Uses `min(n_max, xi_points / 2)` modes so the rule resolves every product of modes.
    pub fn new(ev: &GreenEvaluator, q: &QuadratureSpec) -> Result<Self> {
        q.validate()?;
        let p = ev.params();
        let n = ev.n_max().min(q.max_resolved_mode()).max(1);
        let modes = ev.modes()[..n].to_vec();
        let (nodes, weights) = q.nodes_weights(p.length());
        let k = nodes.len();
        let lambda = p.lambda();
        let weight = ev.weight();
        let scale = 2.0 / p.length();
        let mut proj = vec![0.0; n * k];
        let mut synth = vec![0.0; k * n];
        for (j, (&xi, &w)) in nodes.iter().zip(&weights).enumerate() {
            let pre = scale * w * weight.source_factor(lambda, xi);
            let obs = (0.5 * lambda * xi).exp();
            for (i, m) in modes.iter().enumerate() {
                let s = (m.gamma_n * xi).sin();
                proj[i * k + j] = pre * s;
                synth[j * n + i] = obs * s;
            }
        }
        Ok(ModalBasis {
            modes,
            nodes,
            proj,
            synth,
            half_lambda: 0.5 * lambda,
            weight,
        })
    }

    pub fn modes(&self) -> &[ModeData] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weight(&self) -> WeightMode {
        self.weight
    }

    /// Mode coefficients of values sampled at the quadrature nodes.
    pub fn project_values(&self, values: &[f64]) -> Vec<f64> {
        let k = self.nodes.len();
        assert_eq!(values.len(), k);
        (0..self.modes.len())
            .map(|i| {
                let row = &self.proj[i * k..(i + 1) * k];
                row.iter().zip(values).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    pub fn project(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let values: Vec<f64> = self.nodes.iter().map(|&x| f(x)).collect();
        self.project_values(&values)
    }

    /// Field values at the quadrature nodes.
    pub fn synthesize_nodes(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = self.modes.len();
        (0..self.nodes.len())
            .map(|j| {
                let row = &self.synth[j * n..(j + 1) * n];
                row.iter().zip(coeffs).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// Trigonometric table for synthesis at arbitrary points.
    pub fn synthesis_table(&self, xs: &[f64]) -> SynthesisTable {
        let n = self.modes.len();
        let mut rows = vec![0.0; xs.len() * n];
        for (j, &x) in xs.iter().enumerate() {
            let obs = (self.half_lambda * x).exp();
            for (i, m) in self.modes.iter().enumerate() {
                rows[j * n + i] = obs * (m.gamma_n * x).sin();
            }
        }
        SynthesisTable { n, rows }
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisTable {
    n: usize,
    rows: Vec<f64>,
}

impl SynthesisTable {
    pub fn eval(&self, coeffs: &[f64]) -> Vec<f64> {
        self.rows
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(coeffs).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Compares the coefficients of the retained modes against a doubled-resolution projection.
pub fn check_projection(ev: &GreenEvaluator, q: &QuadratureSpec, f: &(dyn Fn(f64) -> f64 + Sync)) -> Result<()> {
    let coarse = ModalBasis::new(ev, q)?;
    let fine = ModalBasis::new(ev, &q.doubled())?;
    let a = coarse.project(f);
    let b = fine.project(f);
    let diff: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
    let scale: f64 = b.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
    let estimate = diff / scale;
    if estimate > PROJECTION_TOL {
        return Err(Error::QuadratureUnderResolved {
            estimate,
            tolerance: PROJECTION_TOL,
        });
    }
    Ok(())
}

/// Exact one-step propagator of a single mode over a step of length `h`.
#[derive(Debug, Clone, Copy)]
pub struct ModeStep {
    pub h: f64,
    b: f64,
    two_g: f64,
    /// `G_n(h)`, `G_n'(h)` and `G_n'(h) + 2 g_n G_n(h)`.
    kernel: f64,
    kernel_dt: f64,
    restoring: f64,
}

impl ModeStep {
    pub fn new(m: &ModeData, h: f64) -> Self {
        let k = mode_kernel_unchecked(m, h);
        ModeStep {
            h,
            b: m.b_n,
            two_g: 2.0 * m.g_n,
            kernel: k.value,
            kernel_dt: k.dt,
            restoring: k.cosh_part + m.g_n * k.value,
        }
    }

    /// Advances `(y, y')` under forcing varying linearly from `r0` to `r1`.
    #[inline]
    pub fn advance(&self, y: f64, yp: f64, r0: f64, r1: f64) -> (f64, f64) {
        let slope = (r1 - r0) / self.h;
        let lin = slope / self.b;
        let cst = (r0 - self.two_g * lin) / self.b;
        let z = y - cst;
        let zp = yp - lin;
        let y1 = z * self.restoring + zp * self.kernel + cst + lin * self.h;
        let yp1 = -self.b * z * self.kernel + zp * self.kernel_dt + lin;
        (y1, yp1)
    }
}

/// Per-mode steppers for the distinct step lengths of a time mesh.
#[derive(Debug, Clone)]
pub struct StepCache {
    entries: Vec<(f64, Vec<ModeStep>)>,
}

impl StepCache {
    pub fn new() -> Self {
        StepCache { entries: Vec::new() }
    }

    pub fn get(&mut self, modes: &[ModeData], h: f64) -> &[ModeStep] {
        let tol = 1e-13 * h.abs().max(1e-300);
        let pos = self.entries.iter().position(|(k, _)| (k - h).abs() <= tol);
        let idx = match pos {
            Some(i) => i,
            None => {
                self.entries
                    .push((h, modes.iter().map(|m| ModeStep::new(m, h)).collect()));
                self.entries.len() - 1
            }
        };
        &self.entries[idx].1
    }
}

impl Default for StepCache {
    fn default() -> Self {
        Self::new()
    }
}

/// Time mesh refining a set of output times to at most `1 / tau_points` per step.
///
/// Always starts at 0. `marks[j]` is the mesh index of output time `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeMesh {
    pub times: Vec<f64>,
    pub marks: Vec<usize>,
}

impl TimeMesh {
    pub fn new(outputs: &[f64], tau_points: usize) -> Result<Self> {
        if let Some(&t) = outputs.iter().find(|t| **t < 0.0) {
            return Err(Error::NegativeTime(t));
        }
        let mut times = vec![0.0];
        let mut marks = Vec::with_capacity(outputs.len());
        for &t in outputs {
            let last = *times.last().unwrap();
            let span = t - last;
            if span > 0.0 {
                let steps = (span * tau_points as f64 - 1e-9).ceil().max(1.0) as usize;
                for s in 1..steps {
                    times.push(last + span * s as f64 / steps as f64);
                }
                times.push(t);
            } else if span < 0.0 {
                return Err(Error::GridMismatch("output times must be increasing".into()));
            }
            marks.push(times.len() - 1);
        }
        Ok(TimeMesh { times, marks })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Amplitudes and their rates at every mesh time.
#[derive(Debug, Clone)]
pub struct ModalTrajectory {
    /// `values[k][n]`.
    pub values: Vec<Vec<f64>>,
    pub rates: Vec<Vec<f64>>,
}

/// Integrates all modes over `times[start..=end]` from `(y0, yp0)`.
///
/// `forcing[k][n]` is the right-hand side `r_n` at `times[start + k]`.
pub fn propagate(
    modes: &[ModeData],
    cache: &mut StepCache,
    times: &[f64],
    y0: &[f64],
    yp0: &[f64],
    forcing: Option<&[Vec<f64>]>,
) -> ModalTrajectory {
    let n = modes.len();
    let mut values = Vec::with_capacity(times.len());
    let mut rates = Vec::with_capacity(times.len());
    values.push(y0.to_vec());
    rates.push(yp0.to_vec());
    let zero = vec![0.0; n];
    for k in 1..times.len() {
        let h = times[k] - times[k - 1];
        let steps = cache.get(modes, h);
        let (r0, r1) = match forcing {
            Some(f) => (&f[k - 1][..], &f[k][..]),
            None => (&zero[..], &zero[..]),
        };
        let prev_y = &values[k - 1];
        let prev_p = &rates[k - 1];
        let mut y = vec![0.0; n];
        let mut yp = vec![0.0; n];
        for i in 0..n {
            let (a, b) = steps[i].advance(prev_y[i], prev_p[i], r0[i], r1[i]);
            y[i] = a;
            yp[i] = b;
        }
        values.push(y);
        rates.push(yp);
    }
    ModalTrajectory { values, rates }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{mode_params, Parameters};
    use crate::quadrature::QuadratureRule;
    use std::f64::consts::PI;

    #[test]
    fn projection_and_synthesis_are_inverse_on_modes() {
        let p = Parameters::new(0.7, 0.3, 0.5, 2.0, 1.0).unwrap();
        let ev = GreenEvaluator::fixed(p, 64, WeightMode::SelfAdjoint);
        let q = QuadratureSpec::new(128, 10, QuadratureRule::CompositeSimpson).unwrap();
        let basis = ModalBasis::new(&ev, &q).unwrap();
        assert_eq!(basis.n_modes(), 64);
        let g3 = 3.0 * PI / 2.0;
        let c = basis.project(|x| (0.25 * x).exp() * (g3 * x).sin());
        for (i, v) in c.iter().enumerate() {
            let expect = if i == 2 { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-7, "mode {} -> {v}", i + 1);
        }
        let back = basis.synthesize_nodes(&c);
        for (x, v) in basis.nodes().iter().zip(back) {
            assert!((v - (0.25 * x).exp() * (g3 * x).sin()).abs() < 1e-6);
        }
    }

    #[test]
    fn step_reproduces_homogeneous_kernel() {
        let p = Parameters::new(0.4, 0.2, 0.0, PI, 1.0).unwrap();
        for n in [1, 3, 20] {
            let m = mode_params(n, &p);
            let (y, yp) = ModeStep::new(&m, 0.3).advance(0.0, 1.0, 0.0, 0.0);
            let k = mode_kernel_unchecked(&m, 0.3);
            assert!((y - k.value).abs() < 1e-14);
            assert!((yp - k.dt).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_forcing_reaches_equilibrium() {
        let p = Parameters::new(1.0, 1.0, 0.0, PI, 1.0).unwrap();
        let m = mode_params(2, &p);
        let mut cache = StepCache::new();
        let times: Vec<f64> = (0..=400).map(|k| k as f64 * 0.1).collect();
        let forcing = vec![vec![-3.0]; times.len()];
        let tr = propagate(&[m], &mut cache, &times, &[0.0], &[0.0], Some(&forcing));
        assert!((tr.values.last().unwrap()[0] + 3.0 / m.b_n).abs() < 1e-12);
    }

    #[test]
    fn linear_forcing_is_integrated_exactly() {
        // y'' + 2 y' + y = t has the solution y = t - 2 + (2 + t) exp(-t).
        let p = Parameters::new(1.0, 1.0, 0.0, PI, 1.0).unwrap();
        let m = mode_params(1, &p);
        let mut cache = StepCache::new();
        let times = [0.0, 0.5, 1.7];
        let forcing: Vec<Vec<f64>> = times.iter().map(|&t| vec![t]).collect();
        let tr = propagate(&[m], &mut cache, &times, &[0.0], &[0.0], Some(&forcing));
        let t = 1.7f64;
        assert!((tr.values[2][0] - (t - 2.0 + (2.0 + t) * (-t).exp())).abs() < 1e-13);
    }

    #[test]
    fn mesh_hits_outputs() {
        let mesh = TimeMesh::new(&[0.0, 0.25, 1.0], 10).unwrap();
        assert_eq!(mesh.marks, vec![0, 3, 11]);
        assert_eq!(mesh.times[mesh.marks[2]], 1.0);
        let dense = TimeMesh::new(&[0.1, 0.2, 0.3], 10).unwrap();
        assert_eq!(dense.len(), 4);
    }
}
