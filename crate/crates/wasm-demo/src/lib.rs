//! Browser bindings: Green-function profiles, the mode spectrum, and a small
//! sine-Gordon run. The plain functions are usable natively; the
//! `#[wasm_bindgen]` wrappers only convert errors.

use esjj::{
    decay_constants, mode_params, picard_solve, sine_gordon_source, Branch, GreenEvaluator, Grid, Parameters,
    PicardConfig, Profile, QuadratureSpec, WeightMode,
};
use wasm_bindgen::prelude::*;

/// Upper limit on modes and grid sizes accepted from the page.
pub const MAX_SIZE: usize = 512;

fn weight(self_adjoint: bool) -> WeightMode {
    if self_adjoint {
        WeightMode::SelfAdjoint
    } else {
        WeightMode::ObserverOnly
    }
}

fn check_size(name: &str, n: usize, min: usize) -> Result<(), String> {
    if (min..=MAX_SIZE).contains(&n) {
        Ok(())
    } else {
        Err(format!("{name} must lie in [{min}, {MAX_SIZE}], got {n}"))
    }
}

/// `G(x, xi, t)` at `points` equally spaced `x` in `[0, l]`.
pub fn green_profile_values(
    p: Parameters,
    xi: f64,
    t: f64,
    points: usize,
    self_adjoint: bool,
) -> Result<Vec<f64>, String> {
    check_size("points", points, 2)?;
    let ev = GreenEvaluator::with_default_truncation(p, weight(self_adjoint));
    let l = p.length();
    (0..points)
        .map(|k| ev.green_eval(l * k as f64 / (points - 1) as f64, xi, t))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())
}

/// Per mode `n = 1..=n_max`: `[b_n, g_n, g_n^2 - b_n, branch]`, branch 0 hyperbolic,
/// 1 circular, 2 degenerate; flattened.
pub fn spectrum_values(p: Parameters, n_max: usize) -> Result<Vec<f64>, String> {
    check_size("n_max", n_max, 1)?;
    Ok((1..=n_max)
        .flat_map(|n| {
            let m = mode_params(n, &p);
            let code = match m.branch {
                Branch::Hyperbolic => 0.0,
                Branch::Circular => 1.0,
                Branch::Degenerate => 2.0,
            };
            [m.b_n, m.g_n, m.omega_sq, code]
        })
        .collect())
}

/// Picard solution of `F = sin u - gamma` from a bump of the given amplitude.
pub struct SineGordonRun {
    /// `values[j * nx + i] = u(x_i, t_j)`.
    pub values: Vec<f64>,
    pub nx: usize,
    pub nt: usize,
    pub contraction_ratio: f64,
    pub iterations: usize,
    pub residual: f64,
}

pub fn run_sine_gordon(
    p: Parameters,
    gamma: f64,
    amplitude: f64,
    nx: usize,
    nt: usize,
) -> Result<SineGordonRun, String> {
    check_size("nx", nx, 3)?;
    check_size("nt", nt, 2)?;
    let l = p.length();
    let ev = GreenEvaluator::with_default_truncation(p, WeightMode::SelfAdjoint);
    let q = QuadratureSpec {
        xi_points: 128,
        tau_points: 50,
        ..QuadratureSpec::default()
    };
    let grid = Grid::uniform(l, nx, p.horizon(), nt);
    let h0 = Profile::bump(l, amplitude, 3);
    let h1 = Profile::zero(l);
    let cfg = PicardConfig {
        tol: 1e-9,
        ..PicardConfig::default()
    };
    let (u, rep) =
        picard_solve(&h0, &h1, &sine_gordon_source(gamma), &ev, &q, &grid, &cfg).map_err(|e| e.to_string())?;
    let mut values = Vec::with_capacity(nx * nt);
    for j in 0..nt {
        values.extend(u.time_slice(j));
    }
    Ok(SineGordonRun {
        values,
        nx,
        nt,
        contraction_ratio: rep.contraction_ratio,
        iterations: rep.iterations,
        residual: rep.residual,
    })
}

fn params(alpha: f64, epsilon: f64, lambda: f64, length: f64, horizon: f64) -> Result<Parameters, JsError> {
    Parameters::new(alpha, epsilon, lambda, length, horizon).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = greenProfile)]
#[allow(clippy::too_many_arguments)]
pub fn green_profile(
    alpha: f64,
    epsilon: f64,
    lambda: f64,
    length: f64,
    xi: f64,
    t: f64,
    points: usize,
    self_adjoint: bool,
) -> Result<Vec<f64>, JsError> {
    let p = params(alpha, epsilon, lambda, length, t.max(1.0))?;
    green_profile_values(p, xi, t, points, self_adjoint).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = modeSpectrum)]
pub fn mode_spectrum(alpha: f64, epsilon: f64, lambda: f64, length: f64, n_max: usize) -> Result<Vec<f64>, JsError> {
    let p = params(alpha, epsilon, lambda, length, 1.0)?;
    spectrum_values(p, n_max).map_err(|e| JsError::new(&e))
}

/// `[delta, p_lambda, q_lambda]`.
#[wasm_bindgen(js_name = decayConstants)]
pub fn decay_constants_js(alpha: f64, epsilon: f64, lambda: f64, length: f64) -> Result<Vec<f64>, JsError> {
    let d = decay_constants(&params(alpha, epsilon, lambda, length, 1.0)?);
    Ok(vec![d.delta, d.p_lambda, d.q_lambda])
}

#[wasm_bindgen]
pub struct SineGordonField {
    run: SineGordonRun,
}

#[wasm_bindgen]
impl SineGordonField {
    #[wasm_bindgen(constructor)]
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alpha: f64,
        epsilon: f64,
        lambda: f64,
        length: f64,
        horizon: f64,
        gamma: f64,
        amplitude: f64,
        nx: usize,
        nt: usize,
    ) -> Result<SineGordonField, JsError> {
        let p = params(alpha, epsilon, lambda, length, horizon)?;
        let run = run_sine_gordon(p, gamma, amplitude, nx, nt).map_err(|e| JsError::new(&e))?;
        Ok(SineGordonField { run })
    }

    pub fn values(&self) -> Vec<f64> {
        self.run.values.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn nx(&self) -> usize {
        self.run.nx
    }

    #[wasm_bindgen(getter)]
    pub fn nt(&self) -> usize {
        self.run.nt
    }

    #[wasm_bindgen(getter, js_name = contractionRatio)]
    pub fn contraction_ratio(&self) -> f64 {
        self.run.contraction_ratio
    }

    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.run.iterations
    }

    #[wasm_bindgen(getter)]
    pub fn residual(&self) -> f64 {
        self.run.residual
    }
}
