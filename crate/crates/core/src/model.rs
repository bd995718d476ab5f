//! Problem parameters and per-mode spectral data.
//!
//! The operator acting on `u(x, t)` over the strip `0 < x < l` is
//!
//! ```text
//! (d_xx - lambda d_x)(eps u_t + u) - d_t(u_t + alpha u)
//! ```
//!
//! Separating variables with the eigenfunctions `exp(lambda x / 2) sin(gamma_n x)`
//! of `d_xx - lambda d_x` (eigenvalue `-b_n`) turns every Fourier mode into the
//! damped oscillator `y'' + 2 g_n y' + b_n y = forcing`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative width of the band in which a mode is treated as a double root.
pub const DEGENERATE_REL_TOL: f64 = 1e-10;

/// Absolute tolerance for the vanishing of profiles at the strip ends.
pub const ENDPOINT_TOL: f64 = 1e-9;

/// Absolute tolerance for boundary values of solver-produced fields.
pub const BOUNDARY_TOL: f64 = 1e-7;

/// Unvalidated parameter tuple, as read from a configuration file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub alpha: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub length: f64,
    pub horizon: f64,
}

/// Whether `alpha * epsilon` is below one, the physically common regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Subcritical,
    Supercritical,
}

/// Validated physical and geometric constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Parameters {
    alpha: f64,
    epsilon: f64,
    lambda: f64,
    length: f64,
    horizon: f64,
}

impl Parameters {
    pub fn new(alpha: f64, epsilon: f64, lambda: f64, length: f64, horizon: f64) -> Result<Self> {
        validate_params(RawParams {
            alpha,
            epsilon,
            lambda,
            length,
            horizon,
        })
    }

    /// Dissipation across the junction.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Dissipation along the junction.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Taper constant.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Strip width `l`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Final time `T`.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn regime(&self) -> Regime {
        if self.alpha * self.epsilon < 1.0 {
            Regime::Subcritical
        } else {
            Regime::Supercritical
        }
    }

    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        Parameters::new(self.alpha, self.epsilon, self.lambda, self.length, horizon)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Parameters::new(self.alpha, self.epsilon, lambda, self.length, self.horizon)
    }

    pub fn raw(&self) -> RawParams {
        RawParams {
            alpha: self.alpha,
            epsilon: self.epsilon,
            lambda: self.lambda,
            length: self.length,
            horizon: self.horizon,
        }
    }
}

pub fn validate_params(raw: RawParams) -> Result<Parameters> {
    let fields = [
        ("alpha", raw.alpha),
        ("epsilon", raw.epsilon),
        ("lambda", raw.lambda),
        ("length", raw.length),
        ("horizon", raw.horizon),
    ];
    for (name, value) in fields {
        if !value.is_finite() {
            return Err(Error::NonFinite(name));
        }
    }
    for (name, value) in fields {
        if name != "lambda" && value <= 0.0 {
            return Err(Error::NonPositive(name));
        }
    }
    if raw.lambda < 0.0 {
        return Err(Error::NegativeTaper);
    }
    Ok(Parameters {
        alpha: raw.alpha,
        epsilon: raw.epsilon,
        lambda: raw.lambda,
        length: raw.length,
        horizon: raw.horizon,
    })
}

/// Shape of the mode kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// Real frequency, `sinh` kernel.
    Hyperbolic,
    /// Imaginary frequency, `sin` kernel.
    Circular,
    /// Double root of the characteristic polynomial.
    Degenerate,
}

/// Spectral quantities of the `n`-th Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeData {
    pub n: usize,
    pub gamma_n: f64,
    pub b_n: f64,
    pub g_n: f64,
    /// `g_n^2 - b_n`, signed.
    pub omega_sq: f64,
    pub branch: Branch,
}

impl ModeData {
    /// `|omega_sq|^(1/2)`.
    pub fn omega_abs(&self) -> f64 {
        self.omega_sq.abs().sqrt()
    }

    /// `g_n - omega_n` on the hyperbolic branch, evaluated without cancellation.
    pub(crate) fn slow_rate(&self) -> f64 {
        self.b_n / (self.g_n + self.omega_abs())
    }
}

pub fn degenerate_tolerance(g_n: f64) -> f64 {
    DEGENERATE_REL_TOL * (g_n * g_n).max(1.0)
}

pub fn mode_params(n: usize, p: &Parameters) -> ModeData {
    assert!(n >= 1, "mode index starts at 1");
    let gamma_n = n as f64 * PI / p.length;
    let b_n = gamma_n * gamma_n + p.lambda * p.lambda / 4.0;
    let g_n = (p.alpha + p.epsilon * b_n) / 2.0;
    let omega_sq = g_n * g_n - b_n;
    let tol = degenerate_tolerance(g_n);
    let branch = if omega_sq > tol {
        Branch::Hyperbolic
    } else if omega_sq < -tol {
        Branch::Circular
    } else {
        Branch::Degenerate
    };
    ModeData {
        n,
        gamma_n,
        b_n,
        g_n,
        omega_sq,
        branch,
    }
}

/// Uniform decay constants of the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayConstants {
    pub a_lambda: f64,
    pub p_lambda: f64,
    pub q_lambda: f64,
    pub delta: f64,
}

pub fn decay_constants(p: &Parameters) -> DecayConstants {
    let a_lambda = p.alpha + p.epsilon * p.lambda * p.lambda / 4.0;
    let pi2 = PI * PI;
    let p_lambda = pi2 / (p.epsilon * pi2 + a_lambda * p.length * p.length);
    let k1 = PI / p.length;
    let q_lambda = (a_lambda + p.epsilon * k1 * k1) / 2.0;
    DecayConstants {
        a_lambda,
        p_lambda,
        q_lambda,
        delta: p_lambda.min(q_lambda),
    }
}

/// Real mode-index thresholds bounding the circular band.
///
/// For `alpha * epsilon <= 1` the modes with `lower < n < upper` are circular.
/// `lower` is zero when the inner bracket is negative (no low hyperbolic band).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircularBand {
    pub lower: f64,
    pub upper: f64,
}

/// Thresholds where `g_n^2 = b_n`, i.e. `b = (1 -+ sqrt(1 - alpha eps))^2 / eps^2`.
///
/// Returns `None` when every mode is hyperbolic.
pub fn circular_band(p: &Parameters) -> Option<CircularBand> {
    let ae = p.alpha * p.epsilon;
    if ae > 1.0 {
        return None;
    }
    let root = (1.0 - ae).sqrt();
    let eps_lam = p.epsilon * p.lambda;
    let index = |sign: f64| -> Option<f64> {
        let s = 1.0 + sign * root;
        let bracket = 4.0 * s * s - eps_lam * eps_lam;
        (bracket >= 0.0).then(|| p.length / (2.0 * p.epsilon * PI) * bracket.sqrt())
    };
    let upper = index(1.0)?;
    let lower = index(-1.0).unwrap_or(0.0);
    Some(CircularBand { lower, upper })
}

pub fn classify_modes(p: &Parameters, n_max: usize) -> Vec<(usize, Branch)> {
    (1..=n_max).map(|n| (n, mode_params(n, p).branch)).collect()
}
