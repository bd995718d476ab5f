//! Fourier-series Green function of the strip problem.
//!
//! ```text
//! G(x, xi, t) = (2/l) W(x, xi) sum_n G_n(t) sin(gamma_n xi) sin(gamma_n x)
//! G_n(t)      = exp(-g_n t) sinh(omega_n t) / omega_n
//! ```
//!
//! Mode kernels are evaluated in a split form that stays finite and accurate
//! for stiff modes (`g_n t` large) and near the double root (`omega_n -> 0`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{mode_params, Branch, ModeData, Parameters};
use crate::sum::CompensatedSum;

/// Hard cap on the number of modes any evaluator will carry.
pub const MAX_MODES: usize = 4096;
/// Mode count used for pointwise evaluations when no tail tolerance applies.
pub const DEFAULT_FIXED_MODES: usize = 512;
/// Tail tolerance tried first by [`GreenEvaluator::with_default_truncation`].
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;
/// Earliest time covered by the default tail tolerance.
pub const DEFAULT_TAIL_T_MIN: f64 = 0.1;

/// Exponential prefactor in front of the mode sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum WeightMode {
    /// `exp(lambda (x - xi) / 2)`: expansion in the eigenfunctions of the
    /// tapered operator, orthogonal under the weight `exp(-lambda x)`.
    #[default]
    SelfAdjoint,
    /// `exp(lambda x / 2)` only, with no compensating factor in `xi`.
    ObserverOnly,
}

impl WeightMode {
    #[inline]
    pub fn factor(self, lambda: f64, x: f64, xi: f64) -> f64 {
        match self {
            WeightMode::SelfAdjoint => (0.5 * lambda * (x - xi)).exp(),
            WeightMode::ObserverOnly => (0.5 * lambda * x).exp(),
        }
    }

    /// Weight applied to data at `xi` before projecting onto `sin(gamma_n xi)`.
    #[inline]
    pub fn source_factor(self, lambda: f64, xi: f64) -> f64 {
        match self {
            WeightMode::SelfAdjoint => (-0.5 * lambda * xi).exp(),
            WeightMode::ObserverOnly => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TruncationPolicy {
    FixedN(usize),
    TailTol(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncation {
    pub n_max: usize,
    /// Bound on the discarded tail for `t >= t_min`; infinite when `t_min = 0`.
    pub tail_bound: f64,
    pub t_min: f64,
    pub policy: TruncationPolicy,
}

impl Truncation {
    pub fn resolve(p: &Parameters, policy: TruncationPolicy, t_min: f64) -> Result<Self> {
        match policy {
            TruncationPolicy::FixedN(n) => {
                let n_max = n.clamp(1, MAX_MODES);
                let tail_bound = if t_min > 0.0 {
                    truncation_tail_bound(p, t_min, n_max + 1)?
                } else {
                    f64::INFINITY
                };
                Ok(Truncation {
                    n_max,
                    tail_bound,
                    t_min,
                    policy,
                })
            }
            TruncationPolicy::TailTol(tol) => {
                if t_min <= 0.0 {
                    return Err(Error::NeedPositiveTime(t_min));
                }
                // The bound is nonincreasing in n, so bisect on [1, MAX_MODES].
                let at_cap = truncation_tail_bound(p, t_min, MAX_MODES + 1)?;
                if at_cap > tol {
                    return Err(Error::TruncationCap {
                        requested: tol,
                        achieved: at_cap,
                        cap: MAX_MODES,
                    });
                }
                let (mut lo, mut hi) = (0usize, MAX_MODES);
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    if truncation_tail_bound(p, t_min, mid + 1)? <= tol {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                let n_max = hi.max(1);
                Ok(Truncation {
                    n_max,
                    tail_bound: truncation_tail_bound(p, t_min, n_max + 1)?,
                    t_min,
                    policy,
                })
            }
        }
    }
}

/// `G_n` together with its first two time derivatives and `exp(-g t) cosh(omega t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeKernel {
    pub value: f64,
    pub dt: f64,
    pub dtt: f64,
    pub cosh_part: f64,
}

/// Evaluates `G_n` and its derivatives at `t >= 0` without validation.
pub(crate) fn mode_kernel_unchecked(m: &ModeData, t: f64) -> ModeKernel {
    let g = m.g_n;
    match m.branch {
        Branch::Hyperbolic => {
            let w = m.omega_abs();
            let kappa = m.slow_rate();
            let e = (-kappa * t).exp();
            let d = (-2.0 * w * t).exp();
            // (1 - exp(-2 w t)) / (2 w), accurate for small w t.
            let s = -(-2.0 * w * t).exp_m1() / (2.0 * w);
            ModeKernel {
                value: e * s,
                dt: e * (d - kappa * s),
                dtt: e * (kappa * kappa * s - 2.0 * (kappa + w) * d),
                cosh_part: 0.5 * e * (1.0 + d),
            }
        }
        Branch::Circular => {
            let nu = m.omega_abs();
            let e = (-g * t).exp();
            let (sn, cs) = (nu * t).sin_cos();
            let sinc = sn / nu;
            ModeKernel {
                value: e * sinc,
                dt: e * (cs - g * sinc),
                dtt: e * ((g * g - nu * nu) * sinc - 2.0 * g * cs),
                cosh_part: e * cs,
            }
        }
        Branch::Degenerate => {
            // Two-term expansion of sinh(w t)/w in w^2 (signed omega_sq).
            let s = m.omega_sq;
            let e = (-g * t).exp();
            let t2 = t * t;
            let body = t * (1.0 + s * t2 / 6.0);
            let cosh_like = 1.0 + s * t2 / 2.0;
            ModeKernel {
                value: e * body,
                dt: e * (cosh_like - g * body),
                dtt: e * (s * t - 2.0 * g * cosh_like + g * g * body),
                cosh_part: e * cosh_like,
            }
        }
    }
}

pub fn mode_kernel(m: &ModeData, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(mode_kernel_unchecked(m, t).value)
}

/// Time derivative of order 1 or 2 of the mode kernel.
pub fn mode_kernel_dt(m: &ModeData, t: f64, order: u8) -> Result<f64> {
    check_time(t)?;
    let k = mode_kernel_unchecked(m, t);
    match order {
        1 => Ok(k.dt),
        2 => Ok(k.dtt),
        _ => panic!("mode_kernel_dt supports orders 1 and 2, got {order}"),
    }
}

/// `1 - eps (g_n - omega_n)` for a hyperbolic mode, free of cancellation for large `n`.
pub(crate) fn one_minus_eps_slow_rate(m: &ModeData, p: &Parameters) -> f64 {
    let eps = p.epsilon();
    let w = m.omega_abs();
    let half_gap = 0.5 * (eps * m.b_n - p.alpha());
    if half_gap > 0.0 {
        // g + w - eps b = w - half_gap and w^2 - half_gap^2 = b (alpha eps - 1).
        m.b_n * (p.alpha() * eps - 1.0) / ((m.g_n + w) * (w + half_gap))
    } else {
        1.0 - eps * m.slow_rate()
    }
}

/// `eps G_n' + G_n`, the time factor of the combined series.
pub fn combined_mode_coefficient(m: &ModeData, p: &Parameters, t: f64) -> f64 {
    match m.branch {
        Branch::Hyperbolic => {
            let w = m.omega_abs();
            let e = (-m.slow_rate() * t).exp();
            let d = (-2.0 * w * t).exp();
            let s = -(-2.0 * w * t).exp_m1() / (2.0 * w);
            e * (p.epsilon() * d + one_minus_eps_slow_rate(m, p) * s)
        }
        _ => {
            let k = mode_kernel_unchecked(m, t);
            p.epsilon() * k.dt + k.value
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t < 0.0 || t.is_nan() {
        Err(Error::NegativeTime(t))
    } else {
        Ok(())
    }
}

/// `sup_{t >= a} t^k exp(-c t)`.
fn sup_power_exp(a: f64, k: i32, c: f64) -> f64 {
    let peak = k as f64 / c;
    let t = a.max(peak);
    t.powi(k) * (-c * t).exp()
}

/// `sup_{t >= t_min} |G_n(t)|`.
fn mode_sup_bound(m: &ModeData, t_min: f64) -> f64 {
    match m.branch {
        Branch::Hyperbolic => {
            let kappa = m.slow_rate();
            let w = m.omega_abs();
            ((-kappa * t_min).exp() / (2.0 * w)).min(sup_power_exp(t_min, 1, kappa))
        }
        Branch::Circular => {
            let nu = m.omega_abs();
            ((-m.g_n * t_min).exp() / nu).min(sup_power_exp(t_min, 1, m.g_n))
        }
        Branch::Degenerate => sup_power_exp(t_min, 1, m.g_n) + m.omega_sq.abs() / 6.0 * sup_power_exp(t_min, 3, m.g_n),
    }
}

/// Upper bound on `sum_{n >= n_from} |(2/l) W G_n(t) sin sin|` valid for all `t >= t_min`.
///
/// Modes are bounded one by one until `b_n <= g_n^2 / 2` and `eps b_n >= alpha`;
/// from there `1 / (2 omega_n) <= sqrt(2) l^2 / (eps pi^2 n^2)` and
/// `g_n - omega_n >= b_n / (alpha + eps b_n)` close the sum analytically.
pub fn truncation_tail_bound(p: &Parameters, t_min: f64, n_from: usize) -> Result<f64> {
    if !(t_min > 0.0) {
        return Err(Error::NeedPositiveTime(t_min));
    }
    let n_from = n_from.max(1);
    let l = p.length();
    let eps = p.epsilon();
    let prefactor = 2.0 / l * (0.5 * p.lambda() * l).exp();
    let mut explicit = CompensatedSum::new();
    let mut n = n_from;
    loop {
        let m = mode_params(n, p);
        if m.b_n <= 0.5 * m.g_n * m.g_n && eps * m.b_n >= p.alpha() {
            let kappa_lo = m.b_n / (p.alpha() + eps * m.b_n);
            let pi2 = std::f64::consts::PI.powi(2);
            let tail = prefactor * (-kappa_lo * t_min).exp() * std::f64::consts::SQRT_2 * l * l
                / (eps * pi2)
                / (n as f64 - 0.5);
            return Ok(explicit.value() + tail);
        }
        explicit.add(prefactor * mode_sup_bound(&m, t_min));
        n += 1;
    }
}

/// Green function evaluator with precomputed modes.
#[derive(Debug, Clone)]
pub struct GreenEvaluator {
    params: Parameters,
    modes: Vec<ModeData>,
    truncation: Truncation,
    weight: WeightMode,
}

impl GreenEvaluator {
    pub fn new(params: Parameters, policy: TruncationPolicy, t_min: f64, weight: WeightMode) -> Result<Self> {
        let truncation = Truncation::resolve(&params, policy, t_min)?;
        Ok(Self::from_truncation(params, truncation, weight))
    }

    /// Fixed number of modes, tail bound reported for `t >= t_min` when positive.
    pub fn fixed(params: Parameters, n_max: usize, weight: WeightMode) -> Self {
        let truncation = Truncation::resolve(&params, TruncationPolicy::FixedN(n_max), 0.0)
            .expect("fixed truncation with t_min = 0 cannot fail");
        Self::from_truncation(params, truncation, weight)
    }

    /// Tail tolerance `1e-8` for `t >= 0.1` when reachable below the mode cap,
    /// otherwise a fixed 512-mode truncation.
    pub fn with_default_truncation(params: Parameters, weight: WeightMode) -> Self {
        match GreenEvaluator::new(
            params,
            TruncationPolicy::TailTol(DEFAULT_TAIL_TOL),
            DEFAULT_TAIL_T_MIN,
            weight,
        ) {
            Ok(ev) => ev,
            Err(_) => GreenEvaluator::new(
                params,
                TruncationPolicy::FixedN(DEFAULT_FIXED_MODES),
                DEFAULT_TAIL_T_MIN,
                weight,
            )
            .expect("positive t_min"),
        }
    }

    fn from_truncation(params: Parameters, truncation: Truncation, weight: WeightMode) -> Self {
        let modes = (1..=truncation.n_max).map(|n| mode_params(n, &params)).collect();
        GreenEvaluator {
            params,
            modes,
            truncation,
            weight,
        }
    }

    /// Same parameters and weight with a different number of modes.
    pub fn with_n_max(&self, n_max: usize) -> Self {
        GreenEvaluator::fixed(self.params, n_max, self.weight)
    }

    pub fn params(&self) -> &Parameters {
        &self.params
    }

    pub fn modes(&self) -> &[ModeData] {
        &self.modes
    }

    pub fn n_max(&self) -> usize {
        self.modes.len()
    }

    pub fn truncation(&self) -> &Truncation {
        &self.truncation
    }

    pub fn weight(&self) -> WeightMode {
        self.weight
    }

    fn check_point(&self, x: f64, xi: f64) -> Result<()> {
        let l = self.params.length();
        let inside = |v: f64| (0.0..=l).contains(&v);
        if inside(x) && inside(xi) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { x, xi, length: l })
        }
    }

    fn prefactor(&self, x: f64, xi: f64) -> f64 {
        2.0 / self.params.length() * self.weight.factor(self.params.lambda(), x, xi)
    }

    fn mode_series<F>(&self, x: f64, xi: f64, mut term: F) -> f64
    where
        F: FnMut(&ModeData, f64, f64) -> f64,
    {
        let mut acc = CompensatedSum::new();
        for m in &self.modes {
            let s_xi = (m.gamma_n * xi).sin();
            let (s_x, c_x) = (m.gamma_n * x).sin_cos();
            acc.add(s_xi * term(m, s_x, c_x));
        }
        self.prefactor(x, xi) * acc.value()
    }

    pub fn green_eval(&self, x: f64, xi: f64, t: f64) -> Result<f64> {
        self.check_point(x, xi)?;
        check_time(t)?;
        Ok(self.mode_series(x, xi, |m, s_x, _| mode_kernel_unchecked(m, t).value * s_x))
    }

    /// `d^k G / dt^k` for `k = 1, 2`; the second derivative needs `t > 0`.
    pub fn green_dt(&self, x: f64, xi: f64, t: f64, order: u8) -> Result<f64> {
        self.check_point(x, xi)?;
        check_time(t)?;
        match order {
            1 => Ok(self.mode_series(x, xi, |m, s_x, _| mode_kernel_unchecked(m, t).dt * s_x)),
            2 => {
                if t <= 0.0 {
                    return Err(Error::NeedPositiveTime(t));
                }
                Ok(self.mode_series(x, xi, |m, s_x, _| mode_kernel_unchecked(m, t).dtt * s_x))
            }
            _ => panic!("green_dt supports orders 1 and 2, got {order}"),
        }
    }

    /// `d_x^i (eps G_t + G)` for `i = 0, 1, 2`, differentiated term by term.
    pub fn eps_gt_plus_g(&self, x: f64, xi: f64, t: f64, x_order: u8) -> Result<f64> {
        self.check_point(x, xi)?;
        check_time(t)?;
        assert!(x_order <= 2, "x_order must be 0, 1 or 2");
        let half_lambda = 0.5 * self.params.lambda();
        Ok(self.mode_series(x, xi, |m, s_x, c_x| {
            let c = combined_mode_coefficient(m, &self.params, t);
            c * spatial_factor(x_order, half_lambda, m.gamma_n, s_x, c_x)
        }))
    }

    /// Absolute value of the operator applied to the truncated series at `(x, xi, t)`.
    ///
    /// The spatial part `(d_xx - lambda d_x)(eps G_t + G)` and the temporal part
    /// `(d_t + alpha) G_t` are summed as two independent series.
    pub fn lop_residual(&self, x: f64, xi: f64, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Err(Error::NeedPositiveTime(t));
        }
        let lambda = self.params.lambda();
        let spatial = self.eps_gt_plus_g(x, xi, t, 2)? - lambda * self.eps_gt_plus_g(x, xi, t, 1)?;
        let alpha = self.params.alpha();
        let temporal = self.mode_series(x, xi, |m, s_x, _| {
            let k = mode_kernel_unchecked(m, t);
            (k.dtt + alpha * k.dt) * s_x
        });
        Ok((spatial - temporal).abs())
    }

    /// Residual of a single series term relative to the size of its pieces.
    pub fn mode_lop_residual(&self, n: usize, x: f64, xi: f64, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Err(Error::NeedPositiveTime(t));
        }
        self.check_point(x, xi)?;
        let m = mode_params(n, &self.params);
        let half_lambda = 0.5 * self.params.lambda();
        let lambda = self.params.lambda();
        let (s_x, c_x) = (m.gamma_n * x).sin_cos();
        let c = combined_mode_coefficient(&m, &self.params, t);
        let k = mode_kernel_unchecked(&m, t);
        let d2 = c * spatial_factor(2, half_lambda, m.gamma_n, s_x, c_x);
        let d1 = c * spatial_factor(1, half_lambda, m.gamma_n, s_x, c_x);
        let tt = (k.dtt + self.params.alpha() * k.dt) * s_x;
        let scale = d2.abs() + (lambda * d1).abs() + tt.abs();
        if scale == 0.0 {
            return Ok(0.0);
        }
        Ok((d2 - lambda * d1 - tt).abs() / scale)
    }
}

/// `d_x^i [exp(lambda x / 2) sin(gamma x)] / exp(lambda x / 2)`.
#[inline]
fn spatial_factor(order: u8, half_lambda: f64, gamma: f64, s_x: f64, c_x: f64) -> f64 {
    match order {
        0 => s_x,
        1 => half_lambda * s_x + gamma * c_x,
        _ => (half_lambda * half_lambda - gamma * gamma) * s_x + 2.0 * half_lambda * gamma * c_x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(alpha: f64, epsilon: f64, lambda: f64, length: f64) -> Parameters {
        Parameters::new(alpha, epsilon, lambda, length, 10.0).unwrap()
    }

    #[test]
    fn degenerate_unit_mode() {
        let m = mode_params(1, &params(1.0, 1.0, 0.0, PI));
        assert_eq!(m.branch, Branch::Degenerate);
        let v = mode_kernel(&m, 1.0).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn kernel_vanishes_at_zero_with_unit_slope() {
        let p = params(0.2, 0.05, 0.4, PI);
        for n in [1, 2, 7, 40, 400] {
            let m = mode_params(n, &p);
            assert_eq!(mode_kernel(&m, 0.0).unwrap(), 0.0);
            assert!((mode_kernel_dt(&m, 0.0, 1).unwrap() - 1.0).abs() < 1e-12);
            let d2 = mode_kernel_dt(&m, 0.0, 2).unwrap();
            assert!((d2 + 2.0 * m.g_n).abs() <= 1e-12 * m.g_n.max(1.0));
        }
    }

    #[test]
    fn negative_time_rejected() {
        let m = mode_params(1, &params(1.0, 1.0, 0.0, PI));
        assert_eq!(mode_kernel(&m, -0.1), Err(Error::NegativeTime(-0.1)));
        assert!(mode_kernel_dt(&m, -1.0, 1).is_err());
    }

    #[test]
    fn hyperbolic_derivative_matches_finite_difference() {
        let p = params(0.5, 1.5, 0.3, 2.0);
        let m = mode_params(3, &p);
        assert_eq!(m.branch, Branch::Hyperbolic);
        let t = 0.5;
        let h = 1e-5;
        let fd = (mode_kernel(&m, t + h).unwrap() - mode_kernel(&m, t - h).unwrap()) / (2.0 * h);
        let exact = mode_kernel_dt(&m, t, 1).unwrap();
        assert!(((fd - exact) / exact).abs() < 1e-8);
    }

    #[test]
    fn stiff_modes_stay_finite() {
        let p = params(0.1, 2.0, 1.0, 1.0);
        let m = mode_params(4000, &p);
        for t in [0.0, 1e-9, 1e-3, 1.0, 50.0] {
            let k = mode_kernel_unchecked(&m, t);
            assert!(k.value.is_finite() && k.dt.is_finite() && k.dtt.is_finite());
        }
    }

    #[test]
    fn branch_switch_is_continuous() {
        // alpha eps = 1, lambda = 0: mode 1 sits on the double root when l = pi.
        let base = params(1.0, 1.0, 0.0, PI);
        let m0 = mode_params(1, &base);
        for shift in [1e-6, -1e-6, 1e-9, -1e-9] {
            let p = params(1.0 + shift, 1.0, 0.0, PI);
            let m = mode_params(1, &p);
            assert_ne!(m.branch, Branch::Degenerate);
            for t in [0.3, 1.0, 4.0] {
                let a = mode_kernel(&m0, t).unwrap();
                let b = mode_kernel(&m, t).unwrap();
                assert!((a - b).abs() < 20.0 * shift.abs(), "shift {shift} t {t}");
            }
        }
    }

    #[test]
    fn green_vanishes_at_zero_time() {
        let ev = GreenEvaluator::fixed(params(0.5, 0.1, 0.3, PI), 128, WeightMode::SelfAdjoint);
        assert_eq!(ev.green_eval(1.0, 2.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn out_of_domain_rejected() {
        let ev = GreenEvaluator::fixed(params(0.5, 0.1, 0.3, PI), 16, WeightMode::SelfAdjoint);
        assert!(matches!(ev.green_eval(-0.1, 1.0, 1.0), Err(Error::OutOfDomain { .. })));
        assert!(matches!(ev.green_eval(1.0, 4.0, 1.0), Err(Error::OutOfDomain { .. })));
        assert_eq!(ev.green_dt(1.0, 1.0, 0.0, 2), Err(Error::NeedPositiveTime(0.0)));
    }

    #[test]
    fn tail_tolerance_unreachable_for_slow_kernel() {
        // High modes decay like exp(-t / eps) / n^2, so 1e-8 cannot be met at t = 0.1.
        let p = params(1.0, 1.0, 0.0, PI);
        let r = GreenEvaluator::new(p, TruncationPolicy::TailTol(1e-8), 0.1, WeightMode::SelfAdjoint);
        assert!(matches!(r, Err(Error::TruncationCap { .. })));
        let ev = GreenEvaluator::with_default_truncation(p, WeightMode::SelfAdjoint);
        assert_eq!(ev.n_max(), DEFAULT_FIXED_MODES);
    }

    #[test]
    fn tail_tolerance_met_for_fast_kernel() {
        // Small eps pushes exp(-t/eps) far down at t = 0.1.
        let p = params(0.3, 0.005, 0.0, PI);
        let ev = GreenEvaluator::new(p, TruncationPolicy::TailTol(1e-8), 0.1, WeightMode::SelfAdjoint).unwrap();
        assert!(ev.truncation().tail_bound <= 1e-8);
        assert!(ev.n_max() <= MAX_MODES);
    }
}
