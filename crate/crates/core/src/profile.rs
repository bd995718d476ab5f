//! Initial-data profiles and source terms.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::ENDPOINT_TOL;

/// Tolerance of the statistical Lipschitz check.
pub const LIPSCHITZ_CHECK_TOL: f64 = 1e-8;

pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SourceEval = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Declared smoothness class of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Regularity {
    C0,
    C1,
    C2,
    C3,
    Smooth,
}

/// A function on `[0, l]` with declared smoothness.
#[derive(Clone)]
pub struct Profile {
    length: f64,
    eval: ProfileFn,
    first: Option<ProfileFn>,
    second: Option<ProfileFn>,
    regularity: Regularity,
    vanishes_at_ends: bool,
    label: String,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile")
            .field("label", &self.label)
            .field("length", &self.length)
            .field("regularity", &self.regularity)
            .field("vanishes_at_ends", &self.vanishes_at_ends)
            .finish()
    }
}

const FINITE_CHECK_SAMPLES: usize = 1024;

impl Profile {
    pub fn new<F>(length: f64, eval: F, regularity: Regularity, vanishes_at_ends: bool) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let profile = Profile {
            length,
            eval: Arc::new(eval),
            first: None,
            second: None,
            regularity,
            vanishes_at_ends,
            label: "custom".into(),
        };
        profile.check()?;
        Ok(profile)
    }

    fn check(&self) -> Result<()> {
        for k in 0..=FINITE_CHECK_SAMPLES {
            let x = self.length * k as f64 / FINITE_CHECK_SAMPLES as f64;
            if !(self.eval)(x).is_finite() {
                return Err(Error::ProfileNotFinite(x));
            }
        }
        if self.vanishes_at_ends {
            let (left, right) = self.endpoint_values();
            if left.abs() > ENDPOINT_TOL || right.abs() > ENDPOINT_TOL {
                return Err(Error::ProfileEndpointViolation {
                    left: left.abs(),
                    right: right.abs(),
                });
            }
        }
        Ok(())
    }

    pub fn with_derivatives<F1, F2>(mut self, first: F1, second: F2) -> Self
    where
        F1: Fn(f64) -> f64 + Send + Sync + 'static,
        F2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.first = Some(Arc::new(first));
        self.second = Some(Arc::new(second));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn zero(length: f64) -> Self {
        Profile {
            length,
            eval: Arc::new(|_| 0.0),
            first: Some(Arc::new(|_| 0.0)),
            second: Some(Arc::new(|_| 0.0)),
            regularity: Regularity::Smooth,
            vanishes_at_ends: true,
            label: "zero".into(),
        }
    }

    /// `amplitude * sin(n pi x / l)`.
    pub fn sine_mode(length: f64, n: usize, amplitude: f64) -> Self {
        let k = n as f64 * std::f64::consts::PI / length;
        Profile {
            length,
            eval: Arc::new(move |x| amplitude * (k * x).sin()),
            first: Some(Arc::new(move |x| amplitude * k * (k * x).cos())),
            second: Some(Arc::new(move |x| -amplitude * k * k * (k * x).sin())),
            regularity: Regularity::Smooth,
            vanishes_at_ends: true,
            label: format!("sine(n={n}, a={amplitude})"),
        }
    }

    /// `amplitude * exp(lambda x / 2) sin(n pi x / l)`, an eigenfunction of the tapered operator.
    pub fn tapered_sine_mode(length: f64, lambda: f64, n: usize, amplitude: f64) -> Self {
        let k = n as f64 * std::f64::consts::PI / length;
        let h = 0.5 * lambda;
        Profile {
            length,
            eval: Arc::new(move |x| amplitude * (h * x).exp() * (k * x).sin()),
            first: Some(Arc::new(move |x| {
                amplitude * (h * x).exp() * (h * (k * x).sin() + k * (k * x).cos())
            })),
            second: Some(Arc::new(move |x| {
                amplitude * (h * x).exp() * ((h * h - k * k) * (k * x).sin() + 2.0 * h * k * (k * x).cos())
            })),
            regularity: Regularity::Smooth,
            vanishes_at_ends: true,
            label: format!("tapered-sine(n={n}, a={amplitude})"),
        }
    }

    /// `amplitude * (4 x (l - x) / l^2)^power`; peak value `amplitude` at `l / 2`.
    pub fn bump(length: f64, amplitude: f64, power: u32) -> Self {
        assert!(power >= 1, "bump power must be at least 1");
        let l2 = length * length;
        let k = power as i32;
        let kf = power as f64;
        let base = move |x: f64| 4.0 * x * (length - x) / l2;
        let base_d1 = move |x: f64| 4.0 * (length - 2.0 * x) / l2;
        let base_d2 = -8.0 / l2;
        Profile {
            length,
            eval: Arc::new(move |x| amplitude * base(x).powi(k)),
            first: Some(Arc::new(move |x| amplitude * kf * base(x).powi(k - 1) * base_d1(x))),
            second: Some(Arc::new(move |x| {
                let p = base(x);
                let d1 = base_d1(x);
                let mut v = kf * p.powi(k - 1) * base_d2;
                if power >= 2 {
                    v += kf * (kf - 1.0) * p.powi(k - 2) * d1 * d1;
                }
                amplitude * v
            })),
            regularity: Regularity::Smooth,
            vanishes_at_ends: true,
            label: format!("bump(a={amplitude}, p={power})"),
        }
    }

    /// Natural cubic spline through tabulated `(x, value)` pairs covering `[0, l]`.
    pub fn tabulated(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let spline = Arc::new(CubicSpline::natural(xs, ys)?);
        let length = *spline.xs.last().expect("spline has knots");
        if spline.xs[0] != 0.0 {
            return Err(Error::Format("tabulated profile must start at x = 0".into()));
        }
        let (s0, s1, s2) = (spline.clone(), spline.clone(), spline);
        let vanishes = s0.eval(0.0).abs() <= ENDPOINT_TOL && s0.eval(length).abs() <= ENDPOINT_TOL;
        let profile = Profile {
            length,
            eval: Arc::new(move |x| s0.eval(x)),
            first: Some(Arc::new(move |x| s1.derivative(x))),
            second: Some(Arc::new(move |x| s2.second_derivative(x))),
            regularity: Regularity::C2,
            vanishes_at_ends: vanishes,
            label: "tabulated".into(),
        };
        profile.check()?;
        Ok(profile)
    }

    /// Pointwise linear combination `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Profile, b: f64) -> Profile {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let join = |p: &Option<ProfileFn>, q: &Option<ProfileFn>| -> Option<ProfileFn> {
            match (p.clone(), q.clone()) {
                (Some(p), Some(q)) => Some(Arc::new(move |x| a * p(x) + b * q(x))),
                _ => None,
            }
        };
        Profile {
            length: self.length,
            eval: Arc::new(move |x| a * f(x) + b * g(x)),
            first: join(&self.first, &other.first),
            second: join(&self.second, &other.second),
            regularity: self.regularity.min(other.regularity),
            vanishes_at_ends: self.vanishes_at_ends && other.vanishes_at_ends,
            label: format!("{a}*{} + {b}*{}", self.label, other.label),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn regularity(&self) -> Regularity {
        self.regularity
    }

    pub fn vanishes_at_ends(&self) -> bool {
        self.vanishes_at_ends
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn endpoint_values(&self) -> (f64, f64) {
        (self.eval(0.0), self.eval(self.length))
    }

    pub fn first_derivative(&self) -> Option<&ProfileFn> {
        self.first.as_ref()
    }

    pub fn second_derivative(&self) -> Option<&ProfileFn> {
        self.second.as_ref()
    }

    /// The profile `x -> h''(x)`, if available.
    pub fn second_derivative_profile(&self) -> Result<Profile> {
        let second = self.second.clone().ok_or_else(|| {
            Error::ProfileRegularityViolation(format!("{}: second derivative unavailable", self.label))
        })?;
        Ok(Profile {
            length: self.length,
            eval: second,
            first: None,
            second: None,
            regularity: Regularity::C0,
            vanishes_at_ends: false,
            label: format!("({})''", self.label),
        })
    }

    /// `sup |h|` sampled on 2049 points.
    pub fn sup_norm(&self) -> f64 {
        sampled_sup(self.length, |x| self.eval(x))
    }

    /// `sup |h''|` sampled on 2049 points.
    pub fn second_derivative_sup_norm(&self) -> Result<f64> {
        let second = self.second.as_ref().ok_or_else(|| {
            Error::ProfileRegularityViolation(format!("{}: second derivative unavailable", self.label))
        })?;
        Ok(sampled_sup(self.length, |x| second(x)))
    }
}

fn sampled_sup(length: f64, f: impl Fn(f64) -> f64) -> f64 {
    const N: usize = 2048;
    (0..=N)
        .map(|k| f(length * k as f64 / N as f64).abs())
        .fold(0.0, f64::max)
}

/// Source term `F(x, t, u)` with its declared Lipschitz constant in `u`.
#[derive(Clone)]
pub struct SourceFn {
    eval: SourceEval,
    lipschitz_const: f64,
    depends_on_u: bool,
    sup_bound: Option<f64>,
    label: String,
}

impl fmt::Debug for SourceFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceFn")
            .field("label", &self.label)
            .field("lipschitz_const", &self.lipschitz_const)
            .field("depends_on_u", &self.depends_on_u)
            .field("sup_bound", &self.sup_bound)
            .finish()
    }
}

impl SourceFn {
    pub fn zero() -> Self {
        SourceFn {
            eval: Arc::new(|_, _, _| 0.0),
            lipschitz_const: 0.0,
            depends_on_u: false,
            sup_bound: Some(0.0),
            label: "zero".into(),
        }
    }

    /// A forcing `f(x, t)` that ignores `u`.
    pub fn forcing<F>(f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        SourceFn {
            eval: Arc::new(move |x, t, _| f(x, t)),
            lipschitz_const: 0.0,
            depends_on_u: false,
            sup_bound: None,
            label: "forcing".into(),
        }
    }

    /// A source depending on `u` with declared Lipschitz constant `C_F`.
    pub fn nonlinear<F>(f: F, lipschitz_const: f64) -> Self
    where
        F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        SourceFn {
            eval: Arc::new(f),
            lipschitz_const,
            depends_on_u: true,
            sup_bound: None,
            label: "nonlinear".into(),
        }
    }

    /// Declares `sup |F|` over all `(x, t, u)`.
    pub fn with_sup_bound(mut self, bound: f64) -> Self {
        self.sup_bound = Some(bound);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `amplitude * exp(-rate t) sin(n pi x / l)`.
    pub fn decaying_mode(length: f64, n: usize, amplitude: f64, rate: f64) -> Self {
        let k = n as f64 * std::f64::consts::PI / length;
        SourceFn::forcing(move |x, t| amplitude * (-rate * t).exp() * (k * x).sin())
            .with_sup_bound(amplitude.abs())
            .with_label(format!("decaying-mode(n={n}, a={amplitude}, m={rate})"))
    }

    /// Spatially and temporally constant forcing.
    pub fn constant(value: f64) -> Self {
        SourceFn::forcing(move |_, _| value)
            .with_sup_bound(value.abs())
            .with_label(format!("constant({value})"))
    }

    /// `F = coefficient * u`.
    pub fn linear_in_u(coefficient: f64) -> Self {
        SourceFn::nonlinear(move |_, _, u| coefficient * u, coefficient.abs())
            .with_label(format!("linear({coefficient} u)"))
    }

    /// Pointwise sum of two sources.
    pub fn plus(&self, other: &SourceFn) -> SourceFn {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        SourceFn {
            eval: Arc::new(move |x, t, u| f(x, t, u) + g(x, t, u)),
            lipschitz_const: self.lipschitz_const + other.lipschitz_const,
            depends_on_u: self.depends_on_u || other.depends_on_u,
            sup_bound: match (self.sup_bound, other.sup_bound) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            },
            label: format!("{} + {}", self.label, other.label),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64, t: f64, u: f64) -> f64 {
        (self.eval)(x, t, u)
    }

    pub fn lipschitz_const(&self) -> f64 {
        self.lipschitz_const
    }

    pub fn depends_on_u(&self) -> bool {
        self.depends_on_u
    }

    pub fn sup_bound(&self) -> Option<f64> {
        self.sup_bound
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Random spot check of `|F(x,t,u1) - F(x,t,u2)| <= C_F |u1 - u2| + tol`.
    ///
    /// Returns the largest observed difference quotient.
    pub fn check_lipschitz(&self, length: f64, horizon: f64, u_range: f64, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let x = rng.gen_range(0.0..=length);
            let t = rng.gen_range(0.0..=horizon);
            let u1 = rng.gen_range(-u_range..=u_range);
            let u2 = rng.gen_range(-u_range..=u_range);
            let diff = (self.eval(x, t, u1) - self.eval(x, t, u2)).abs();
            let du = (u1 - u2).abs();
            if diff > self.lipschitz_const * du + LIPSCHITZ_CHECK_TOL {
                return Err(Error::LipschitzViolation {
                    declared: self.lipschitz_const,
                    observed: diff / du,
                });
            }
            if du > 0.0 {
                worst = worst.max(diff / du);
            }
        }
        Ok(worst)
    }
}

/// Natural cubic spline on strictly increasing knots.
#[derive(Debug, Clone)]
struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    fn natural(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 3 || ys.len() != n {
            return Err(Error::Format("tabulated profile needs at least 3 (x, y) pairs".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Format("tabulated x values must be strictly increasing".into()));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::Format("tabulated values must be finite".into()));
        }
        // Tridiagonal system for the interior second derivatives (Thomas algorithm).
        let mut m = vec![0.0; n];
        let k = n - 2;
        let mut sub = vec![0.0; k];
        let mut diag = vec![0.0; k];
        let mut sup = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            sub[i - 1] = h0;
            diag[i - 1] = 2.0 * (h0 + h1);
            sup[i - 1] = h1;
            rhs[i - 1] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
        }
        let interior = crate::fd::solve_tridiagonal(&sub, &diag, &sup, &rhs);
        m[1..n - 1].copy_from_slice(&interior);
        Ok(CubicSpline { xs, ys, m })
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    fn derivative(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        (self.ys[i + 1] - self.ys[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * self.m[i]
            + (3.0 * b * b - 1.0) / 6.0 * h * self.m[i + 1]
    }

    fn second_derivative(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.m[i] + b * self.m[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn endpoint_violation_detected() {
        let r = Profile::new(PI, |x| x.cos(), Regularity::Smooth, true);
        assert!(matches!(r, Err(Error::ProfileEndpointViolation { .. })));
        assert!(Profile::new(PI, |x| x.cos(), Regularity::Smooth, false).is_ok());
    }

    #[test]
    fn non_finite_profile_rejected() {
        let r = Profile::new(1.0, |x| 1.0 / (x - 0.5), Regularity::C0, false);
        assert!(matches!(r, Err(Error::ProfileNotFinite(_))));
    }

    #[test]
    fn bump_derivatives_match_finite_differences() {
        for power in 1..=4 {
            let b = Profile::bump(2.5, 1.3, power);
            assert!((b.eval(1.25) - 1.3).abs() < 1e-14);
            let d1 = b.first_derivative().unwrap();
            let d2 = b.second_derivative().unwrap();
            for x in [0.3, 1.0, 2.1] {
                let h = 1e-4;
                let fd1 = (b.eval(x + h) - b.eval(x - h)) / (2.0 * h);
                let fd2 = (b.eval(x + h) - 2.0 * b.eval(x) + b.eval(x - h)) / (h * h);
                assert!((fd1 - d1(x)).abs() < 1e-6);
                assert!((fd2 - d2(x)).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn tapered_sine_derivatives() {
        let p = Profile::tapered_sine_mode(2.0, 0.6, 3, 0.7);
        let d2 = p.second_derivative().unwrap();
        let x = 0.77;
        let h = 1e-4;
        let fd2 = (p.eval(x + h) - 2.0 * p.eval(x) + p.eval(x - h)) / (h * h);
        assert!((fd2 - d2(x)).abs() < 1e-5);
    }

    #[test]
    fn spline_reproduces_smooth_data() {
        let n = 201;
        let xs: Vec<f64> = (0..n).map(|k| PI * k as f64 / (n - 1) as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let p = Profile::tabulated(xs, ys).unwrap();
        assert!(p.vanishes_at_ends());
        for x in [0.1, 1.0, 2.0, 3.0] {
            assert!((p.eval(x) - x.sin()).abs() < 1e-7);
            assert!((p.second_derivative().unwrap()(x) + x.sin()).abs() < 1e-3);
        }
    }

    #[test]
    fn spline_rejects_bad_tables() {
        assert!(Profile::tabulated(vec![0.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(Profile::tabulated(vec![0.0, 1.0, 0.5], vec![0.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn lipschitz_spot_check() {
        let s = SourceFn::nonlinear(|_, _, u| u.sin(), 1.0);
        assert!(s.check_lipschitz(PI, 10.0, 10.0, 5000, 7).unwrap() <= 1.0);
        let liar = SourceFn::nonlinear(|_, _, u| 3.0 * u, 1.0);
        assert!(matches!(
            liar.check_lipschitz(PI, 10.0, 10.0, 100, 7),
            Err(Error::LipschitzViolation { .. })
        ));
    }
}
