//! TOML run configuration and its translation into solver inputs.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use esjj::fd::{FdGrid, FdScheme};
use esjj::kernel::DEFAULT_TAIL_T_MIN;
use esjj::picard::InitialIterate;
use esjj::{
    sine_gordon_source, GreenEvaluator, Grid, Parameters, PicardConfig, Profile, QuadratureRule, QuadratureSpec,
    RawParams, SourceFn, TruncationPolicy, WeightMode,
};
use serde::Deserialize;

use crate::CliError;

/// A number, or a multiple of pi written as `"pi"`, `"2pi"`, `"0.5pi"` or `"pi/2"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Num(f64),
    Text(String),
}

impl Scalar {
    pub fn value(&self) -> Result<f64, CliError> {
        match self {
            Scalar::Num(v) => Ok(*v),
            Scalar::Text(s) => {
                parse_pi_multiple(s).ok_or_else(|| CliError::Config(format!("cannot read `{s}` as a number")))
            }
        }
    }
}

fn parse_pi_multiple(s: &str) -> Option<f64> {
    let s = s.trim().replace(' ', "");
    let (head, div) = match s.split_once('/') {
        Some((h, d)) => (h.to_string(), d.parse::<f64>().ok()?),
        None => (s.clone(), 1.0),
    };
    let k = head.strip_suffix("pi")?;
    let k = match k.strip_suffix('*').unwrap_or(k) {
        "" => 1.0,
        v => v.parse::<f64>().ok()?,
    };
    Some(k * PI / div)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub alpha: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub lambda: f64,
    pub length: Scalar,
    pub horizon: f64,
}

/// Initial-data profile, relative to the strip length.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Zero,
    Sine {
        mode: usize,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `exp(lambda x / 2) sin(n pi x / l)`.
    TaperedSine {
        mode: usize,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `amplitude * (4 x (l - x) / l^2)^power`.
    Bump {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "three")]
        power: u32,
    },
    /// Two-column `x,y` CSV, natural cubic spline.
    Table {
        path: PathBuf,
    },
    Sum {
        terms: Vec<ProfileRef>,
    },
}

fn one() -> f64 {
    1.0
}

fn three() -> u32 {
    3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProfileRef {
    Named(String),
    Inline(ProfileSpec),
}

impl Default for ProfileRef {
    fn default() -> Self {
        ProfileRef::Named("zero".into())
    }
}

/// Built-in profiles available by name without a `[profiles]` entry.
pub const BUILTIN_PROFILES: &[&str] = &["zero", "sin1", "sin2", "sin3", "bump", "tapered1"];

fn builtin(name: &str) -> Option<ProfileSpec> {
    Some(match name {
        "zero" => ProfileSpec::Zero,
        "sin1" | "sin2" | "sin3" => ProfileSpec::Sine {
            mode: name[3..].parse().ok()?,
            amplitude: 1.0,
        },
        "bump" => ProfileSpec::Bump {
            amplitude: 1.0,
            power: 3,
        },
        "tapered1" => ProfileSpec::TaperedSine {
            mode: 1,
            amplitude: 1.0,
        },
        _ => return None,
    })
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude * exp(-rate t) sin(n pi x / l)`.
    DecayingMode {
        mode: usize,
        #[serde(default = "one")]
        amplitude: f64,
        rate: f64,
    },
    /// `coefficient * u`.
    Linear {
        coefficient: f64,
    },
    /// `sin u - gamma`.
    SineGordon {
        gamma: f64,
    },
    /// `coefficient * u * exp(-rate t)`.
    ExpLipschitz {
        coefficient: f64,
        rate: f64,
    },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    #[serde(default)]
    pub h0: ProfileRef,
    #[serde(default)]
    pub h1: ProfileRef,
    #[serde(default)]
    pub source: SourceSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub nx: usize,
    pub nt: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { nx: 33, nt: 21 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSection {
    pub xi_points: usize,
    pub tau_points: usize,
    /// `simpson` or `gauss_legendre`.
    pub rule: String,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        QuadratureSection {
            xi_points: q.xi_points,
            tau_points: q.tau_points,
            rule: "simpson".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FdSection {
    pub nx: usize,
    /// Defaults to `1e-3` (semi-implicit) or the stability limit (RK4).
    pub dt: Option<f64>,
    /// `semi_implicit` or `explicit_rk4`.
    pub scheme: String,
}

impl Default for FdSection {
    fn default() -> Self {
        FdSection {
            nx: 199,
            dt: None,
            scheme: "semi_implicit".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum WindowSpec {
    Length(f64),
    /// `"auto"` or `"whole"`.
    Keyword(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub kind: String,
    pub truncation: Option<String>,
    pub weight: Option<String>,
    pub tol: f64,
    pub max_iter: usize,
    pub window: Option<WindowSpec>,
    pub damping: f64,
    /// `linear` or `zero`.
    pub initial: String,
    /// Set by `--truncation 2x`: double whatever truncation the run would use.
    #[serde(skip)]
    pub doubled: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        let c = PicardConfig::default();
        SolverSection {
            kind: "linear".into(),
            truncation: None,
            weight: None,
            tol: c.tol,
            max_iter: c.max_iter,
            window: None,
            damping: c.damping,
            initial: "linear".into(),
            doubled: false,
        }
    }
}

/// Sample points for `green-eval`, as fractions of the strip length for `x` and `xi`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GreenSection {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub t: Vec<f64>,
}

impl Default for GreenSection {
    fn default() -> Self {
        GreenSection {
            x: vec![0.25, 0.5, 0.75],
            xi: vec![0.25, 0.5, 0.75],
            t: vec![0.0, 0.5, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySection {
    pub t_lo: Option<f64>,
    pub t_hi: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub format: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            format: "csv".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsSection,
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub profiles: BTreeMap<String, ProfileSpec>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub fd: FdSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub green: GreenSection,
    #[serde(default)]
    pub decay: DecaySection,
    #[serde(default)]
    pub output: OutputSection,
    /// Directory of the config file; relative table paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Linear,
    Picard,
    Fd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Bin,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationChoice {
    Policy(TruncationPolicy),
    /// Twice the modes of the default truncation.
    Doubled,
}

pub fn parse_solver(s: &str) -> Result<SolverKind, CliError> {
    match s {
        "linear" => Ok(SolverKind::Linear),
        "picard" => Ok(SolverKind::Picard),
        "fd" => Ok(SolverKind::Fd),
        _ => Err(CliError::Config(format!("unknown solver `{s}` (linear, picard, fd)"))),
    }
}

pub fn parse_format(s: &str) -> Result<Format, CliError> {
    match s {
        "csv" => Ok(Format::Csv),
        "bin" => Ok(Format::Bin),
        "json" => Ok(Format::Json),
        _ => Err(CliError::Config(format!("unknown format `{s}` (csv, bin, json)"))),
    }
}

pub fn parse_weight(s: &str) -> Result<WeightMode, CliError> {
    match s {
        "selfadjoint" => Ok(WeightMode::SelfAdjoint),
        "paperliteral" | "observeronly" => Ok(WeightMode::ObserverOnly),
        _ => Err(CliError::Config(format!(
            "unknown weight `{s}` (selfadjoint, paperliteral)"
        ))),
    }
}

/// `N`, `tol=X` or `2x`.
pub fn parse_truncation(s: &str) -> Result<TruncationChoice, CliError> {
    let bad = || CliError::Config(format!("bad truncation `{s}` (N, tol=X or 2x)"));
    if s == "2x" {
        return Ok(TruncationChoice::Doubled);
    }
    if let Some(tol) = s.strip_prefix("tol=") {
        let tol: f64 = tol.parse().map_err(|_| bad())?;
        if !(tol > 0.0) {
            return Err(bad());
        }
        return Ok(TruncationChoice::Policy(TruncationPolicy::TailTol(tol)));
    }
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(TruncationChoice::Policy(TruncationPolicy::FixedN(n))),
        _ => Err(bad()),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn parameters(&self) -> Result<Parameters, CliError> {
        let p = &self.params;
        let raw = RawParams {
            alpha: p.alpha,
            epsilon: p.epsilon,
            lambda: p.lambda,
            length: p.length.value()?,
            horizon: p.horizon,
        };
        Ok(esjj::validate_params(raw)?)
    }

    pub fn weight(&self) -> Result<WeightMode, CliError> {
        self.solver
            .weight
            .as_deref()
            .map_or(Ok(WeightMode::SelfAdjoint), parse_weight)
    }

    pub fn evaluator(&self) -> Result<GreenEvaluator, CliError> {
        let p = self.parameters()?;
        let weight = self.weight()?;
        let choice = match &self.solver.truncation {
            Some(s) => parse_truncation(s)?,
            None => TruncationChoice::Doubled,
        };
        let base = match choice {
            TruncationChoice::Policy(policy @ TruncationPolicy::TailTol(_)) => {
                GreenEvaluator::new(p, policy, DEFAULT_TAIL_T_MIN, weight)?
            }
            TruncationChoice::Policy(TruncationPolicy::FixedN(n)) => GreenEvaluator::fixed(p, n, weight),
            TruncationChoice::Doubled => GreenEvaluator::with_default_truncation(p, weight),
        };
        let doubled = self.solver.doubled || self.solver.truncation.as_deref() == Some("2x");
        Ok(if doubled {
            base.with_n_max(2 * base.n_max())
        } else {
            base
        })
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec, CliError> {
        let q = &self.quadrature;
        let rule = match q.rule.as_str() {
            "simpson" => QuadratureRule::CompositeSimpson,
            "gauss_legendre" => QuadratureRule::GaussLegendreComposite,
            other => return Err(CliError::Config(format!("unknown quadrature rule `{other}`"))),
        };
        Ok(QuadratureSpec::new(q.xi_points, q.tau_points, rule)?)
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        let p = self.parameters()?;
        let g = &self.grid;
        if g.nx < 2 || g.nt < 2 {
            return Err(CliError::Config("grid needs nx >= 2 and nt >= 2".into()));
        }
        Ok(Grid::uniform(p.length(), g.nx, p.horizon(), g.nt))
    }

    pub fn fd_grid(&self) -> Result<FdGrid, CliError> {
        let p = self.parameters()?;
        let scheme = match self.fd.scheme.as_str() {
            "semi_implicit" => FdScheme::SemiImplicit,
            "explicit_rk4" => FdScheme::ExplicitRK4,
            other => return Err(CliError::Config(format!("unknown fd scheme `{other}`"))),
        };
        let mut g = FdGrid {
            nx: self.fd.nx,
            dt: 1e-3,
            t_end: p.horizon(),
            scheme,
        };
        g.dt = match (self.fd.dt, scheme) {
            (Some(dt), _) => dt,
            (None, FdScheme::SemiImplicit) => 1e-3,
            (None, FdScheme::ExplicitRK4) => g.explicit_dt_limit(&p),
        };
        Ok(g)
    }

    pub fn picard_config(&self) -> Result<PicardConfig, CliError> {
        let s = &self.solver;
        let window = match &s.window {
            None => None,
            Some(WindowSpec::Length(w)) => Some(*w),
            Some(WindowSpec::Keyword(k)) if k == "auto" => None,
            Some(WindowSpec::Keyword(k)) if k == "whole" => Some(f64::INFINITY),
            Some(WindowSpec::Keyword(k)) => return Err(CliError::Config(format!("bad window `{k}`"))),
        };
        let initial = match s.initial.as_str() {
            "linear" => InitialIterate::Linear,
            "zero" => InitialIterate::Zero,
            other => return Err(CliError::Config(format!("bad initial iterate `{other}`"))),
        };
        let cfg = PicardConfig {
            tol: s.tol,
            max_iter: s.max_iter,
            window,
            damping: s.damping,
            initial,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn profile(&self, r: &ProfileRef) -> Result<Profile, CliError> {
        self.resolve_profile(r, 0)
    }

    fn resolve_profile(&self, r: &ProfileRef, depth: usize) -> Result<Profile, CliError> {
        if depth > 16 {
            return Err(CliError::Config("profile references nest too deeply".into()));
        }
        let spec = match r {
            ProfileRef::Inline(s) => s.clone(),
            ProfileRef::Named(name) => match self.profiles.get(name) {
                Some(s) => s.clone(),
                None => builtin(name).ok_or_else(|| {
                    CliError::Config(format!(
                        "unknown profile `{name}`; define it under [profiles] or use one of {BUILTIN_PROFILES:?}"
                    ))
                })?,
            },
        };
        let p = self.parameters()?;
        let l = p.length();
        Ok(match spec {
            ProfileSpec::Zero => Profile::zero(l),
            ProfileSpec::Sine { mode, amplitude } => Profile::sine_mode(l, check_mode(mode)?, amplitude),
            ProfileSpec::TaperedSine { mode, amplitude } => {
                Profile::tapered_sine_mode(l, p.lambda(), check_mode(mode)?, amplitude)
            }
            ProfileSpec::Bump { amplitude, power } => {
                if power < 1 {
                    return Err(CliError::Config("bump power must be at least 1".into()));
                }
                Profile::bump(l, amplitude, power)
            }
            ProfileSpec::Table { path } => {
                let prof = read_table(&self.base_dir.join(path))?;
                if (prof.length() - l).abs() > 1e-9 * l {
                    return Err(CliError::Config(format!(
                        "tabulated profile spans [0, {}], strip length is {l}",
                        prof.length()
                    )));
                }
                prof
            }
            ProfileSpec::Sum { terms } => {
                let mut acc = Profile::zero(l);
                for t in &terms {
                    acc = acc.combine(1.0, &self.resolve_profile(t, depth + 1)?, 1.0);
                }
                acc
            }
        })
    }

    pub fn source(&self) -> Result<SourceFn, CliError> {
        let l = self.parameters()?.length();
        Ok(match self.problem.source {
            SourceSpec::Zero => SourceFn::zero(),
            SourceSpec::Constant { value } => SourceFn::constant(value),
            SourceSpec::DecayingMode { mode, amplitude, rate } => {
                SourceFn::decaying_mode(l, check_mode(mode)?, amplitude, rate)
            }
            SourceSpec::Linear { coefficient } => SourceFn::linear_in_u(coefficient),
            SourceSpec::SineGordon { gamma } => sine_gordon_source(gamma),
            SourceSpec::ExpLipschitz { coefficient, rate } => {
                if rate < 0.0 {
                    return Err(CliError::Config("exp_lipschitz rate must be non-negative".into()));
                }
                SourceFn::nonlinear(move |_, t, u| coefficient * u * (-rate * t).exp(), coefficient.abs())
                    .with_label("exp_lipschitz")
            }
        })
    }

    /// Fit window for decay studies, `[T/2, T]` unless overridden.
    pub fn decay_window(&self) -> (f64, f64) {
        let t = self.params.horizon;
        (self.decay.t_lo.unwrap_or(0.5 * t), self.decay.t_hi.unwrap_or(t))
    }
}

fn check_mode(n: usize) -> Result<usize, CliError> {
    if n == 0 {
        Err(CliError::Config("mode index starts at 1".into()))
    } else {
        Ok(n)
    }
}

fn read_table(path: &Path) -> Result<Profile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let parsed = (cols.next().map(str::parse::<f64>), cols.next().map(str::parse::<f64>));
        match parsed {
            (Some(Ok(x)), Some(Ok(y))) => {
                xs.push(x);
                ys.push(y);
            }
            // A non-numeric first line is a header.
            _ if k == 0 => continue,
            _ => return Err(CliError::Config(format!("{}: bad row {}", path.display(), k + 1))),
        }
    }
    Ok(Profile::tabulated(xs, ys)?)
}
