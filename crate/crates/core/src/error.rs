use thiserror::Error;

/// Errors raised by the solver crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter `{0}` must be strictly positive")]
    NonPositive(&'static str),
    #[error("taper constant lambda must be non-negative")]
    NegativeTaper,
    #[error("parameter `{0}` is not finite")]
    NonFinite(&'static str),

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("time must be strictly positive for this evaluation, got {0}")]
    NeedPositiveTime(f64),
    #[error("point ({x}, {xi}) lies outside the strip [0, {length}]")]
    OutOfDomain { x: f64, xi: f64, length: f64 },
    #[error("tail tolerance {requested:e} not reachable below n_max = {cap} (bound {achieved:e})")]
    TruncationCap { requested: f64, achieved: f64, cap: usize },

    #[error("invalid quadrature specification: {0}")]
    InvalidQuadrature(String),
    #[error("quadrature under-resolved: estimated coefficient error {estimate:e} exceeds {tolerance:e}")]
    QuadratureUnderResolved { estimate: f64, tolerance: f64 },
    #[error("profile does not vanish at the endpoints (|h(0)| = {left:e}, |h(l)| = {right:e})")]
    ProfileEndpointViolation { left: f64, right: f64 },
    #[error("profile regularity insufficient: {0}")]
    ProfileRegularityViolation(String),
    #[error("profile is not finite at x = {0}")]
    ProfileNotFinite(f64),
    #[error("declared Lipschitz constant {declared} violated: observed ratio {observed}")]
    LipschitzViolation { declared: f64, observed: f64 },
    #[error("source depends on u; use the Picard solver")]
    SourceDependsOnU,

    #[error("Picard iteration did not converge after {iterations} iterations (last change {last_change:e})")]
    NoConvergence { iterations: usize, last_change: f64 },
    #[error("cannot restart window at t = {0}: non-finite state")]
    WindowRestartFailure(f64),
    #[error("invalid Picard configuration: {0}")]
    InvalidPicardConfig(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("perturbation size {0:e} is below 1e-14")]
    ZeroPerturbation(f64),
    #[error("fit window [{lo}, {hi}] is too short or outside the second half of the horizon")]
    WindowTooShort { lo: f64, hi: f64 },
    #[error("field magnitude {value:e} underflows at t = {t}")]
    Underflow { t: f64, value: f64 },

    #[error("finite-difference stability precheck failed: dt = {dt:e} > {limit:e}")]
    StabilityPrecheckFailed { dt: f64, limit: f64 },
    #[error("finite-difference solution unstable at t = {0}")]
    Instability(f64),

    #[error("malformed field data: {0}")]
    Format(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
