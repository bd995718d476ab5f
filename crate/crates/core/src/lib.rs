//! Semi-analytical solver for the damped, tapered sine-Gordon strip problem
//!
//! ```text
//! (d_xx - lambda d_x)(eps u_t + u) - d_t (u_t + alpha u) = F(x, t, u),   0 < x < l
//! u(0, t) = u(l, t) = 0,   u(x, 0) = h0(x),   u_t(x, 0) = h1(x)
//! ```
//!
//! The Green function is a Fourier sine series with closed-form time kernels.
//! Linear problems are solved by convolution, semilinear ones by Picard
//! iteration on the integral equation, and a finite-difference solver serves
//! as an independent reference.

pub mod decay;
pub mod error;
pub mod fd;
pub mod field;
pub mod kernel;
pub mod linear;
pub mod modal;
pub mod model;
pub mod picard;
pub mod profile;
pub mod quadrature;
pub mod sum;

pub use decay::{decay_rate_estimate, DecayFit};
pub use error::{Error, Result};
pub use fd::{compare_fields, fd_solve, ErrorReport, FdGrid, FdScheme};
pub use field::{Field, Grid, Provenance};
pub use kernel::{GreenEvaluator, Truncation, TruncationPolicy, WeightMode};
pub use linear::{convolve_initial, convolve_source, linear_solve, single_mode_reference, star_operator};
pub use model::{
    classify_modes, decay_constants, mode_params, validate_params, Branch, DecayConstants, ModeData, Parameters,
    RawParams, Regime,
};
pub use picard::{
    apriori_bound, continuous_dependence_ratio, integral_residual, picard_solve, sine_gordon_source, BoundReport,
    PicardConfig, PicardReport, ProblemData,
};
pub use profile::{Profile, Regularity, SourceFn};
pub use quadrature::{QuadratureRule, QuadratureSpec};
