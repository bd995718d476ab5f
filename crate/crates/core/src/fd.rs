//! Finite-difference reference solver in primal form.
//!
//! The equation is written as the first-order system
//!
//! ```text
//! u_t = v
//! v_t = (d_xx - lambda d_x)(eps v + u) - alpha v - F(x, t, u)
//! ```
//!
//! with second-order central differences and `u = v = 0` at both ends.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Grid, Provenance};
use crate::model::Parameters;
use crate::profile::{Profile, SourceFn};

/// Explicit stability factor: `dt <= C_STAB dx^2 / eps`.
pub const C_STAB: f64 = 0.25;
/// Growth factor of the state norm that is reported as instability.
pub const INSTABILITY_GROWTH: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum FdScheme {
    ExplicitRK4,
    /// Crank-Nicolson on the linear part, explicit midpoint on `F`.
    #[default]
    SemiImplicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdGrid {
    /// Interior spatial points; `dx = l / (nx + 1)`.
    pub nx: usize,
    /// Largest time step; steps are shortened so they land on every output time.
    pub dt: f64,
    pub t_end: f64,
    pub scheme: FdScheme,
}

impl FdGrid {
    pub fn dx(&self, length: f64) -> f64 {
        length / (self.nx + 1) as f64
    }

    /// Largest stable explicit step for the given parameters.
    pub fn explicit_dt_limit(&self, p: &Parameters) -> f64 {
        let dx = self.dx(p.length());
        C_STAB * dx * dx / p.epsilon()
    }

    pub fn precheck(&self, p: &Parameters) -> Result<()> {
        if self.nx < 2 {
            return Err(Error::NonPositive("nx"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::NonPositive("dt"));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::NonPositive("t_end"));
        }
        if self.scheme == FdScheme::ExplicitRK4 {
            let limit = self.explicit_dt_limit(p);
            if self.dt > limit {
                return Err(Error::StabilityPrecheckFailed { dt: self.dt, limit });
            }
        }
        Ok(())
    }

    /// Spatial nodes including both endpoints.
    pub fn nodes(&self, length: f64) -> Vec<f64> {
        crate::field::linspace(0.0, length, self.nx + 2)
    }
}

/// Thomas algorithm. `sub[0]` and `sup[n-1]` are ignored.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert!(sub.len() == n && sup.len() == n && rhs.len() == n);
    if n == 0 {
        return Vec::new();
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / denom;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// `(d_xx - lambda d_x)` on interior nodes with zero Dirichlet values.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    lower: f64,
    centre: f64,
    upper: f64,
}

impl Stencil {
    fn new(dx: f64, lambda: f64) -> Self {
        let inv2 = 1.0 / (dx * dx);
        let adv = lambda / (2.0 * dx);
        Stencil {
            lower: inv2 + adv,
            centre: -2.0 * inv2,
            upper: inv2 - adv,
        }
    }

    fn apply(&self, w: &[f64], out: &mut [f64]) {
        let n = w.len();
        for i in 0..n {
            let left = if i > 0 { w[i - 1] } else { 0.0 };
            let right = if i + 1 < n { w[i + 1] } else { 0.0 };
            out[i] = self.lower * left + self.centre * w[i] + self.upper * right;
        }
    }
}

struct System<'a> {
    xs: Vec<f64>,
    stencil: Stencil,
    alpha: f64,
    eps: f64,
    source: &'a SourceFn,
    scratch: Vec<f64>,
}

impl System<'_> {
    /// Right-hand side of `v_t`.
    fn accel(&mut self, t: f64, u: &[f64], v: &[f64], out: &mut [f64]) {
        for (s, (a, b)) in self.scratch.iter_mut().zip(u.iter().zip(v)) {
            *s = self.eps * b + a;
        }
        self.stencil.apply(&self.scratch, out);
        for i in 0..u.len() {
            out[i] -= self.alpha * v[i] + self.source.eval(self.xs[i], t, u[i]);
        }
    }

    fn rk4_step(&mut self, t: f64, dt: f64, u: &mut [f64], v: &mut [f64]) {
        let n = u.len();
        let mut ku = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let mut kv = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let mut us = vec![0.0; n];
        let mut vs = vec![0.0; n];
        let offsets = [0.0, 0.5, 0.5, 1.0];
        for stage in 0..4 {
            if stage == 0 {
                us.copy_from_slice(u);
                vs.copy_from_slice(v);
            } else {
                let h = offsets[stage] * dt;
                for i in 0..n {
                    us[i] = u[i] + h * ku[stage - 1][i];
                    vs[i] = v[i] + h * kv[stage - 1][i];
                }
            }
            ku[stage].copy_from_slice(&vs);
            let mut acc = vec![0.0; n];
            self.accel(t + offsets[stage] * dt, &us, &vs, &mut acc);
            kv[stage] = acc;
        }
        for i in 0..n {
            u[i] += dt / 6.0 * (ku[0][i] + 2.0 * ku[1][i] + 2.0 * ku[2][i] + ku[3][i]);
            v[i] += dt / 6.0 * (kv[0][i] + 2.0 * kv[1][i] + 2.0 * kv[2][i] + kv[3][i]);
        }
    }

    /// Eliminates `u^{n+1}` from the Crank-Nicolson pair and solves for `v^{n+1}`:
    ///
    /// ```text
    /// [(1 + dt alpha/2) I - c A] v' = [(1 - dt alpha/2) I + c A] v + dt A u - dt F*
    /// c = dt eps / 2 + dt^2 / 4
    /// ```
    fn imex_step(&mut self, t: f64, dt: f64, u: &mut [f64], v: &mut [f64]) {
        let n = u.len();
        let c = 0.5 * dt * self.eps + 0.25 * dt * dt;
        let mut av = vec![0.0; n];
        let mut au = vec![0.0; n];
        self.stencil.apply(v, &mut av);
        self.stencil.apply(u, &mut au);
        let tm = t + 0.5 * dt;
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let u_mid = u[i] + 0.5 * dt * v[i];
                (1.0 - 0.5 * dt * self.alpha) * v[i] + c * av[i] + dt * au[i]
                    - dt * self.source.eval(self.xs[i], tm, u_mid)
            })
            .collect();
        let sub = vec![-c * self.stencil.lower; n];
        let sup = vec![-c * self.stencil.upper; n];
        let diag = vec![1.0 + 0.5 * dt * self.alpha - c * self.stencil.centre; n];
        let v_new = solve_tridiagonal(&sub, &diag, &sup, &rhs);
        for ((ui, vi), vn) in u.iter_mut().zip(v.iter()).zip(&v_new) {
            *ui += 0.5 * dt * (vi + vn);
        }
        v.copy_from_slice(&v_new);
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Solves the strip problem and samples `u` at `t_out` on the finite-difference nodes.
///
/// Every output time is hit exactly: each output interval is split into
/// `ceil(interval / dt)` equal steps.
pub fn fd_solve(
    h0: &Profile,
    h1: &Profile,
    source: &SourceFn,
    p: &Parameters,
    g: &FdGrid,
    t_out: &[f64],
) -> Result<Field> {
    g.precheck(p)?;
    let nodes = g.nodes(p.length());
    let grid = Grid::new(nodes.clone(), t_out.to_vec())?;
    if t_out.last().copied().unwrap_or(0.0) > g.t_end * (1.0 + 1e-12) {
        return Err(Error::GridMismatch(format!(
            "output time {} beyond t_end {}",
            t_out.last().unwrap(),
            g.t_end
        )));
    }
    let interior: Vec<f64> = nodes[1..nodes.len() - 1].to_vec();
    let mut u: Vec<f64> = interior.iter().map(|&x| h0.eval(x)).collect();
    let mut v: Vec<f64> = interior.iter().map(|&x| h1.eval(x)).collect();
    let reference = (sup(&u) + sup(&v)).max(1.0);
    let mut system = System {
        stencil: Stencil::new(g.dx(p.length()), p.lambda()),
        xs: interior,
        alpha: p.alpha(),
        eps: p.epsilon(),
        source,
        scratch: vec![0.0; g.nx],
    };

    let mut field = Field::zeros(&grid, Provenance::Oracle);
    let mut t = 0.0;
    for (j, &target) in t_out.iter().enumerate() {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / g.dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for k in 0..steps {
                let tk = t + k as f64 * h;
                match g.scheme {
                    FdScheme::ExplicitRK4 => system.rk4_step(tk, h, &mut u, &mut v),
                    FdScheme::SemiImplicit => system.imex_step(tk, h, &mut u, &mut v),
                }
            }
            let norm = sup(&u) + sup(&v);
            if !norm.is_finite() || norm > INSTABILITY_GROWTH * reference {
                return Err(Error::Instability(target));
            }
            t = target;
        }
        for (i, &ui) in u.iter().enumerate() {
            field.set(i + 1, j, ui);
        }
    }
    Ok(field)
}

/// Discrete residual of the third-order operator applied to a sampled field.
///
/// Needs uniform axes with at least three points each; returns the largest
/// residual over interior space-time nodes.
pub fn discrete_operator_residual(u: &Field, source: &SourceFn, p: &Parameters) -> Result<f64> {
    let (nx, nt) = (u.nx(), u.nt());
    if nx < 3 || nt < 3 {
        return Err(Error::GridMismatch("need at least 3 points per axis".into()));
    }
    let dx = u.x_grid[1] - u.x_grid[0];
    let dt = u.t_grid[1] - u.t_grid[0];
    let uniform = |a: &[f64], h: f64| {
        a.windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1.0))
    };
    if !uniform(&u.x_grid, dx) || !uniform(&u.t_grid, dt) {
        return Err(Error::GridMismatch("operator residual needs uniform axes".into()));
    }
    let (alpha, eps, lambda) = (p.alpha(), p.epsilon(), p.lambda());
    // w = eps u_t + u at (i, j)
    let w = |i: usize, j: usize| eps * (u.get(i, j + 1) - u.get(i, j - 1)) / (2.0 * dt) + u.get(i, j);
    let mut worst: f64 = 0.0;
    for j in 1..nt - 1 {
        for i in 1..nx - 1 {
            let spatial = (w(i + 1, j) - 2.0 * w(i, j) + w(i - 1, j)) / (dx * dx)
                - lambda * (w(i + 1, j) - w(i - 1, j)) / (2.0 * dx);
            let utt = (u.get(i, j + 1) - 2.0 * u.get(i, j) + u.get(i, j - 1)) / (dt * dt);
            let ut = (u.get(i, j + 1) - u.get(i, j - 1)) / (2.0 * dt);
            let f = source.eval(u.x_grid[i], u.t_grid[j], u.get(i, j));
            worst = worst.max((spatial - utt - alpha * ut - f).abs());
        }
    }
    Ok(worst)
}

/// Norms of `a - b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub linf: f64,
    /// Root-mean-square over the compared grid points.
    pub l2: f64,
    /// `max_x |a - b|` at every time of the compared grid.
    pub per_time_max: Vec<f64>,
    /// `(x, t)` of the largest discrepancy.
    pub argmax: (f64, f64),
}

/// Compares two fields on the grid of `a`, interpolating `b` bilinearly where the grids differ.
pub fn compare_fields(a: &Field, b: &Field) -> Result<ErrorReport> {
    let ends = |v: &[f64]| (v[0], v[v.len() - 1]);
    let close = |p: (f64, f64), q: (f64, f64)| {
        let scale = p.1.abs().max(1.0);
        (p.0 - q.0).abs() <= 1e-9 * scale && (p.1 - q.1).abs() <= 1e-9 * scale
    };
    if !close(ends(&a.x_grid), ends(&b.x_grid)) || !close(ends(&a.t_grid), ends(&b.t_grid)) {
        return Err(Error::GridMismatch("field domains differ".into()));
    }
    let same = a.x_grid == b.x_grid && a.t_grid == b.t_grid;
    let mut linf: f64 = 0.0;
    let mut argmax = (a.x_grid[0], a.t_grid[0]);
    let mut sq = 0.0;
    let mut per_time_max = vec![0.0f64; a.nt()];
    for (i, &x) in a.x_grid.iter().enumerate() {
        for (j, &t) in a.t_grid.iter().enumerate() {
            let bv = if same {
                b.get(i, j)
            } else {
                b.interpolate(x, t)
                    .ok_or_else(|| Error::GridMismatch(format!("({x}, {t}) outside second field")))?
            };
            let d = (a.get(i, j) - bv).abs();
            sq += d * d;
            per_time_max[j] = per_time_max[j].max(d);
            if d > linf {
                linf = d;
                argmax = (x, t);
            }
        }
    }
    Ok(ErrorReport {
        linf,
        l2: (sq / (a.nx() * a.nt()) as f64).sqrt(),
        per_time_max,
        argmax,
    })
}
