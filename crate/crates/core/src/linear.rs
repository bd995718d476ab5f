//! Linear strip problem: convolutions of the Green function with initial data and sources.
//!
//! All convolutions are evaluated in mode space. A profile is projected once
//! with the spatial rule; time dependence is carried by the mode kernels.

use crate::error::{Error, Result};
use crate::field::{Field, Grid, Provenance};
use crate::kernel::{mode_kernel_unchecked, GreenEvaluator};
use crate::modal::{check_projection, par_map, propagate, ModalBasis, StepCache, TimeMesh};
use crate::model::{mode_params, Parameters};
use crate::profile::{Profile, Regularity, SourceFn};
use crate::quadrature::QuadratureSpec;

fn admissible(h: &Profile) -> Result<()> {
    let (left, right) = h.endpoint_values();
    if left.abs() > crate::model::ENDPOINT_TOL || right.abs() > crate::model::ENDPOINT_TOL {
        return Err(Error::ProfileEndpointViolation {
            left: left.abs(),
            right: right.abs(),
        });
    }
    Ok(())
}

fn project_profile(h: &Profile, ev: &GreenEvaluator, q: &QuadratureSpec, basis: &ModalBasis) -> Result<Vec<f64>> {
    admissible(h)?;
    check_projection(ev, q, &|x| h.eval(x))?;
    Ok(basis.project(|x| h.eval(x)))
}

/// Builds a field from amplitudes computed per output time.
fn field_from_amplitudes(
    basis: &ModalBasis,
    grid: &Grid,
    meta: Provenance,
    amplitudes: impl Fn(usize, f64) -> Vec<f64> + Sync,
) -> Field {
    let table = basis.synthesis_table(&grid.x);
    let columns = par_map(grid.nt(), |j| table.eval(&amplitudes(j, grid.t[j])));
    let mut field = Field::zeros(grid, meta);
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            field.set(i, j, *v);
        }
    }
    field
}

fn check_grid(ev: &GreenEvaluator, grid: &Grid) -> Result<()> {
    let l = ev.params().length();
    if let Some(&x) = grid.x.iter().find(|x| !(0.0..=l).contains(*x)) {
        return Err(Error::OutOfDomain { x, xi: x, length: l });
    }
    if let Some(&t) = grid.t.iter().find(|t| **t < 0.0) {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

/// `u_h(x, t) = int h(xi) G(x, xi, t) dxi`.
pub fn convolve_initial(h: &Profile, ev: &GreenEvaluator, q: &QuadratureSpec, grid: &Grid) -> Result<Field> {
    check_grid(ev, grid)?;
    let basis = ModalBasis::new(ev, q)?;
    let c = project_profile(h, ev, q, &basis)?;
    let modes = basis.modes();
    Ok(field_from_amplitudes(&basis, grid, Provenance::Linear, |_, t| {
        modes
            .iter()
            .zip(&c)
            .map(|(m, c)| c * mode_kernel_unchecked(m, t).value)
            .collect()
    }))
}

/// `d/dt u_h`, which tends to `h` as `t -> 0+`.
pub fn convolve_initial_rate(h: &Profile, ev: &GreenEvaluator, q: &QuadratureSpec, grid: &Grid) -> Result<Field> {
    check_grid(ev, grid)?;
    let basis = ModalBasis::new(ev, q)?;
    let c = project_profile(h, ev, q, &basis)?;
    let modes = basis.modes();
    Ok(field_from_amplitudes(&basis, grid, Provenance::Linear, |_, t| {
        modes
            .iter()
            .zip(&c)
            .map(|(m, c)| c * mode_kernel_unchecked(m, t).dt)
            .collect()
    }))
}

fn require_c2(h: &Profile) -> Result<()> {
    if h.regularity() < Regularity::C2 || h.second_derivative().is_none() {
        return Err(Error::ProfileRegularityViolation(format!(
            "`{}` needs a second derivative (declared {:?})",
            h.label(),
            h.regularity()
        )));
    }
    Ok(())
}

/// `(d_t + alpha + eps lambda d_x - eps d_xx) u_{h0}`, which tends to `h0` as `t -> 0+`.
///
/// The spatial part acts on each mode as multiplication by `eps b_n`, so the
/// result has mode amplitude `c_n (G_n' + 2 g_n G_n)`.
pub fn star_operator(h0: &Profile, ev: &GreenEvaluator, q: &QuadratureSpec, grid: &Grid) -> Result<Field> {
    require_c2(h0)?;
    check_grid(ev, grid)?;
    let basis = ModalBasis::new(ev, q)?;
    let c = project_profile(h0, ev, q, &basis)?;
    let modes = basis.modes();
    Ok(field_from_amplitudes(&basis, grid, Provenance::Linear, |_, t| {
        modes
            .iter()
            .zip(&c)
            .map(|(m, c)| {
                let k = mode_kernel_unchecked(m, t);
                c * (k.cosh_part + m.g_n * k.value)
            })
            .collect()
    }))
}

/// `d/dt` of [`star_operator`], which tends to 0 as `t -> 0+`.
pub fn star_operator_rate(h0: &Profile, ev: &GreenEvaluator, q: &QuadratureSpec, grid: &Grid) -> Result<Field> {
    require_c2(h0)?;
    check_grid(ev, grid)?;
    let basis = ModalBasis::new(ev, q)?;
    let c = project_profile(h0, ev, q, &basis)?;
    let modes = basis.modes();
    Ok(field_from_amplitudes(&basis, grid, Provenance::Linear, |_, t| {
        modes
            .iter()
            .zip(&c)
            .map(|(m, c)| -m.b_n * c * mode_kernel_unchecked(m, t).value)
            .collect()
    }))
}

/// Largest difference between `(lambda d_x - d_xx) u_h` evaluated mode by mode
/// and the convolution `u_{lambda h' - h''}` computed by quadrature.
///
/// The two agree for data vanishing at both ends under the self-adjoint weight.
pub fn taper_identity_defect(h: &Profile, ev: &GreenEvaluator, q: &QuadratureSpec, grid: &Grid) -> Result<f64> {
    require_c2(h)?;
    let d1 = h
        .first_derivative()
        .ok_or_else(|| Error::ProfileRegularityViolation("first derivative missing".into()))?
        .clone();
    let d2 = h.second_derivative().unwrap().clone();
    check_grid(ev, grid)?;
    let basis = ModalBasis::new(ev, q)?;
    let c = project_profile(h, ev, q, &basis)?;
    let lambda = ev.params().lambda();
    let cd = basis.project(|x| lambda * d1(x) - d2(x));
    let modes = basis.modes();
    let lhs = field_from_amplitudes(&basis, grid, Provenance::Linear, |_, t| {
        modes
            .iter()
            .zip(&c)
            .map(|(m, c)| m.b_n * c * mode_kernel_unchecked(m, t).value)
            .collect()
    });
    let rhs = field_from_amplitudes(&basis, grid, Provenance::Linear, |_, t| {
        modes
            .iter()
            .zip(&cd)
            .map(|(m, c)| c * mode_kernel_unchecked(m, t).value)
            .collect()
    });
    lhs.max_abs_diff(&rhs)
}

/// Mode coefficients of a `u`-independent source at every mesh time, negated
/// so they enter the mode equations as right-hand sides.
fn forcing_coefficients(f: &SourceFn, basis: &ModalBasis, times: &[f64]) -> Vec<Vec<f64>> {
    let nodes = basis.nodes();
    par_map(times.len(), |k| {
        let t = times[k];
        let vals: Vec<f64> = nodes.iter().map(|&x| -f.eval(x, t, 0.0)).collect();
        basis.project_values(&vals)
    })
}

fn check_source_projection(f: &SourceFn, ev: &GreenEvaluator, q: &QuadratureSpec, grid: &Grid) -> Result<()> {
    let last = grid.t.last().copied().unwrap_or(0.0);
    for t in [0.0, 0.5 * last, last] {
        check_projection(ev, q, &|x| f.eval(x, t, 0.0))?;
    }
    Ok(())
}

/// `u_f(x, t) = -int_0^t int_0^l f(xi, tau) G(x, xi, t - tau) dxi dtau`.
pub fn convolve_source(f: &SourceFn, ev: &GreenEvaluator, q: &QuadratureSpec, grid: &Grid) -> Result<Field> {
    let zero = Profile::zero(ev.params().length());
    linear_solve(&zero, &zero, f, ev, q, grid)
}

/// Mode amplitudes of the linear solution on a refined time mesh.
pub(crate) struct LinearModal {
    pub basis: ModalBasis,
    pub mesh: TimeMesh,
    pub values: Vec<Vec<f64>>,
}

pub(crate) fn linear_modal(
    h0: &Profile,
    h1: &Profile,
    f: &SourceFn,
    ev: &GreenEvaluator,
    q: &QuadratureSpec,
    grid: &Grid,
) -> Result<LinearModal> {
    if f.depends_on_u() {
        return Err(Error::SourceDependsOnU);
    }
    check_grid(ev, grid)?;
    let basis = ModalBasis::new(ev, q)?;
    let c0 = project_profile(h0, ev, q, &basis)?;
    let c1 = project_profile(h1, ev, q, &basis)?;
    check_source_projection(f, ev, q, grid)?;
    let mesh = TimeMesh::new(&grid.t, q.tau_points)?;
    let forcing = forcing_coefficients(f, &basis, &mesh.times);
    let mut cache = StepCache::new();
    let tr = propagate(basis.modes(), &mut cache, &mesh.times, &c0, &c1, Some(&forcing));
    Ok(LinearModal {
        basis,
        mesh,
        values: tr.values,
    })
}

/// Solution of the linear strip problem with `u(., 0) = h0`, `u_t(., 0) = h1` and source `f`.
///
/// Equal to `u_{h1} + u*_{h0} + u_f`; the three pieces are advanced together
/// as one mode equation per mode.
pub fn linear_solve(
    h0: &Profile,
    h1: &Profile,
    f: &SourceFn,
    ev: &GreenEvaluator,
    q: &QuadratureSpec,
    grid: &Grid,
) -> Result<Field> {
    if h0.regularity() < Regularity::C2 {
        return Err(Error::ProfileRegularityViolation(format!(
            "initial value `{}` declared {:?}, needs C2",
            h0.label(),
            h0.regularity()
        )));
    }
    let lm = linear_modal(h0, h1, f, ev, q, grid)?;
    Ok(field_from_amplitudes(&lm.basis, grid, Provenance::Linear, |j, _| {
        lm.values[lm.mesh.marks[j]].clone()
    }))
}

/// Mode-`n` data: `h0 = a0 phi_n`, `h1 = a1 phi_n` and `f = (f0 + f1 t) phi_n`,
/// with `phi_n = exp(lambda x / 2) sin(gamma_n x)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModeCoefficients {
    pub h0: f64,
    pub h1: f64,
    pub f0: f64,
    pub f1: f64,
}

/// Closed-form solution for data carried by a single mode.
pub fn single_mode_reference(n: usize, c: ModeCoefficients, p: &Parameters, grid: &Grid) -> Field {
    let m = mode_params(n, p);
    let half_lambda = 0.5 * p.lambda();
    // Particular solution of y'' + 2 g y' + b y = -(f0 + f1 t).
    let lin = -c.f1 / m.b_n;
    let cst = (-c.f0 - 2.0 * m.g_n * lin) / m.b_n;
    let z0 = c.h0 - cst;
    let z1 = c.h1 - lin;
    Field::from_fn(grid, Provenance::Analytic, |x, t| {
        let k = mode_kernel_unchecked(&m, t);
        let y = z0 * (k.cosh_part + m.g_n * k.value) + z1 * k.value + cst + lin * t;
        y * (half_lambda * x).exp() * (m.gamma_n * x).sin()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::WeightMode;
    use std::f64::consts::PI;

    fn unit() -> (Parameters, GreenEvaluator, QuadratureSpec, Grid) {
        let p = Parameters::new(1.0, 1.0, 0.0, PI, 2.0).unwrap();
        let ev = GreenEvaluator::fixed(p, 128, WeightMode::SelfAdjoint);
        (p, ev, QuadratureSpec::default(), Grid::uniform(PI, 21, 2.0, 11))
    }

    #[test]
    fn initial_convolution_of_first_mode() {
        let (_, ev, q, grid) = unit();
        let u = convolve_initial(&Profile::sine_mode(PI, 1, 1.0), &ev, &q, &grid).unwrap();
        let exact = Field::from_fn(&grid, Provenance::Analytic, |x, t| t * (-t).exp() * x.sin());
        assert!(u.max_abs_diff(&exact).unwrap() < 1e-8);
    }

    #[test]
    fn star_operator_needs_second_derivative() {
        let (_, ev, q, grid) = unit();
        let rough = Profile::new(PI, |x| x * (PI - x), Regularity::C1, true).unwrap();
        assert!(matches!(
            star_operator(&rough, &ev, &q, &grid),
            Err(Error::ProfileRegularityViolation(_))
        ));
    }

    #[test]
    fn star_operator_of_first_mode() {
        let (_, ev, q, grid) = unit();
        let u = star_operator(&Profile::sine_mode(PI, 1, 1.0), &ev, &q, &grid).unwrap();
        let exact = Field::from_fn(&grid, Provenance::Analytic, |x, t| (1.0 + t) * (-t).exp() * x.sin());
        assert!(u.max_abs_diff(&exact).unwrap() < 1e-8);
    }

    #[test]
    fn source_convolution_of_first_mode() {
        let (_, ev, q, grid) = unit();
        let f = SourceFn::forcing(|x, _| x.sin());
        let u = convolve_source(&f, &ev, &q, &grid).unwrap();
        let exact = Field::from_fn(&grid, Provenance::Analytic, |x, t| {
            -(1.0 - (1.0 + t) * (-t).exp()) * x.sin()
        });
        assert!(u.max_abs_diff(&exact).unwrap() < 1e-8);
    }

    #[test]
    fn nonlinear_source_is_rejected() {
        let (_, ev, q, grid) = unit();
        assert_eq!(
            convolve_source(&SourceFn::linear_in_u(-1.0), &ev, &q, &grid).unwrap_err(),
            Error::SourceDependsOnU
        );
    }

    #[test]
    fn endpoint_violation_is_reported() {
        let (_, ev, q, grid) = unit();
        let h = Profile::new(PI, |x| 1.0 + x, Regularity::Smooth, false).unwrap();
        assert!(matches!(
            convolve_initial(&h, &ev, &q, &grid),
            Err(Error::ProfileEndpointViolation { .. })
        ));
    }

    #[test]
    fn single_mode_reference_matches_solver_with_taper() {
        let p = Parameters::new(0.6, 0.4, 0.5, 2.0, 1.5).unwrap();
        let ev = GreenEvaluator::fixed(p, 128, WeightMode::SelfAdjoint);
        let q = QuadratureSpec::default();
        let grid = Grid::uniform(2.0, 17, 1.5, 16);
        let phi = |a: f64| Profile::tapered_sine_mode(2.0, 0.5, 2, a);
        let k = PI;
        let f = SourceFn::forcing(move |x, t| (0.3 - 0.2 * t) * (0.25 * x).exp() * (k * x).sin());
        let u = linear_solve(&phi(0.7), &phi(-0.4), &f, &ev, &q, &grid).unwrap();
        let c = ModeCoefficients {
            h0: 0.7,
            h1: -0.4,
            f0: 0.3,
            f1: -0.2,
        };
        let r = single_mode_reference(2, c, &p, &grid);
        assert!(u.max_abs_diff(&r).unwrap() < 1e-7);
    }
}
