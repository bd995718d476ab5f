use std::f64::consts::PI;

use esjj::fd::{discrete_operator_residual, FdGrid, FdScheme};
use esjj::linear::{convolve_initial, taper_identity_defect};
use esjj::picard::InitialIterate;
use esjj::*;

fn setup(a: f64, e: f64, lam: f64, len: f64, horizon: f64) -> (Parameters, GreenEvaluator, QuadratureSpec) {
    let p = Parameters::new(a, e, lam, len, horizon).unwrap();
    let ev = GreenEvaluator::with_default_truncation(p, WeightMode::SelfAdjoint);
    (p, ev, QuadratureSpec::default())
}

#[test]
fn taper_identity_holds_for_smooth_data() {
    for lam in [0.0, 0.4, 1.0] {
        let (_, ev, q) = setup(0.8, 0.3, lam, 2.5, 2.0);
        let grid = Grid::uniform(2.5, 17, 2.0, 9);
        let h = Profile::bump(2.5, 1.0, 4);
        let d = taper_identity_defect(&h, &ev, &q, &grid).unwrap();
        assert!(d < 1e-6, "lambda {lam}: {d}");
    }
}

#[test]
fn linear_solve_is_linear_in_the_data() {
    let (_, ev, q) = setup(0.5, 0.2, 0.6, PI, 3.0);
    let grid = Grid::uniform(PI, 21, 3.0, 16);
    let h0 = Profile::bump(PI, 1.0, 3);
    let g0 = Profile::sine_mode(PI, 3, 0.4);
    let h1 = Profile::sine_mode(PI, 1, 0.7);
    let f = SourceFn::decaying_mode(PI, 2, 0.5, 0.1);
    let zero = Profile::zero(PI);
    let full = linear_solve(&h0.combine(2.0, &g0, -3.0), &h1, &f, &ev, &q, &grid).unwrap();
    let a = linear_solve(&h0, &zero, &SourceFn::zero(), &ev, &q, &grid).unwrap();
    let b = linear_solve(&g0, &zero, &SourceFn::zero(), &ev, &q, &grid).unwrap();
    let c = linear_solve(&zero, &h1, &SourceFn::zero(), &ev, &q, &grid).unwrap();
    let d = convolve_source(&f, &ev, &q, &grid).unwrap();
    let sum = a
        .combine(2.0, &b, -3.0)
        .unwrap()
        .combine(1.0, &c, 1.0)
        .unwrap()
        .combine(1.0, &d, 1.0)
        .unwrap();
    assert!(full.max_abs_diff(&sum).unwrap() < 1e-12);
}

#[test]
fn initial_convolution_starts_at_zero_and_respects_boundaries() {
    let (_, ev, q) = setup(1.0, 0.5, 0.3, 2.0, 1.0);
    let grid = Grid::uniform(2.0, 11, 1.0, 11);
    let u = convolve_initial(&Profile::bump(2.0, 1.0, 3), &ev, &q, &grid).unwrap();
    assert!(u.time_slice(0).iter().all(|v| v.abs() < 1e-12));
    assert!(u.satisfies_boundary());
}

#[test]
fn linear_solution_satisfies_the_discrete_operator_at_second_order() {
    let (p, ev, q) = setup(0.5, 0.2, 0.5, PI, 1.0);
    // Untapered sines have lambda h0' != 0 at the walls, a corner incompatibility
    // that caps the max-norm order at one; tapered modes avoid it.
    let h0 = Profile::tapered_sine_mode(PI, 0.5, 1, 1.0);
    let h1 = Profile::tapered_sine_mode(PI, 0.5, 2, 0.5);
    let mut prev = f64::INFINITY;
    for n in [21usize, 41, 81] {
        let grid = Grid::uniform(PI, n, 1.0, n);
        let u = linear_solve(&h0, &h1, &SourceFn::zero(), &ev, &q, &grid).unwrap();
        let r = discrete_operator_residual(&u, &SourceFn::zero(), &p).unwrap();
        if prev.is_finite() {
            assert!(prev / r > 3.5, "{prev} -> {r}");
        }
        prev = r;
    }
}

#[test]
fn fd_schemes_agree_and_converge_in_time() {
    let (p, _, _) = setup(1.0, 0.5, 0.4, PI, 1.0);
    let h0 = Profile::bump(PI, 1.0, 3);
    let h1 = Profile::zero(PI);
    let f = SourceFn::forcing(|x, t| (-t).exp() * x.sin());
    let ts = [0.25, 0.5, 1.0];
    let run = |dt: f64, scheme| {
        fd_solve(
            &h0,
            &h1,
            &f,
            &p,
            &FdGrid {
                nx: 49,
                dt,
                t_end: 1.0,
                scheme,
            },
            &ts,
        )
        .unwrap()
    };
    let rk = run(2e-4, FdScheme::ExplicitRK4);
    let e1 = compare_fields(&run(0.02, FdScheme::SemiImplicit), &rk).unwrap().linf;
    let e2 = compare_fields(&run(0.01, FdScheme::SemiImplicit), &rk).unwrap().linf;
    assert!(e2 < 1e-3, "{e2}");
    assert!(e1 / e2 > 3.5, "time order: {e1} -> {e2}");
}

#[test]
fn fd_homogeneous_solution_decays() {
    let (p, _, _) = setup(1.0, 1.0, 0.5, PI, 10.0);
    let ts: Vec<f64> = (0..=20).map(|k| 0.5 * k as f64).collect();
    let g = FdGrid {
        nx: 63,
        dt: 5e-3,
        t_end: 10.0,
        scheme: FdScheme::SemiImplicit,
    };
    let u = fd_solve(
        &Profile::bump(PI, 1.0, 3),
        &Profile::zero(PI),
        &SourceFn::zero(),
        &p,
        &g,
        &ts,
    )
    .unwrap();
    let sups = u.sup_in_space();
    assert!(sups[20] < 0.05 * sups[0]);
    assert!(sups.windows(2).skip(2).all(|w| w[1] <= w[0]));
}

#[test]
fn fd_field_round_trips_through_csv() {
    let (p, _, _) = setup(1.0, 1.0, 0.0, PI, 0.5);
    let g = FdGrid {
        nx: 15,
        dt: 0.01,
        t_end: 0.5,
        scheme: FdScheme::SemiImplicit,
    };
    let u = fd_solve(
        &Profile::sine_mode(PI, 1, 1.0),
        &Profile::zero(PI),
        &SourceFn::zero(),
        &p,
        &g,
        &[0.1, 0.5],
    )
    .unwrap();
    let mut buf = Vec::new();
    u.write_csv(&mut buf).unwrap();
    let back = Field::read_csv(buf.as_slice(), Provenance::Oracle).unwrap();
    assert_eq!(back.max_abs_diff(&u).unwrap(), 0.0);
}

#[test]
fn shorter_windows_contract_faster() {
    let (_, ev, q) = setup(1.0, 1.0, 0.0, PI, 4.0);
    let grid = Grid::uniform(PI, 17, 4.0, 41);
    let h0 = Profile::bump(PI, 0.3, 3);
    let zero = Profile::zero(PI);
    let f = sine_gordon_source(0.3);
    let ratio = |w: f64| {
        let cfg = PicardConfig {
            window: Some(w),
            initial: InitialIterate::Zero,
            ..PicardConfig::default()
        };
        let (_, r) = picard_solve(&h0, &zero, &f, &ev, &q, &grid, &cfg).unwrap();
        assert!(r.converged);
        r.contraction_ratio
    };
    let (long, short) = (ratio(4.0), ratio(1.0));
    assert!(long < 1.0 && short < long, "{short} vs {long}");
}

#[test]
fn damped_iteration_reaches_the_same_fixed_point() {
    let (_, ev, q) = setup(1.0, 1.0, 0.2, PI, 2.0);
    let grid = Grid::uniform(PI, 17, 2.0, 21);
    let h0 = Profile::bump(PI, 0.5, 3);
    let zero = Profile::zero(PI);
    let f = sine_gordon_source(-0.4);
    let (a, _) = picard_solve(&h0, &zero, &f, &ev, &q, &grid, &PicardConfig::default()).unwrap();
    let damped = PicardConfig {
        damping: 0.6,
        ..PicardConfig::default()
    };
    let (b, rb) = picard_solve(&h0, &zero, &f, &ev, &q, &grid, &damped).unwrap();
    assert!(rb.converged);
    assert!(a.max_abs_diff(&b).unwrap() < 1e-8);
}

#[test]
fn sine_gordon_source_is_lipschitz_with_unit_constant() {
    let f = sine_gordon_source(0.7);
    let worst = f.check_lipschitz(PI, 5.0, 4.0, 2000, 7).unwrap();
    assert!(worst <= 1.0);
    assert_eq!(f.sup_bound(), Some(1.7));
}

#[test]
fn picard_agrees_with_fd_for_sine_gordon() {
    let (p, ev, q) = setup(1.0, 1.0, 0.5, PI, 2.0);
    let h0 = Profile::bump(PI, 0.5, 3);
    let zero = Profile::zero(PI);
    let f = sine_gordon_source(0.3);
    let ts: Vec<f64> = (0..=10).map(|k| 0.2 * k as f64).collect();
    let g = FdGrid {
        nx: 199,
        dt: 1e-3,
        t_end: 2.0,
        scheme: FdScheme::SemiImplicit,
    };
    let fd = fd_solve(&h0, &zero, &f, &p, &g, &ts).unwrap();
    let (u, _) = picard_solve(&h0, &zero, &f, &ev, &q, &fd.grid(), &PicardConfig::default()).unwrap();
    let e = compare_fields(&u, &fd).unwrap().linf;
    assert!(e < 1e-4, "{e}");
}
