use std::f64::consts::PI;

use esjj::decay::fit_line;
use esjj::kernel::{combined_mode_coefficient, mode_kernel, truncation_tail_bound};
use esjj::{mode_params, GreenEvaluator, Parameters, WeightMode};
use proptest::prelude::*;

fn params(a: f64, e: f64, l: f64, len: f64) -> Parameters {
    Parameters::new(a, e, l, len, 10.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn self_adjoint_kernel_is_symmetric_after_reweighting(
        a in 0.05f64..2.0, e in 0.05f64..2.0, lam in 0.0f64..1.0, len in 1.0f64..6.0,
        fx in 0.05f64..0.95, fxi in 0.05f64..0.95, t in 0.05f64..5.0,
    ) {
        let p = params(a, e, lam, len);
        let ev = GreenEvaluator::fixed(p, 64, WeightMode::SelfAdjoint);
        let (x, xi) = (fx * len, fxi * len);
        let g = ev.green_eval(x, xi, t).unwrap();
        let swapped = ev.green_eval(xi, x, t).unwrap() * (lam * (x - xi)).exp();
        prop_assert!((g - swapped).abs() <= 1e-12 * (1.0 + g.abs()), "{g} vs {swapped}");
    }

    #[test]
    fn time_derivatives_match_central_differences(
        a in 0.05f64..2.0, e in 0.05f64..2.0, lam in 0.0f64..1.0,
        fx in 0.1f64..0.9, fxi in 0.1f64..0.9, t in 0.2f64..4.0,
    ) {
        let p = params(a, e, lam, PI);
        let ev = GreenEvaluator::fixed(p, 32, WeightMode::SelfAdjoint);
        let (x, xi) = (fx * PI, fxi * PI);
        let h = 1e-4;
        let g = |s: f64| ev.green_eval(x, xi, s).unwrap();
        let gt = |s: f64| ev.green_dt(x, xi, s, 1).unwrap();
        let fd1 = (g(t + h) - g(t - h)) / (2.0 * h);
        let fd2 = (gt(t + h) - gt(t - h)) / (2.0 * h);
        prop_assert!((fd1 - gt(t)).abs() <= 1e-6 * (1.0 + fd1.abs()));
        let gtt = ev.green_dt(x, xi, t, 2).unwrap();
        prop_assert!((fd2 - gtt).abs() <= 1e-5 * (1.0 + fd2.abs()));
    }
}

#[test]
fn weights_coincide_without_taper() {
    let p = params(0.7, 0.3, 0.0, 2.0);
    let a = GreenEvaluator::fixed(p, 40, WeightMode::SelfAdjoint);
    let b = GreenEvaluator::fixed(p, 40, WeightMode::ObserverOnly);
    for &(x, xi, t) in &[(0.3, 1.1, 0.2), (1.7, 0.4, 2.5)] {
        assert_eq!(a.green_eval(x, xi, t).unwrap(), b.green_eval(x, xi, t).unwrap());
    }
}

#[test]
fn tail_bound_dominates_brute_force_tail() {
    for (a, e, lam, len) in [(1.0, 1.0, 0.0, PI), (0.2, 0.05, 0.5, 2.0), (2.0, 0.5, 1.0, 5.0)] {
        let p = params(a, e, lam, len);
        let pre = 2.0 / len * (0.5 * lam * len).exp();
        for &t_min in &[0.1, 0.5] {
            for &n_from in &[10usize, 50] {
                let bound = truncation_tail_bound(&p, t_min, n_from).unwrap();
                let ts: Vec<f64> = (0..200).map(|k| t_min * (1.0 + 0.05 * k as f64)).collect();
                let brute = ts
                    .iter()
                    .map(|&t| {
                        (n_from..n_from + 20_000)
                            .map(|n| pre * mode_kernel(&mode_params(n, &p), t).unwrap().abs())
                            .sum::<f64>()
                    })
                    .fold(0.0, f64::max);
                assert!(
                    brute <= bound,
                    "{:?} t_min {t_min} n {n_from}: {brute} > {bound}",
                    (a, e, lam, len)
                );
            }
        }
    }
}

#[test]
fn combined_coefficient_decays_at_least_quadratically() {
    let p = params(0.5, 0.2, 0.3, 2.0);
    let ns: Vec<usize> = (20..=200).step_by(10).collect();
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    for &t in &[0.5, 2.0] {
        let ys: Vec<f64> = ns
            .iter()
            .map(|&n| combined_mode_coefficient(&mode_params(n, &p), &p, t).abs().ln())
            .collect();
        let slope = fit_line(&xs, &ys).slope;
        assert!(slope <= -2.0, "t {t}: slope {slope}");
    }
}

#[test]
fn more_modes_change_the_kernel_less_than_the_tail_bound() {
    let p = params(1.0, 1.0, 0.3, PI);
    let small = GreenEvaluator::fixed(p, 20, WeightMode::SelfAdjoint);
    let large = GreenEvaluator::fixed(p, 400, WeightMode::SelfAdjoint);
    let bound = truncation_tail_bound(&p, 0.3, 21).unwrap();
    for &(x, xi) in &[(0.4, 2.0), (1.5, 1.6), (2.9, 0.2)] {
        let d = (small.green_eval(x, xi, 0.3).unwrap() - large.green_eval(x, xi, 0.3).unwrap()).abs();
        assert!(d <= bound, "{d} > {bound}");
    }
}
