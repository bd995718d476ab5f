use std::f64::consts::PI;

use esjj::Parameters;
use esjj_wasm::{green_profile_values, run_sine_gordon, spectrum_values};

fn params(lambda: f64) -> Parameters {
    Parameters::new(1.0, 1.0, lambda, PI, 3.0).unwrap()
}

#[test]
fn green_profile_vanishes_at_the_walls() {
    let g = green_profile_values(params(0.5), 1.0, 0.5, 101, true).unwrap();
    assert_eq!(g.len(), 101);
    assert!(g[0].abs() < 1e-12 && g[100].abs() < 1e-12);
    assert!(g.iter().any(|v| v.abs() > 1e-3));
}

#[test]
fn weights_differ_only_with_taper() {
    let a = green_profile_values(params(0.0), 1.0, 0.5, 11, true).unwrap();
    let b = green_profile_values(params(0.0), 1.0, 0.5, 11, false).unwrap();
    assert_eq!(a, b);
    let c = green_profile_values(params(0.8), 1.0, 0.5, 11, false).unwrap();
    let d = green_profile_values(params(0.8), 1.0, 0.5, 11, true).unwrap();
    assert_ne!(c, d);
}

#[test]
fn spectrum_layout() {
    let s = spectrum_values(params(0.0), 3).unwrap();
    assert_eq!(s.len(), 12);
    // Mode 1 of (1, 1, 0, pi): b = 1, g = 1, a double root.
    assert_eq!(&s[..4], &[1.0, 1.0, 0.0, 2.0]);
    assert!(s[4..].chunks(4).all(|m| m[3] == 0.0));
}

#[test]
fn sine_gordon_run_layout_and_contraction() {
    let run = run_sine_gordon(params(0.2), 0.3, 0.5, 17, 13).unwrap();
    assert_eq!(run.values.len(), 17 * 13);
    assert!(run.contraction_ratio < 1.0);
    // First row is the initial bump.
    assert!((run.values[8] - 0.5).abs() < 1e-6);
}

#[test]
fn size_limits_are_enforced() {
    assert!(spectrum_values(params(0.0), 0).is_err());
    assert!(green_profile_values(params(0.0), 1.0, 0.5, 10_000, true).is_err());
    assert!(run_sine_gordon(params(0.0), 0.3, 0.5, 2, 5).is_err());
}
