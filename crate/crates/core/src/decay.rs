//! Least-squares decay-rate fits and small-time extrapolation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;

/// Values below this are treated as underflow by the rate fit.
pub const UNDERFLOW_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ~ intercept + slope x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r_squared = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub r_squared: f64,
}

/// Slope of `log sup_x |u(., t)|` over grid times in `[t_lo, t_hi]`.
pub fn decay_rate_estimate(u: &Field, t_lo: f64, t_hi: f64) -> Result<DecayFit> {
    if !(t_hi > t_lo) {
        return Err(Error::WindowTooShort { lo: t_lo, hi: t_hi });
    }
    let sups = u.sup_in_space();
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    for (&t, &s) in u.t_grid.iter().zip(&sups) {
        if t < t_lo || t > t_hi {
            continue;
        }
        if s <= UNDERFLOW_FLOOR {
            return Err(Error::Underflow { t, value: s });
        }
        ts.push(t);
        logs.push(s.ln());
    }
    if ts.len() < 3 {
        return Err(Error::WindowTooShort { lo: t_lo, hi: t_hi });
    }
    let fit = fit_line(&ts, &logs);
    Ok(DecayFit {
        rate: fit.slope,
        r_squared: fit.r_squared,
    })
}

/// Slope of `log` of the running upper envelope of `|values|`.
///
/// The envelope at `t_k` is `max_{j >= k} |values_j|`, so zero crossings of an
/// oscillating signal do not pull the fit down. Non-positive envelope values are skipped.
pub fn envelope_slope(ts: &[f64], values: &[f64]) -> f64 {
    let mut env = vec![0.0f64; values.len()];
    let mut running = 0.0f64;
    for k in (0..values.len()).rev() {
        running = running.max(values[k].abs());
        env[k] = running;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = ts
        .iter()
        .zip(&env)
        .filter(|(_, e)| **e > 0.0)
        .map(|(t, e)| (*t, e.ln()))
        .unzip();
    if xs.len() < 2 {
        return 0.0;
    }
    fit_line(&xs, &ys).slope
}

/// Second-order Richardson extrapolation to `t = 0` from samples at `h`, `2h`, `4h`.
pub fn richardson_to_zero(at_h: f64, at_2h: f64, at_4h: f64) -> f64 {
    (8.0 * at_h - 6.0 * at_2h + at_4h) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Grid, Provenance};

    #[test]
    fn line_fit_recovers_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let f = fit_line(&xs, &ys);
        assert!((f.slope + 0.5).abs() < 1e-15 && (f.intercept - 2.0).abs() < 1e-15);
        assert!((f.r_squared - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rate_of_exponential_mode() {
        let grid = Grid::uniform(std::f64::consts::PI, 33, 10.0, 101);
        let u = Field::from_fn(&grid, Provenance::Analytic, |x, t| (-t).exp() * x.sin());
        let fit = decay_rate_estimate(&u, 5.0, 10.0).unwrap();
        assert!((fit.rate + 1.0).abs() < 1e-3, "{}", fit.rate);
        let flat = Field::from_fn(&grid, Provenance::Analytic, |_, _| 0.3);
        assert!(decay_rate_estimate(&flat, 5.0, 10.0).unwrap().rate.abs() < 1e-12);
    }

    #[test]
    fn rate_errors() {
        let grid = Grid::uniform(1.0, 3, 10.0, 11);
        let u = Field::from_fn(&grid, Provenance::Analytic, |_, t| (-5.0 * t).exp());
        let slow = Field::from_fn(&grid, Provenance::Analytic, |_, t| (-t).exp());
        assert!(matches!(
            decay_rate_estimate(&slow, 6.0, 6.5),
            Err(Error::WindowTooShort { .. })
        ));
        assert!(matches!(
            decay_rate_estimate(&u, 5.0, 5.0),
            Err(Error::WindowTooShort { .. })
        ));
        assert!(matches!(
            decay_rate_estimate(&u, 5.0, 10.0),
            Err(Error::Underflow { .. })
        ));
    }

    #[test]
    fn envelope_ignores_zero_crossings() {
        let ts: Vec<f64> = (0..400).map(|k| k as f64 * 0.05).collect();
        let vs: Vec<f64> = ts.iter().map(|t| (-0.3 * t).exp() * (3.0 * t).cos()).collect();
        assert!((envelope_slope(&ts, &vs) + 0.3).abs() < 0.02);
    }

    #[test]
    fn richardson_is_exact_for_quadratics() {
        let f = |t: f64| 1.5 - 2.0 * t + 7.0 * t * t;
        let h = 1e-3;
        assert!((richardson_to_zero(f(h), f(2.0 * h), f(4.0 * h)) - 1.5).abs() < 1e-12);
    }
}
