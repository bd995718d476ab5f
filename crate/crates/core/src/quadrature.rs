use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum QuadratureRule {
    #[default]
    CompositeSimpson,
    /// Four-point Gauss-Legendre on `xi_points / 4` equal panels.
    GaussLegendreComposite,
}

/// Discretisation of the spatial and temporal convolution integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Simpson: number of subintervals. Gauss-Legendre: number of nodes.
    pub xi_points: usize,
    /// Product-trapezoid steps per unit time.
    pub tau_points: usize,
    pub rule: QuadratureRule,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            xi_points: 256,
            tau_points: 100,
            rule: QuadratureRule::CompositeSimpson,
        }
    }
}

const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

impl QuadratureSpec {
    pub fn new(xi_points: usize, tau_points: usize, rule: QuadratureRule) -> Result<Self> {
        let q = QuadratureSpec {
            xi_points,
            tau_points,
            rule,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.xi_points < 8 {
            return Err(Error::InvalidQuadrature(format!("xi_points = {} < 8", self.xi_points)));
        }
        match self.rule {
            QuadratureRule::CompositeSimpson if !self.xi_points.is_multiple_of(2) => Err(Error::InvalidQuadrature(
                "composite Simpson needs an even xi_points".into(),
            )),
            QuadratureRule::GaussLegendreComposite if !self.xi_points.is_multiple_of(4) => Err(
                Error::InvalidQuadrature("Gauss-Legendre needs xi_points divisible by 4".into()),
            ),
            _ if self.tau_points == 0 => Err(Error::InvalidQuadrature("tau_points must be positive".into())),
            _ => Ok(()),
        }
    }

    /// Same rule at twice the spatial resolution.
    pub fn doubled(&self) -> Self {
        QuadratureSpec {
            xi_points: 2 * self.xi_points,
            ..*self
        }
    }

    /// Highest sine mode the spatial rule integrates without aliasing.
    pub fn max_resolved_mode(&self) -> usize {
        self.xi_points / 2
    }

    /// Nodes and weights on `[0, length]`.
    pub fn nodes_weights(&self, length: f64) -> (Vec<f64>, Vec<f64>) {
        match self.rule {
            QuadratureRule::CompositeSimpson => simpson(length, self.xi_points),
            QuadratureRule::GaussLegendreComposite => gauss_legendre(length, self.xi_points / 4),
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, length: f64, f: F) -> f64 {
        let (nodes, weights) = self.nodes_weights(length);
        crate::sum::compensated_sum(nodes.iter().zip(&weights).map(|(&x, &w)| w * f(x)))
    }
}

fn simpson(length: f64, intervals: usize) -> (Vec<f64>, Vec<f64>) {
    let h = length / intervals as f64;
    let nodes = (0..=intervals).map(|j| j as f64 * h).collect();
    let weights = (0..=intervals)
        .map(|j| {
            let c = if j == 0 || j == intervals {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect();
    (nodes, weights)
}

fn gauss_legendre(length: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let h = length / panels as f64;
    let mut nodes = Vec::with_capacity(4 * panels);
    let mut weights = Vec::with_capacity(4 * panels);
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * h;
        for (z, w) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
            nodes.push(mid + 0.5 * h * z);
            weights.push(0.5 * h * w);
        }
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_specs() {
        assert!(QuadratureSpec::new(6, 10, QuadratureRule::CompositeSimpson).is_err());
        assert!(QuadratureSpec::new(9, 10, QuadratureRule::CompositeSimpson).is_err());
        assert!(QuadratureSpec::new(10, 10, QuadratureRule::GaussLegendreComposite).is_err());
        assert!(QuadratureSpec::new(8, 0, QuadratureRule::CompositeSimpson).is_err());
        assert!(QuadratureSpec::new(8, 1, QuadratureRule::CompositeSimpson).is_ok());
    }

    #[test]
    fn both_rules_integrate_smooth_functions() {
        for rule in [QuadratureRule::CompositeSimpson, QuadratureRule::GaussLegendreComposite] {
            let q = QuadratureSpec::new(64, 10, rule).unwrap();
            let v = q.integrate(PI, |x| x.sin() * x.sin());
            assert!((v - PI / 2.0).abs() < 1e-7, "{rule:?}: {v}");
            let cubic = q.integrate(2.0, |x| x * x * x);
            assert!((cubic - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn simpson_converges_at_fourth_order() {
        let f = |x: f64| (3.0 * x).exp() * x.sin();
        let exact = ((3.0f64 * 1.5).exp() * (3.0 * 1.5f64.sin() - 1.5f64.cos()) + 1.0) / 10.0;
        let e1 = (QuadratureSpec::new(16, 1, QuadratureRule::CompositeSimpson)
            .unwrap()
            .integrate(1.5, f)
            - exact)
            .abs();
        let e2 = (QuadratureSpec::new(32, 1, QuadratureRule::CompositeSimpson)
            .unwrap()
            .integrate(1.5, f)
            - exact)
            .abs();
        assert!(e1 / e2 > 14.0, "ratio {}", e1 / e2);
    }
}
