//! Radial quadrature in `R^5` on a compactified half-line and sampled radial
//! profiles.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::fit::fit_line;
use super::gauss::gauss_on;
use crate::error::{Error, Result};
use crate::profiles::SPHERE_AREA;

/// Variable change behind a [`RadialGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Mapping {
    /// `r = L s / (1 - s)`, `s ∈ [0, s_max]`.
    Algebraic { scale: f64 },
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mapping::Algebraic { scale } => write!(f, "algebraic r = {scale}·s/(1-s)"),
        }
    }
}

/// Composite Gauss–Legendre panels in the mapped variable. Weights carry the
/// radial measure `r⁴ dr`; the sphere area is applied by [`quad_radial`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub r_max: f64,
    pub mapping: Mapping,
}

impl Default for RadialGrid {
    fn default() -> Self {
        Self::algebraic(1.0, 64, 16).expect("default grid parameters are valid")
    }
}

impl RadialGrid {
    /// Covers all of `[0, ∞)`. With an even panel count `r = scale` is a
    /// panel edge.
    pub fn algebraic(scale: f64, panels: usize, order: usize) -> Result<Self> {
        Self::build(scale, 1.0, panels, order)
    }

    /// Covers `[0, r_max]` only.
    pub fn algebraic_truncated(
        scale: f64,
        r_max: f64,
        panels: usize,
        order: usize,
    ) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::input(format!(
                "r_max must be positive and finite, got {r_max}"
            )));
        }
        Self::build(scale, r_max / (scale + r_max), panels, order)
    }

    fn build(scale: f64, s_max: f64, panels: usize, order: usize) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::input(format!(
                "map scale must be positive, got {scale}"
            )));
        }
        if panels == 0 || order == 0 {
            return Err(Error::input(
                "need at least one panel and one node per panel",
            ));
        }
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        let h = s_max / panels as f64;
        for p in 0..panels {
            let (s, w) = gauss_on(order, p as f64 * h, (p + 1) as f64 * h);
            for (si, wi) in s.into_iter().zip(w) {
                let r = scale * si / (1.0 - si);
                let drds = scale / ((1.0 - si) * (1.0 - si));
                nodes.push(r);
                weights.push(wi * drds * r.powi(4));
            }
        }
        let r_max = if s_max >= 1.0 {
            *nodes.last().unwrap()
        } else {
            scale * s_max / (1.0 - s_max)
        };
        Ok(Self {
            nodes,
            weights,
            r_max,
            mapping: Mapping::Algebraic { scale },
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `∫_{R^5} f(|x|) dx` on the grid, including the area `8π²/3` of `S⁴`.
pub fn quad_radial<F: Fn(f64) -> f64>(f: F, grid: &RadialGrid) -> Result<f64> {
    let mut acc = 0.0;
    for (&r, &w) in grid.nodes.iter().zip(&grid.weights) {
        let v = f(r);
        if !v.is_finite() {
            return Err(Error::NonFinite { r });
        }
        acc += v * w;
    }
    Ok(SPHERE_AREA * acc)
}

/// `L²(R^5)` inner product of two radial functions.
pub fn inner<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(f: F, g: G, grid: &RadialGrid) -> Result<f64> {
    quad_radial(|r| f(r) * g(r), grid)
}

/// A radial profile sampled at increasing abscissae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialFunction {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    /// Slope of `ln|v|` against `ln r` over the last decade of nodes, so
    /// that `v ~ r^{tail_exponent}`.
    pub tail_exponent: Option<f64>,
}

/// Minimum number of nodes in the tail-fit window.
pub const TAIL_FIT_MIN_POINTS: usize = 20;

impl RadialFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() || nodes.is_empty() {
            return Err(Error::input(
                "nodes and values must be nonempty and of equal length",
            ));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::input("nodes must be strictly increasing"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { r: nodes[i] });
        }
        Ok(Self {
            nodes,
            values,
            tail_exponent: None,
        })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(nodes: &[f64], f: F) -> Result<Self> {
        Self::new(nodes.to_vec(), nodes.iter().map(|&r| f(r)).collect())
    }

    /// Fits and stores the tail exponent.
    pub fn with_tail_fit(mut self) -> Result<Self> {
        self.tail_exponent = Some(self.fit_tail()?);
        Ok(self)
    }

    /// Log–log least squares over the nodes in `[r_last/10, r_last]`.
    pub fn fit_tail(&self) -> Result<f64> {
        let last = *self.nodes.last().unwrap();
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .nodes
            .iter()
            .zip(&self.values)
            .filter(|(r, _)| **r >= last / 10.0 && **r > 0.0)
            .map(|(r, v)| (r.ln(), v.abs().ln()))
            .unzip();
        if x.len() < TAIL_FIT_MIN_POINTS {
            return Err(Error::Resolution {
                nodes: x.len(),
                required: TAIL_FIT_MIN_POINTS,
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("tail values vanish; exponent undefined"));
        }
        Ok(fit_line(&x, &y)?.slope)
    }

    /// Piecewise-linear interpolation. Below the first node the first value
    /// is used; beyond the last node the fitted power tail, or zero.
    pub fn eval(&self, r: f64) -> f64 {
        let n = self.nodes.len();
        if r <= self.nodes[0] {
            return self.values[0];
        }
        if r >= self.nodes[n - 1] {
            return match self.tail_exponent {
                Some(p) => self.values[n - 1] * (r / self.nodes[n - 1]).powf(p),
                None if r == self.nodes[n - 1] => self.values[n - 1],
                None => 0.0,
            };
        }
        let j = self.nodes.partition_point(|&x| x <= r);
        let (x0, x1) = (self.nodes[j - 1], self.nodes[j]);
        let t = (r - x0) / (x1 - x0);
        self.values[j - 1] * (1.0 - t) + self.values[j] * t
    }

    /// Number of strict sign changes between consecutive samples.
    pub fn sign_changes(&self) -> usize {
        self.values.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{dw, w};
    use std::f64::consts::PI;

    #[test]
    fn unit_ball_volume() {
        let g = RadialGrid::default();
        let v = quad_radial(|r| if r <= 1.0 { 1.0 } else { 0.0 }, &g).unwrap();
        let exact = 8.0 * PI * PI / 15.0;
        assert!(((v - exact) / exact).abs() <= 1e-8, "{v}");
        assert!((exact - 5.26379).abs() < 1e-5);
    }

    #[test]
    fn unit_ball_refinement_at_least_fourfold() {
        let exact = 8.0 * PI * PI / 15.0;
        let errs: Vec<f64> = [2, 4, 8]
            .iter()
            .map(|&p| {
                let g = RadialGrid::algebraic(1.0, p, 2).unwrap();
                (quad_radial(|r| if r <= 1.0 { 1.0 } else { 0.0 }, &g).unwrap() - exact).abs()
            })
            .collect();
        assert!(
            errs[0] / errs[1] >= 4.0 && errs[1] / errs[2] >= 4.0,
            "{errs:?}"
        );
    }

    #[test]
    fn pohozaev_identity() {
        let g = RadialGrid::default();
        let a = quad_radial(|r| w(r).powf(10.0 / 3.0), &g).unwrap();
        let b = quad_radial(|r| dw(r).powi(2), &g).unwrap();
        assert!(((a - b) / a).abs() <= 1e-8);
        let exact = PI.powi(3) * 15f64.powf(2.5) / 32.0;
        assert!(((a - exact) / exact).abs() <= 1e-12);
    }

    #[test]
    fn nonfinite_integrand_reports_location() {
        let g = RadialGrid::default();
        match quad_radial(|r| if r > 2.0 { f64::NAN } else { 1.0 }, &g) {
            Err(Error::NonFinite { r }) => assert!(r > 2.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_grid_reaches_r_max() {
        let g = RadialGrid::algebraic_truncated(1.0, 1e3, 32, 8).unwrap();
        assert!((g.r_max - 1e3).abs() < 1e-9);
        assert!(*g.nodes.last().unwrap() < 1e3);
        assert!(g.weights.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn radial_function_interpolation_and_tail() {
        let nodes: Vec<f64> = (0..200).map(|i| 1.0 + i as f64).collect();
        let f = RadialFunction::from_fn(&nodes, |r| 2.0 / r)
            .unwrap()
            .with_tail_fit()
            .unwrap();
        assert!((f.tail_exponent.unwrap() + 1.0).abs() < 1e-12);
        assert!((f.eval(400.0) - 2.0 / 400.0).abs() < 1e-12);
        assert!((f.eval(1.5) - 0.5 * (2.0 + 1.0)).abs() < 1e-15);
        assert_eq!(f.sign_changes(), 0);
        let short = RadialFunction::from_fn(&nodes[..10], |r| r).unwrap();
        assert!(short.fit_tail().is_err());
    }
}
