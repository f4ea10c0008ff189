//! Interaction between bubbles: the coefficients `B_k`, the potential `V` on
//! the sphere sector, two-center integrals and the ansatz energy.

mod energy;
mod pair;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quadrature::{quad_radial, RadialGrid};
use crate::profiles::{lambda_w, w, DIM};

pub use energy::{
    ansatz_energy, ansatz_energy_montecarlo, energy_derivative_check, EnergyBreakdown,
    EnergyDerivativeReport, FD_RELATIVE_STEP,
};
pub use pair::{
    pair_integral, pair_montecarlo, two_center_bipolar, McEstimate, PairKind, PairMethod,
    PairValue, DEFAULT_MC_SAMPLES,
};

/// `κ = 128√15/(7π)`.
pub fn kappa() -> f64 {
    128.0 * 15f64.sqrt() / (7.0 * std::f64::consts::PI)
}

/// `-(7/3) 15^{3/2} ⟨ΛW, W^{4/3}⟩ / ‖ΛW‖²` by radial quadrature.
pub fn kappa_quadrature(grid: &RadialGrid) -> Result<f64> {
    let num = quad_radial(|r| lambda_w(r) * w(r).powf(4.0 / 3.0), grid)?;
    let den = quad_radial(|r| lambda_w(r).powi(2), grid)?;
    Ok(-7.0 / 3.0 * 15f64.powf(1.5) * num / den)
}

/// `‖ΛW‖²_{L²(R^5)}` by radial quadrature on the default grid.
pub fn lambda_w_norm_sq() -> f64 {
    quad_radial(|r| lambda_w(r).powi(2), &RadialGrid::default()).expect("ΛW is finite")
}

/// Blow-up sites `z_1..z_K` in `R^5`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfig {
    pub z: Vec<[f64; DIM]>,
    pub dist: Vec<Vec<f64>>,
    /// Half the smallest pairwise distance; zero when `K = 1`.
    pub d: f64,
}

impl PointConfig {
    pub fn new(z: Vec<[f64; DIM]>) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::input("at least one site is required"));
        }
        if z.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::input("site coordinates must be finite"));
        }
        let k = z.len();
        let mut dist = vec![vec![0.0; k]; k];
        let mut min = f64::INFINITY;
        for i in 0..k {
            for j in i + 1..k {
                let dij = z[i]
                    .iter()
                    .zip(&z[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if dij == 0.0 {
                    return Err(Error::input(format!("sites {i} and {j} coincide")));
                }
                dist[i][j] = dij;
                dist[j][i] = dij;
                min = min.min(dij);
            }
        }
        Ok(Self {
            z,
            dist,
            d: if k > 1 { 0.5 * min } else { 0.0 },
        })
    }

    /// Two sites at the given separation along the first axis.
    pub fn pair(separation: f64) -> Result<Self> {
        let mut b = [0.0; DIM];
        b[0] = separation;
        Self::new(vec![[0.0; DIM], b])
    }

    /// Equilateral triangle with the given side in the first two coordinates.
    pub fn equilateral(side: f64) -> Result<Self> {
        let mut b = [0.0; DIM];
        b[0] = side;
        let mut c = [0.0; DIM];
        c[0] = 0.5 * side;
        c[1] = 0.5 * 3f64.sqrt() * side;
        Self::new(vec![[0.0; DIM], b, c])
    }

    pub fn k(&self) -> usize {
        self.z.len()
    }

    /// Sites multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.z.iter().map(|p| p.map(|v| v * s)).collect())
    }

    /// Sites reordered so that new site `i` is old site `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k() {
            return Err(Error::input("permutation length differs from K"));
        }
        Self::new(perm.iter().map(|&i| self.z[i]).collect())
    }

    /// `Σ_{j≠k} x_j^{3/2} |z_j - z_k|^{-3}`.
    fn sum_over_others(&self, k: usize, x: &[f64]) -> f64 {
        (0..self.k())
            .filter(|&j| j != k)
            .map(|j| x[j].powf(1.5) / self.dist[j][k].powi(3))
            .sum()
    }
}

/// Scales and their time derivatives `(λ, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationVector {
    pub lambda: Vec<f64>,
    pub b: Vec<f64>,
}

impl ModulationVector {
    pub fn new(lambda: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if lambda.len() != b.len() {
            return Err(Error::input("λ and b must have the same length"));
        }
        check_scales(&lambda)?;
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("b must be finite"));
        }
        Ok(Self { lambda, b })
    }
}

/// A point of `S_+^{K-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorPoint {
    pub theta: Vec<f64>,
}

impl SectorPoint {
    /// Accepts `θ ≥ 0` with `|Σθ² - 1| ≤ 10^{-12}` and renormalizes.
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        let n2: f64 = theta.iter().map(|x| x * x).sum();
        if (n2 - 1.0).abs() > 1e-12 {
            return Err(Error::input(format!(
                "θ is not on the unit sphere (|θ|² = {n2})"
            )));
        }
        Self::from_direction(theta)
    }

    /// Normalizes a nonnegative nonzero vector.
    pub fn from_direction(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() || v.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::input(
                "sector points have finite nonnegative components",
            ));
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(Error::input("zero vector has no direction"));
        }
        Ok(Self {
            theta: v.into_iter().map(|x| x / n).collect(),
        })
    }
}

fn check_scales(lambda: &[f64]) -> Result<()> {
    if let Some(l) = lambda.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::input(format!("scales must be positive, got {l}")));
    }
    Ok(())
}

/// `B_k(λ) = -κ λ_k^{1/2} Σ_{j≠k} λ_j^{3/2} |z_j - z_k|^{-3}`.
pub fn b_coefficients(config: &PointConfig, lambda: &[f64]) -> Result<Vec<f64>> {
    if lambda.len() != config.k() {
        return Err(Error::input("λ must have one entry per site"));
    }
    check_scales(lambda)?;
    Ok(b_unchecked(config, lambda))
}

/// [`b_coefficients`] without validation; nonpositive entries give NaN.
pub(crate) fn b_unchecked(config: &PointConfig, lambda: &[f64]) -> Vec<f64> {
    let kap = kappa();
    (0..config.k())
        .map(|k| -kap * lambda[k].sqrt() * config.sum_over_others(k, lambda))
        .collect()
}

/// `V(θ) = -(2/3)κ Σ_{j<k} θ_j^{3/2} θ_k^{3/2} |z_j - z_k|^{-3}`.
pub fn potential_v(config: &PointConfig, theta: &[f64]) -> f64 {
    let kap = kappa();
    let mut acc = 0.0;
    for k in 0..config.k() {
        for j in 0..k {
            acc += (theta[j] * theta[k]).max(0.0).powf(1.5) / config.dist[j][k].powi(3);
        }
    }
    -2.0 / 3.0 * kap * acc
}

/// Euclidean gradient of [`potential_v`]; equals `B(θ)`.
pub fn grad_v(config: &PointConfig, theta: &[f64]) -> Vec<f64> {
    let kap = kappa();
    (0..config.k())
        .map(|k| {
            let s: f64 = (0..config.k())
                .filter(|&j| j != k)
                .map(|j| theta[j].max(0.0).powf(1.5) / config.dist[j][k].powi(3))
                .sum();
            -kap * theta[k].max(0.0).sqrt() * s
        })
        .collect()
}

/// Euclidean Hessian of [`potential_v`] at an interior point.
pub fn hessian_v(config: &PointConfig, theta: &[f64]) -> Vec<Vec<f64>> {
    let kap = kappa();
    let k = config.k();
    let mut h = vec![vec![0.0; k]; k];
    for a in 0..k {
        let s: f64 = (0..k)
            .filter(|&j| j != a)
            .map(|j| theta[j].powf(1.5) / config.dist[j][a].powi(3))
            .sum();
        h[a][a] = -0.5 * kap * s / theta[a].sqrt();
        for b in 0..k {
            if b != a {
                h[a][b] = -1.5 * kap * (theta[a] * theta[b]).sqrt() / config.dist[a][b].powi(3);
            }
        }
    }
    h
}
