//! Blow-up constants `c` with `B(c) = -6c`, obtained from the minimum of
//! `V` on the sphere sector.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interaction::{
    b_coefficients, b_unchecked, grad_v, hessian_v, kappa, potential_v, PointConfig,
};
use crate::numerics::report::CheckReport;
use crate::numerics::sphere::minimize_on_sphere_sector;

/// Tolerance of the fixed-point certificate `max_k |B_k(c) + 6c_k| / |c|`.
pub const FIXED_POINT_TOL: f64 = 1e-10;
/// Smallest admissible tangential curvature at the minimizer.
pub const CURVATURE_TOL: f64 = 1e-8;
pub const DEFAULT_MULTISTART: usize = 16;
pub const DEFAULT_SEED: u64 = 20_240_501;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupConstants {
    pub theta: Vec<f64>,
    pub n: f64,
    pub r: f64,
    pub c: Vec<f64>,
    pub residual: f64,
    #[serde(rename = "V_min")]
    pub v_min: f64,
}

impl BlowupConstants {
    /// `|c|`.
    pub fn c_norm(&self) -> f64 {
        self.c.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Minimizes `V` on `S_+^{K-1}`, sets `n = -θ·∇V(θ)`, `c = (6/n)θ`, then
/// polishes `c` by Newton on `B(c) + 6c = 0` and recomputes `θ, n, r` from it.
pub fn compute_constants(
    config: &PointConfig,
    multistart: usize,
    seed: u64,
) -> Result<BlowupConstants> {
    let k = config.k();
    if k < 2 {
        return Err(Error::input(format!(
            "at least two sites are required, got {k}"
        )));
    }
    let min = minimize_on_sphere_sector(
        |t: &[f64]| potential_v(config, t),
        |t: &[f64]| grad_v(config, t),
        k,
        multistart,
        seed,
    )?;
    let theta = min.theta;
    let n0 = -theta
        .iter()
        .zip(grad_v(config, &theta))
        .map(|(a, b)| a * b)
        .sum::<f64>();
    if n0 <= 0.0 {
        return Err(Error::Sign(n0));
    }
    let mut c: Vec<f64> = theta.iter().map(|t| 6.0 / n0 * t).collect();
    newton_fixed_point(config, &mut c);
    if c.iter().any(|&x| x <= 0.0) {
        return Err(Error::BoundaryMinimizer {
            starts: multistart,
            min_component: c.iter().copied().fold(f64::INFINITY, f64::min),
        });
    }
    let r = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    let theta: Vec<f64> = c.iter().map(|x| x / r).collect();
    let n = 6.0 / r;
    let residual = fixed_point_residual(config, &c);
    let v_min = potential_v(config, &theta);
    Ok(BlowupConstants {
        theta,
        n,
        r,
        c,
        residual,
        v_min,
    })
}

fn newton_fixed_point(config: &PointConfig, c: &mut [f64]) {
    let k = c.len();
    let kap = kappa();
    for _ in 0..20 {
        let b = b_unchecked(config, c);
        let f = DVector::from_iterator(k, (0..k).map(|i| b[i] + 6.0 * c[i]));
        let scale = c.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if f.amax() <= 1e-16 * scale {
            break;
        }
        let mut jac = DMatrix::zeros(k, k);
        for i in 0..k {
            jac[(i, i)] = b[i] / (2.0 * c[i]) + 6.0;
            for j in 0..k {
                if j != i {
                    jac[(i, j)] = -1.5 * kap * (c[i] * c[j]).sqrt() / config.dist[i][j].powi(3);
                }
            }
        }
        let Some(delta) = jac.lu().solve(&f) else {
            break;
        };
        let trial: Vec<f64> = c.iter().zip(delta.iter()).map(|(x, d)| x - d).collect();
        if trial.iter().any(|&x| x <= 0.0 || !x.is_finite()) {
            break;
        }
        c.copy_from_slice(&trial);
    }
}

fn fixed_point_residual(config: &PointConfig, c: &[f64]) -> f64 {
    let b = b_unchecked(config, c);
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    b.iter()
        .zip(c)
        .map(|(bi, ci)| (bi + 6.0 * ci).abs())
        .fold(0.0, f64::max)
        / norm
}

/// `max_k |B_k(c) + 6c_k| / |c|` against [`FIXED_POINT_TOL`].
pub fn certify_fixed_point(config: &PointConfig, c: &[f64]) -> Result<CheckReport> {
    b_coefficients(config, c)?;
    Ok(CheckReport::at_most(
        "fixed_point_residual",
        fixed_point_residual(config, c),
        FIXED_POINT_TOL,
    ))
}

/// Orthonormal basis of the complement of the unit vector `theta`.
fn tangent_basis(theta: &[f64]) -> DMatrix<f64> {
    let k = theta.len();
    let mut basis: Vec<DVector<f64>> = vec![DVector::from_column_slice(theta)];
    for i in 0..k {
        if basis.len() == k {
            break;
        }
        let mut v = DVector::zeros(k);
        v[i] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v -= b * c;
            }
        }
        if v.norm() > 1e-8 {
            basis.push(v.normalize());
        }
    }
    DMatrix::from_columns(&basis[1..])
}

/// Eigenvalues of the Riemannian Hessian `Qᵀ(∇²V + nI)Q` of `V` on the
/// sphere at an interior critical point, `Q` spanning the tangent space.
pub fn tangential_hessian_eigenvalues(config: &PointConfig, theta: &[f64]) -> Vec<f64> {
    let k = theta.len();
    if k < 2 {
        return Vec::new();
    }
    let n = -theta
        .iter()
        .zip(grad_v(config, theta))
        .map(|(a, b)| a * b)
        .sum::<f64>();
    let h = hessian_v(config, theta);
    let hm = DMatrix::from_fn(k, k, |i, j| h[i][j] + if i == j { n } else { 0.0 });
    let q = tangent_basis(theta);
    let red = q.transpose() * hm * &q;
    let red = (&red + red.transpose()) * 0.5;
    let mut ev: Vec<f64> = red.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Local-minimum certificate: the smallest tangential curvature must be at
/// least `-10^{-8}`. A saddle is reported as an error.
pub fn second_order_check(config: &PointConfig, theta: &[f64]) -> Result<CheckReport> {
    if theta.len() != config.k() {
        return Err(Error::input("θ must have one entry per site"));
    }
    if theta.iter().any(|&t| t <= 0.0) {
        return Err(Error::input("θ must be interior"));
    }
    let ev = tangential_hessian_eigenvalues(config, theta);
    let min = ev.first().copied().unwrap_or(0.0);
    if min < -CURVATURE_TOL {
        return Err(Error::Saddle(min));
    }
    Ok(CheckReport::at_least(
        "tangential_curvature",
        min,
        -CURVATURE_TOL,
    ))
}

/// For each `k`, the boundary point obtained from `theta` by zeroing `θ_k`
/// and renormalizing, pushed back inside along
/// `θ(a) = ((1 - a^{4/3})^{1/2} θ_j, …, a^{2/3} at k, …)`. Returns
/// `v'(0) = -(2/3)κ Σ_{j≠k} θ_j^{3/2} |z_j - z_k|^{-3}` for each `k`; all
/// entries negative means no boundary point is a minimizer.
pub fn boundary_repulsion(config: &PointConfig, theta: &[f64]) -> Result<Vec<f64>> {
    let kk = config.k();
    if theta.len() != kk || kk < 2 {
        return Err(Error::input("need K ≥ 2 and one θ entry per site"));
    }
    let kap = kappa();
    (0..kk)
        .map(|k| {
            let mut b: Vec<f64> = theta.to_vec();
            b[k] = 0.0;
            let nrm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nrm == 0.0 {
                return Err(Error::input("θ has a single nonzero component"));
            }
            Ok(-2.0 / 3.0
                * kap
                * (0..kk)
                    .filter(|&j| j != k)
                    .map(|j| (b[j] / nrm).powf(1.5) / config.dist[j][k].powi(3))
                    .sum::<f64>())
        })
        .collect()
}

/// Brute-force minimum of `V` on a uniform angular grid, for `K ∈ {2, 3}`.
pub fn grid_search_minimum(config: &PointConfig, steps: usize) -> Result<(Vec<f64>, f64)> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut best = (Vec::new(), f64::INFINITY);
    let mut consider = |t: Vec<f64>| {
        let v = potential_v(config, &t);
        if v < best.1 {
            best = (t, v);
        }
    };
    match config.k() {
        2 => {
            for i in 0..=steps {
                let p = half_pi * i as f64 / steps as f64;
                consider(vec![p.cos(), p.sin()]);
            }
        }
        3 => {
            for i in 0..=steps {
                let a = half_pi * i as f64 / steps as f64;
                for j in 0..=steps {
                    let p = half_pi * j as f64 / steps as f64;
                    consider(vec![a.sin() * p.cos(), a.sin() * p.sin(), a.cos()]);
                }
            }
        }
        k => {
            return Err(Error::Unsupported(format!(
                "grid search implemented for K = 2, 3, got {k}"
            )))
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::DIM;

    #[test]
    fn two_sites_closed_form() {
        let cfg = PointConfig::pair(1.0).unwrap();
        let bc = compute_constants(&cfg, DEFAULT_MULTISTART, DEFAULT_SEED).unwrap();
        let exact = 6.0 / kappa();
        for c in &bc.c {
            assert!((c - exact).abs() <= 1e-10 * exact);
        }
        assert!((exact - 0.266161).abs() < 1e-6);
        assert!(bc.residual <= FIXED_POINT_TOL);
        assert!(certify_fixed_point(&cfg, &bc.c).unwrap().pass);
        let doubled: Vec<f64> = bc.c.iter().map(|x| 2.0 * x).collect();
        assert!(!certify_fixed_point(&cfg, &doubled).unwrap().pass);
        assert!((bc.r - bc.c_norm()).abs() < 1e-15);
        assert!((bc.n * bc.r - 6.0).abs() < 1e-12);
    }

    #[test]
    fn equilateral_closed_form() {
        let cfg = PointConfig::equilateral(1.0).unwrap();
        let bc = compute_constants(&cfg, DEFAULT_MULTISTART, DEFAULT_SEED).unwrap();
        for c in &bc.c {
            assert!((c - 3.0 / kappa()).abs() <= 1e-10 * c);
        }
        let (g, _) = grid_search_minimum(&cfg, 200).unwrap();
        for (a, b) in g.iter().zip(&bc.theta) {
            assert!((a - b).abs() < 2e-2);
        }
        let ev = tangential_hessian_eigenvalues(&cfg, &bc.theta);
        assert_eq!(ev.len(), 2);
        assert!(ev.iter().all(|&e| e >= 0.0));
    }

    #[test]
    fn collinear_middle_is_largest() {
        let mut z = vec![[0.0; DIM]; 3];
        z[1][0] = 1.0;
        z[2][0] = 2.0;
        let cfg = PointConfig::new(z).unwrap();
        let bc = compute_constants(&cfg, DEFAULT_MULTISTART, DEFAULT_SEED).unwrap();
        assert!(bc.residual <= FIXED_POINT_TOL);
        assert!(bc.c[1] > bc.c[0] && bc.c[1] > bc.c[2]);
        let (g, _) = grid_search_minimum(&cfg, 300).unwrap();
        for (a, b) in g.iter().zip(&bc.theta) {
            assert!((a - b).abs() < 2e-2);
        }
    }

    #[test]
    fn needs_two_sites() {
        let cfg = PointConfig::new(vec![[0.0; DIM]]).unwrap();
        assert!(compute_constants(&cfg, 4, 0).is_err());
    }

    #[test]
    fn second_order_for_pair() {
        let cfg = PointConfig::pair(1.0).unwrap();
        let s = 0.5f64.sqrt();
        let rep = second_order_check(&cfg, &[s, s]).unwrap();
        assert!(rep.pass && rep.measured > 0.0);
        // arc oracle: d²/dφ² V(cos φ, sin φ) at π/4
        let v = |p: f64| potential_v(&cfg, &[p.cos(), p.sin()]);
        let h = 1e-4;
        let p = std::f64::consts::FRAC_PI_4;
        let fd = (v(p + h) - 2.0 * v(p) + v(p - h)) / (h * h);
        assert!((fd - rep.measured).abs() < 1e-5 * fd.abs());
    }

    #[test]
    fn boundary_repulsion_matches_curve_derivative() {
        let cfg = PointConfig::equilateral(1.0).unwrap();
        let th = [0.5, 0.7, 0.51];
        let th: Vec<f64> = {
            let n = th.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
            th.iter().map(|x| x / n).collect()
        };
        let rep = boundary_repulsion(&cfg, &th).unwrap();
        for (k, &d) in rep.iter().enumerate() {
            assert!(d < 0.0);
            let mut b = th.clone();
            b[k] = 0.0;
            let n = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            b.iter_mut().for_each(|x| *x /= n);
            let curve = |a: f64| {
                let mut t: Vec<f64> = b
                    .iter()
                    .map(|x| (1.0 - a.powf(4.0 / 3.0)).sqrt() * x)
                    .collect();
                t[k] = a.powf(2.0 / 3.0);
                potential_v(&cfg, &t)
            };
            // next correction is O(a^{1/3}) from the (1 - a^{4/3}) factors
            let h = 1e-10;
            let fd = (curve(h) - curve(0.0)) / h;
            assert!((fd - d).abs() < 5e-3 * d.abs(), "{fd} vs {d}");
        }
    }
}
