//! Minimization on the sphere sector `S_+^{K-1} = {θ ∈ R^K : θ ≥ 0, |θ| = 1}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Components below this are treated as lying on the sector boundary.
pub const BOUNDARY_THRESHOLD: f64 = 1e-6;
/// Target size of the projected gradient.
pub const PROJECTED_GRADIENT_TOL: f64 = 1e-10;
/// Relative gap below which two minima are tied and broken lexicographically.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereMinimum {
    pub theta: Vec<f64>,
    pub value: f64,
    /// Norm of the tangential gradient at `theta`.
    pub projected_gradient: f64,
    /// Final value reached from every start, in start order.
    pub start_values: Vec<f64>,
    /// Number of starts ending in the interior.
    pub interior_starts: usize,
}

/// Multistart projected-gradient descent with Armijo backtracking, started
/// from `|N(0, I)|/|·|` samples, followed by a Newton polish of the
/// Lagrange system `∇V + nθ = 0`, `|θ|² = 1` for interior candidates.
/// Starts run in parallel and are reduced in start order.
pub fn minimize_on_sphere_sector<V, G>(
    objective: V,
    gradient: G,
    k: usize,
    multistart: usize,
    seed: u64,
) -> Result<SphereMinimum>
where
    V: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Sync,
{
    if k == 0 {
        return Err(Error::input("dimension must be at least 1"));
    }
    if k == 1 {
        let theta = vec![1.0];
        let value = objective(&theta);
        return Ok(SphereMinimum {
            theta,
            value,
            projected_gradient: 0.0,
            start_values: vec![value],
            interior_starts: 1,
        });
    }
    if multistart == 0 {
        return Err(Error::input("at least one start is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<f64>> = (0..multistart)
        .map(|_| {
            let mut v: Vec<f64> = (0..k)
                .map(|_| {
                    let x: f64 = StandardNormal.sample(&mut rng);
                    x.abs().max(1e-3)
                })
                .collect();
            normalize(&mut v);
            v
        })
        .collect();

    let results: Vec<(Vec<f64>, f64)> = starts
        .par_iter()
        .map(|s| {
            let mut th = descend(&objective, &gradient, s.clone());
            if th.iter().all(|&x| x > BOUNDARY_THRESHOLD) {
                if let Some(p) = newton_polish(&objective, &gradient, &th) {
                    th = p;
                }
            }
            let v = objective(&th);
            (th, v)
        })
        .collect();

    let interior_starts = results
        .iter()
        .filter(|(t, _)| t.iter().all(|&x| x > BOUNDARY_THRESHOLD))
        .count();
    let start_values: Vec<f64> = results.iter().map(|r| r.1).collect();
    let mut best: Option<&(Vec<f64>, f64)> = None;
    for r in &results {
        best = match best {
            None => Some(r),
            Some(b) => {
                let scale = b.1.abs().max(r.1.abs()).max(f64::MIN_POSITIVE);
                if (r.1 - b.1) < -TIE_TOL * scale {
                    Some(r)
                } else if (r.1 - b.1).abs() <= TIE_TOL * scale && lex_less(&r.0, &b.0) {
                    Some(r)
                } else {
                    Some(b)
                }
            }
        };
    }
    let (theta, value) = best.cloned().unwrap();
    let min_component = theta.iter().copied().fold(f64::INFINITY, f64::min);
    if min_component <= BOUNDARY_THRESHOLD {
        return Err(Error::BoundaryMinimizer {
            starts: multistart,
            min_component,
        });
    }
    let projected_gradient = norm(&tangential(&gradient(&theta), &theta));
    Ok(SphereMinimum {
        theta,
        value,
        projected_gradient,
        start_values,
        interior_starts,
    })
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) {
    let n = norm(v);
    v.iter_mut().for_each(|x| *x /= n);
}

/// Component of `g` tangent to the sphere at `theta`.
pub fn tangential(g: &[f64], theta: &[f64]) -> Vec<f64> {
    let c: f64 = g.iter().zip(theta).map(|(a, b)| a * b).sum();
    g.iter().zip(theta).map(|(a, b)| a - c * b).collect()
}

fn project(v: &[f64]) -> Option<Vec<f64>> {
    let mut p: Vec<f64> = v.iter().map(|&x| x.max(0.0)).collect();
    let n = norm(&p);
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    p.iter_mut().for_each(|x| *x /= n);
    Some(p)
}

fn descend<V, G>(objective: &V, gradient: &G, mut theta: Vec<f64>) -> Vec<f64>
where
    V: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let mut f = objective(&theta);
    let mut step = 1e-2;
    for _ in 0..20_000 {
        let g = tangential(&gradient(&theta), &theta);
        // Free directions: drop components pushing into an active boundary.
        let d: Vec<f64> = g
            .iter()
            .zip(&theta)
            .map(|(&gi, &ti)| if ti <= 0.0 && gi > 0.0 { 0.0 } else { gi })
            .collect();
        let gn = norm(&d);
        if gn <= 1e-13 {
            break;
        }
        let mut accepted = false;
        let mut s = step;
        for _ in 0..60 {
            let trial: Vec<f64> = theta.iter().zip(&d).map(|(t, di)| t - s * di).collect();
            if let Some(p) = project(&trial) {
                let ft = objective(&p);
                let moved: f64 = p.iter().zip(&theta).map(|(a, b)| (a - b) * (a - b)).sum();
                if ft <= f - 1e-4 * moved / s {
                    let change = (f - ft).abs();
                    theta = p;
                    f = ft;
                    accepted = true;
                    step = (s * 2.0).min(1e3);
                    if change <= 1e-16 * f.abs().max(1e-300) && moved < 1e-30 {
                        return theta;
                    }
                    break;
                }
            }
            s *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    theta
}

/// Newton iteration on `(θ, n) ↦ (∇V(θ) + nθ, (|θ|² - 1)/2)` with a
/// finite-difference Jacobian of the gradient.
fn newton_polish<V, G>(objective: &V, gradient: &G, theta0: &[f64]) -> Option<Vec<f64>>
where
    V: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let k = theta0.len();
    let mut th = theta0.to_vec();
    let g0 = gradient(&th);
    let mut n = -g0.iter().zip(&th).map(|(a, b)| a * b).sum::<f64>();
    let f_start = objective(theta0);
    for _ in 0..30 {
        let g = gradient(&th);
        let mut res = nalgebra::DVector::zeros(k + 1);
        for i in 0..k {
            res[i] = g[i] + n * th[i];
        }
        res[k] = 0.5 * (th.iter().map(|x| x * x).sum::<f64>() - 1.0);
        if res.amax() <= 1e-15 {
            break;
        }
        let mut jac = nalgebra::DMatrix::zeros(k + 1, k + 1);
        for j in 0..k {
            let h = 1e-6 * th[j].abs().max(1e-3);
            let mut p = th.clone();
            let mut m = th.clone();
            p[j] += h;
            m[j] -= h;
            let (gp, gm) = (gradient(&p), gradient(&m));
            for i in 0..k {
                jac[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
            }
            jac[(j, j)] += n;
            jac[(j, k)] = th[j];
            jac[(k, j)] = th[j];
        }
        let delta = jac.lu().solve(&res)?;
        for i in 0..k {
            th[i] -= delta[i];
        }
        n -= delta[k];
        if th.iter().any(|&x| x <= 0.0 || !x.is_finite()) {
            return None;
        }
    }
    normalize(&mut th);
    let tg = norm(&tangential(&gradient(&th), &th));
    let f_end = objective(&th);
    (tg <= PROJECTED_GRADIENT_TOL && f_end <= f_start + 1e-12 * f_start.abs().max(1.0))
        .then_some(th)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_component() {
        let m =
            minimize_on_sphere_sector(|t: &[f64]| t[0], |_: &[f64]| vec![1.0], 1, 4, 0).unwrap();
        assert_eq!(m.theta, vec![1.0]);
    }

    #[test]
    fn symmetric_product() {
        let v = |t: &[f64]| -(t[0] * t[1]).powf(1.5);
        let g = |t: &[f64]| {
            let p = (t[0] * t[1]).sqrt();
            vec![-1.5 * p * t[1], -1.5 * p * t[0]]
        };
        let m = minimize_on_sphere_sector(v, g, 2, 8, 42).unwrap();
        let s = 0.5f64.sqrt();
        assert!(
            (m.theta[0] - s).abs() < 1e-12 && (m.theta[1] - s).abs() < 1e-12,
            "{:?}",
            m.theta
        );
        assert!(m.projected_gradient <= PROJECTED_GRADIENT_TOL);
        assert!((m.theta.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn boundary_minimum_is_an_error() {
        // minimum of θ₁ on the sector is at (0, 1)
        let r = minimize_on_sphere_sector(|t: &[f64]| t[0], |_: &[f64]| vec![1.0, 0.0], 2, 4, 1);
        assert!(matches!(r, Err(Error::BoundaryMinimizer { .. })));
    }

    #[test]
    fn deterministic() {
        let v = |t: &[f64]| -(t[0] * t[1] * t[2]);
        let g = |t: &[f64]| vec![-t[1] * t[2], -t[0] * t[2], -t[0] * t[1]];
        let a = minimize_on_sphere_sector(v, g, 3, 16, 7).unwrap();
        let b = minimize_on_sphere_sector(v, g, 3, 16, 7).unwrap();
        assert_eq!(a, b);
        for x in &a.theta {
            assert!((x - 1.0 / 3f64.sqrt()).abs() < 1e-10);
        }
    }
}
