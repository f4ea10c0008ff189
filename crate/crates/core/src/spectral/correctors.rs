use serde::{Deserialize, Serialize};

use super::CORRECTOR_COEFFICIENT;
use crate::error::{Error, Result};
use crate::numerics::banded::Banded;
use crate::numerics::quadrature::{inner, RadialFunction, RadialGrid};
use crate::profiles::{lambda_w, potential, ulambda_lambda_w, SPHERE_AREA};

/// Bound on the discrete `L²` residual of the corrector equations, relative
/// to the norm of the right-hand side.
pub const CORRECTOR_RESIDUAL_TOL: f64 = 1e-6;
/// Bound on `|⟨rhs, ΛW⟩| / ‖ΛW‖²`.
pub const SOLVABILITY_TOL: f64 = 1e-8;
const STENCIL: usize = 7;

/// Finite-difference grid `r_i = L sinh(iΔs)`, `i = 0..=points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectorGrid {
    pub scale: f64,
    pub r_max: f64,
    pub points: usize,
}

impl Default for CorrectorGrid {
    fn default() -> Self {
        Self {
            scale: 1.0,
            r_max: 1e4,
            points: 3000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectorPair {
    #[serde(rename = "Q")]
    pub q: RadialFunction,
    #[serde(rename = "S")]
    pub s: RadialFunction,
    #[serde(rename = "residual_Q")]
    pub residual_q: f64,
    #[serde(rename = "residual_S")]
    pub residual_s: f64,
    #[serde(rename = "tail_Q")]
    pub tail_q: f64,
    #[serde(rename = "tail_S")]
    pub tail_s: f64,
    /// `⟨rhs, ΛW⟩ / ‖ΛW‖²` for each equation.
    pub solvability_q: f64,
    pub solvability_s: f64,
}

/// Weights `c[k][j]` of the `k`-th derivative at `z` from values at `x[j]`.
pub(crate) fn fornberg(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

struct Discretization {
    nodes: Vec<f64>,
    /// `r⁴ dr` trapezoid weights in `s`, times the sphere area.
    weights: Vec<f64>,
    /// Rows `0..n-1` of `-Δ - V` followed by the Robin row.
    matrix: Banded,
}

fn discretize(grid: &CorrectorGrid) -> Result<Discretization> {
    if grid.points < 100 {
        return Err(Error::Resolution {
            nodes: grid.points + 1,
            required: 101,
        });
    }
    if !(grid.scale > 0.0 && grid.r_max > grid.scale) {
        return Err(Error::input("corrector grid needs 0 < scale < r_max"));
    }
    let n = grid.points;
    let ds = (grid.r_max / grid.scale).asinh() / n as f64;
    let mut nodes: Vec<f64> = (0..=n)
        .map(|i| grid.scale * (i as f64 * ds).sinh())
        .collect();
    nodes[n] = grid.r_max;
    let mut weights: Vec<f64> = (0..=n)
        .map(|i| {
            let r = nodes[i];
            SPHERE_AREA * r.powi(4) * grid.scale * (i as f64 * ds).cosh() * ds
        })
        .collect();
    weights[n] *= 0.5;

    let half = STENCIL / 2;
    let mut a = Banded::zeros(n + 1, STENCIL - 1, half);
    for i in 0..=n {
        // window of signed indices; negative ones are mirror images
        let start = (i as isize - half as isize).min(n as isize + 1 - STENCIL as isize);
        let idx: Vec<isize> = (start..start + STENCIL as isize).collect();
        let pos: Vec<f64> = idx
            .iter()
            .map(|&j| {
                if j < 0 {
                    -nodes[(-j) as usize]
                } else {
                    nodes[j as usize]
                }
            })
            .collect();
        let r = nodes[i];
        let c = fornberg(r, &pos, 2);
        for (k, &j) in idx.iter().enumerate() {
            let col = j.unsigned_abs();
            let v = if i == n {
                c[1][k] + if j as usize == n { 1.0 / r } else { 0.0 }
            } else if i == 0 {
                -5.0 * c[2][k]
            } else {
                -(c[2][k] + 4.0 / r * c[1][k])
            };
            a.add(i, col, v);
        }
        if i < n {
            a.add(i, i, -potential(r));
        }
    }
    Ok(Discretization {
        nodes,
        weights,
        matrix: a,
    })
}

struct Solved {
    profile: RadialFunction,
    residual: f64,
    tail: f64,
    solvability: f64,
}

fn solve_one(d: &Discretization, rhs: &dyn Fn(f64) -> f64) -> Result<Solved> {
    let n = d.nodes.len() - 1;
    let kernel: Vec<f64> = d.nodes.iter().map(|&r| lambda_w(r)).collect();
    let dot = |x: &[f64], y: &[f64]| -> f64 {
        x.iter()
            .zip(y)
            .zip(&d.weights)
            .map(|((a, b), w)| a * b * w)
            .sum()
    };
    let kk = dot(&kernel, &kernel);
    let mut b: Vec<f64> = d.nodes.iter().map(|&r| rhs(r)).collect();
    b[n] = 0.0;
    // on all of R^5; the truncated pairing carries an O(1/R) boundary term
    let full = RadialGrid::default();
    let solvability = inner(rhs, lambda_w, &full)? / inner(lambda_w, lambda_w, &full)?;
    if solvability.abs() > SOLVABILITY_TOL {
        return Err(Error::Orthogonality {
            defect: solvability.abs(),
            limit: SOLVABILITY_TOL,
        });
    }
    let lu = d.matrix.clone().lu()?;
    let mut u = lu.solve(&b);
    let g = dot(&u, &kernel) / kk;
    u.iter_mut().zip(&kernel).for_each(|(x, k)| *x -= g * k);

    let lu_u = d.matrix.matvec(&u);
    let residual = (0..n)
        .map(|i| (lu_u[i] - b[i]).powi(2) * d.weights[i])
        .sum::<f64>()
        .sqrt()
        / dot(&b[..n], &b[..n]).sqrt();
    let profile = RadialFunction::new(d.nodes.clone(), u)?.with_tail_fit()?;
    let tail = profile.tail_exponent.unwrap();
    Ok(Solved {
        profile,
        residual,
        tail,
        solvability,
    })
}

/// Solves `LQ = (105π/128)f'(W) + ΛW` and `LS = Λ̲ΛW` with `Q'(0) = 0`,
/// `Q'(R) + Q(R)/R = 0` and the gauge `⟨Q, ΛW⟩ = 0` on the grid.
pub fn solve_correctors(grid: &CorrectorGrid) -> Result<CorrectorPair> {
    let d = discretize(grid)?;
    let q = solve_one(&d, &|r| CORRECTOR_COEFFICIENT * potential(r) + lambda_w(r))?;
    let s = solve_one(&d, &ulambda_lambda_w)?;
    Ok(CorrectorPair {
        q: q.profile,
        s: s.profile,
        residual_q: q.residual,
        residual_s: s.residual,
        tail_q: q.tail,
        tail_s: s.tail,
        solvability_q: q.solvability,
        solvability_s: s.solvability,
    })
}
