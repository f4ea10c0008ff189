use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::configuration::BlowupConstants;
use crate::error::{Error, Result};
use crate::interaction::{b_coefficients, kappa, PointConfig};
use crate::numerics::ode::{integrate_ode, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Block {
    /// Perturbations along `c` in both `λ` and `b`.
    Radial,
    /// Perturbations orthogonal to `c`.
    Tangent,
}

/// Growth `t^σ` of a mode of the linearized flow in the self-similar
/// variables `(t²δλ, t³δb)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponent {
    pub re: f64,
    pub im: f64,
    pub block: Block,
}

/// Length in `ln t` of the window used for imaginary parts.
const SHORT_WINDOW: f64 = 0.5;

/// `∂B_k/∂λ_j`.
pub(crate) fn jacobian_b(config: &PointConfig, lambda: &[f64]) -> Result<DMatrix<f64>> {
    let k = config.k();
    let b = b_coefficients(config, lambda)?;
    let kap = kappa();
    Ok(DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            b[i] / (2.0 * lambda[i])
        } else {
            -1.5 * kap * (lambda[i] * lambda[j]).sqrt() / config.dist[i][j].powi(3)
        }
    }))
}

fn complement(theta: &[f64]) -> Vec<DVector<f64>> {
    let k = theta.len();
    let th = DVector::from_column_slice(theta);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for i in 0..k {
        let mut v = DVector::zeros(k);
        v[i] = 1.0;
        v -= &th * th.dot(&v);
        for u in &basis {
            v -= u * u.dot(&v);
        }
        let n = v.norm();
        if n > 1e-8 && basis.len() + 1 < k {
            basis.push(v / n);
        }
    }
    basis
}

/// Integrates the fundamental matrix of `δλ' = -δb`, `δb' = DB(ct^{-2})δλ`
/// on `[t0, t1]`, conjugates by `diag(t², t³)` and returns
/// `ln(eigenvalue)/ln(t1/t0)` on the radial and tangent blocks. Imaginary
/// parts come from the propagator over the first half unit of `ln t`.
pub fn linearize_about_regime(
    config: &PointConfig,
    constants: &BlowupConstants,
    t0: f64,
    t1: f64,
) -> Result<Vec<Exponent>> {
    let k = config.k();
    if constants.c.len() != k {
        return Err(Error::input("constants do not match the configuration"));
    }
    if !(t0 > 0.0 && t1 > t0) {
        return Err(Error::input("need 0 < t0 < t1"));
    }
    let db = jacobian_b(config, &constants.c)?;
    let n = 2 * k;
    let mut y0 = vec![0.0; n * n];
    for i in 0..n {
        y0[i * n + i] = 1.0;
    }
    // row-major Φ; DB(ct^{-2}) = t^{-2}DB(c)
    let field = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let s = t.powi(-2);
        for col in 0..n {
            for i in 0..k {
                dy[i * n + col] = -y[(k + i) * n + col];
                dy[(k + i) * n + col] =
                    s * (0..k).map(|j| db[(i, j)] * y[j * n + col]).sum::<f64>();
            }
        }
        Ok(())
    };
    let tol = Tolerances::new(1e-12, 1e-14);
    // rotation angles are resolved on a window short enough to avoid aliasing
    let ln = (t1 / t0).ln();
    let ln_short = ln.min(SHORT_WINDOW);
    let t_short = t0 * ln_short.exp();
    let times: Vec<f64> = if t_short < t1 {
        vec![t_short, t1]
    } else {
        vec![t1]
    };
    let tr = integrate_ode(field, t0, t1, &y0, &tol, &times)?;
    let d = |t: f64| {
        DMatrix::from_fn(n, n, |i, j| {
            if i != j {
                0.0
            } else if i < k {
                t * t
            } else {
                t.powi(3)
            }
        })
    };
    let prop = |idx: usize, t: f64| {
        d(t) * DMatrix::from_row_slice(n, n, &tr.y[idx])
            * d(t0).try_inverse().expect("diagonal scaling is invertible")
    };
    let m = prop(times.len() - 1, t1);
    let m_short = prop(0, t_short);

    let cn = constants.c_norm();
    let theta: Vec<f64> = constants.c.iter().map(|x| x / cn).collect();
    let lift = |u: &DVector<f64>, upper: bool| {
        let mut v = DVector::zeros(n);
        for i in 0..k {
            v[if upper { i } else { k + i }] = u[i];
        }
        v
    };
    let radial_dir = DVector::from_column_slice(&theta);
    let blocks = [
        (Block::Radial, vec![radial_dir]),
        (Block::Tangent, complement(&theta)),
    ];
    let mut out = Vec::new();
    for (block, dirs) in blocks {
        if dirs.is_empty() {
            continue;
        }
        let cols: Vec<DVector<f64>> = dirs
            .iter()
            .map(|u| lift(u, true))
            .chain(dirs.iter().map(|u| lift(u, false)))
            .collect();
        let p = DMatrix::from_columns(&cols);
        let long = (p.transpose() * &m * &p).complex_eigenvalues();
        let mut short: Vec<_> = (p.transpose() * &m_short * &p)
            .complex_eigenvalues()
            .iter()
            .map(|z| (z.norm().ln() / ln_short, z.arg() / ln_short))
            .collect();
        for z in long.iter() {
            let (re, sign) = (z.norm().ln() / ln, z.im.signum());
            let best = (0..short.len())
                .min_by(|&a, &b| {
                    let cost = |i: usize| {
                        (short[i].0 - re).abs()
                            + if short[i].1.signum() == sign || short[i].1 == 0.0 {
                                0.0
                            } else {
                                1e3
                            }
                    };
                    cost(a).total_cmp(&cost(b))
                })
                .expect("blocks are nonempty");
            let (_, im) = short.remove(best);
            out.push(Exponent { re, im, block });
        }
    }
    Ok(out)
}
