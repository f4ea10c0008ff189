//! Energy of the multi-bubble ansatz
//! `(Σ_k W_{λ_k}(· - z_k), Σ_k b_k λ_k^{-1} (ΛW)_{λ_k}(· - z_k))`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::pair::{
    pair_integral, pair_montecarlo, two_center_bipolar, McEstimate, PairKind, PairMethod,
};
use super::{b_coefficients, lambda_w_norm_sq, ModulationVector, PointConfig};
use crate::configuration::compute_constants;
use crate::error::{Error, Result};
use crate::numerics::report::CheckReport;
use crate::profiles::{big_f, dw, lambda_w, w, DIM};

/// Default relative finite-difference step.
pub const FD_RELATIVE_STEP: f64 = 1e-4;

/// `‖∇W‖² = ∫W^{10/3} = π³ 15^{5/2} / 32`.
pub fn grad_w_norm_sq() -> f64 {
    std::f64::consts::PI.powi(3) * 15f64.powf(2.5) / 32.0
}

fn lw_norm_sq() -> f64 {
    static CELL: OnceLock<f64> = OnceLock::new();
    *CELL.get_or_init(lambda_w_norm_sq)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// `Σ_k (1/5)‖∇W‖²`
    pub single: f64,
    /// `Σ_k (b_k²/2)‖ΛW‖²`
    pub kinetic: f64,
    /// `Σ_{j<k} b_j b_k ⟨λ_j^{-1}Λ_jW_j, λ_k^{-1}Λ_kW_k⟩`
    pub cross_kinetic: f64,
    /// `Σ_{j<k} ⟨∇W_j, ∇W_k⟩ = Σ_{j<k} ∫W_j^{7/3} W_k`
    pub cross_gradient: f64,
    /// `-∫[F(ΣW_k) - ΣF(W_k)]`
    pub cross_potential: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    /// All interaction terms; the only part depending on `λ`.
    pub fn cross(&self) -> f64 {
        self.cross_kinetic + self.cross_gradient + self.cross_potential
    }
}

/// `F(a + b) - F(a) - F(b)` for `a, b ≥ 0` without cancellation when one
/// argument dominates.
fn f_cross(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == 0.0 {
        return 0.0;
    }
    let x = lo / hi;
    big_f(hi) * ((10.0 / 3.0) * x.ln_1p()).exp_m1() - big_f(lo)
}

/// Ansatz energy with cross terms by bipolar quadrature. Supports `K ≤ 2`.
pub fn ansatz_energy(config: &PointConfig, mv: &ModulationVector) -> Result<EnergyBreakdown> {
    let k = config.k();
    if mv.lambda.len() != k {
        return Err(Error::input("modulation vector length differs from K"));
    }
    if k > 2 {
        return Err(Error::Unsupported(format!(
            "deterministic ansatz energy handles K ≤ 2 (got K = {k}); use the Monte-Carlo path"
        )));
    }
    let single = k as f64 * grad_w_norm_sq() / 5.0;
    let kinetic = 0.5 * lw_norm_sq() * mv.b.iter().map(|b| b * b).sum::<f64>();
    let (mut cross_kinetic, mut cross_gradient, mut cross_potential) = (0.0, 0.0, 0.0);
    if k == 2 {
        let (l1, l2) = (mv.lambda[0], mv.lambda[1]);
        let d = config.dist[0][1];
        let (s1, s2) = (l1.powf(-1.5), l2.powf(-1.5));
        let gp = pair_integral(PairKind::GeneratorProduct, l1, l2, d, PairMethod::Bipolar)?.value;
        cross_kinetic = mv.b[0] * mv.b[1] * gp;
        let a = two_center_bipolar(|u, v| (s1 * w(u / l1)).powf(7.0 / 3.0) * s2 * w(v / l2), d);
        let b = two_center_bipolar(|u, v| s1 * w(u / l1) * (s2 * w(v / l2)).powf(7.0 / 3.0), d);
        cross_gradient = 0.5 * (a + b);
        cross_potential = -two_center_bipolar(|u, v| f_cross(s1 * w(u / l1), s2 * w(v / l2)), d);
    }
    let total = single + kinetic + cross_kinetic + cross_gradient + cross_potential;
    Ok(EnergyBreakdown {
        single,
        kinetic,
        cross_kinetic,
        cross_gradient,
        cross_potential,
        total,
    })
}

/// Ansatz energy for any `K`, with the interaction part estimated by
/// importance sampling of the pointwise integrand
/// `Σ_{j<k} (∇W_j·∇W_k + b_j b_k λ_j^{-1}λ_k^{-1} Λ_jW_j Λ_kW_k) - [F(ΣW) - ΣF(W_k)]`.
/// Returns the total and the estimate of the interaction part.
pub fn ansatz_energy_montecarlo(
    config: &PointConfig,
    mv: &ModulationVector,
    samples: usize,
    seed: u64,
) -> Result<(f64, McEstimate)> {
    let k = config.k();
    if mv.lambda.len() != k {
        return Err(Error::input("modulation vector length differs from K"));
    }
    let lam = mv.lambda.clone();
    let bs = mv.b.clone();
    let z = config.z.clone();
    let h = move |x: &[f64; DIM]| -> f64 {
        let mut wv = [0.0; 16];
        let mut lw = [0.0; 16];
        let mut grads = [[0.0; DIM]; 16];
        let kk = k.min(16);
        for j in 0..kk {
            let mut dx = [0.0; DIM];
            for i in 0..DIM {
                dx[i] = x[i] - z[j][i];
            }
            let r = dx.iter().map(|c| c * c).sum::<f64>().sqrt();
            let l = lam[j];
            wv[j] = l.powf(-1.5) * w(r / l);
            lw[j] = l.powf(-1.5) * lambda_w(r / l) / l;
            let g = if r > 0.0 {
                l.powf(-2.5) * dw(r / l) / r
            } else {
                0.0
            };
            for i in 0..DIM {
                grads[j][i] = g * dx[i];
            }
        }
        let mut acc = 0.0;
        for a in 0..kk {
            for b in 0..a {
                acc += (0..DIM).map(|i| grads[a][i] * grads[b][i]).sum::<f64>();
                acc += bs[a] * bs[b] * lw[a] * lw[b];
            }
        }
        let sum: f64 = wv[..kk].iter().sum();
        acc - (big_f(sum) - wv[..kk].iter().map(|&v| big_f(v)).sum::<f64>())
    };
    if k > 16 {
        return Err(Error::Unsupported(
            "Monte-Carlo ansatz energy supports up to 16 sites".into(),
        ));
    }
    let est = pair_montecarlo(h, &config.z, &mv.lambda, samples, seed)?;
    let single = k as f64 * grad_w_norm_sq() / 5.0;
    let kinetic = 0.5 * lw_norm_sq() * mv.b.iter().map(|b| b * b).sum::<f64>();
    Ok((single + kinetic + est.value, est))
}

/// Finite-difference derivatives of the ansatz energy at the regime point
/// `λ = c t^{-2}`, `b = 2c t^{-3}` of a two-site configuration, compared
/// with the leading terms `‖ΛW‖² b_k` and `∓‖ΛW‖² B_k(λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyDerivativeReport {
    pub t: f64,
    pub site: usize,
    pub lambda: Vec<f64>,
    pub b: Vec<f64>,
    pub db_energy: f64,
    /// `‖ΛW‖² b_k`
    pub db_expected: f64,
    pub db_relative_error: f64,
    pub dlambda_energy: f64,
    /// `‖ΛW‖² B_k(λ)`; the literal leading term carries a minus sign.
    pub lambda_norm_b: f64,
    /// Relative error against `+‖ΛW‖² B_k(λ)`.
    pub dlambda_relative_error: f64,
    /// Relative error against `-‖ΛW‖² B_k(λ)`.
    pub dlambda_relative_error_literal: f64,
    pub warning: Option<String>,
}

impl EnergyDerivativeReport {
    /// `(∂_b check with tolerance 0.1, ∂_λ relative error against +‖ΛW‖²B_k)`.
    pub fn reports(&self) -> (CheckReport, CheckReport) {
        (
            CheckReport::at_most(
                format!("dbE_relative_error_t{}", self.t),
                self.db_relative_error,
                0.1,
            ),
            CheckReport::at_most(
                format!("dlambdaE_relative_error_t{}", self.t),
                self.dlambda_relative_error,
                0.1,
            ),
        )
    }
}

/// Richardson-extrapolated central difference with step `h`.
fn richardson<F: FnMut(f64) -> Result<f64>>(mut f: F, x: f64, h: f64) -> Result<f64> {
    let d1 = (f(x + h)? - f(x - h)?) / (2.0 * h);
    let d2 = (f(x + h / 2.0)? - f(x - h / 2.0)?) / h;
    Ok((4.0 * d2 - d1) / 3.0)
}

pub fn energy_derivative_check(
    config: &PointConfig,
    t: f64,
    fd_step: f64,
) -> Result<EnergyDerivativeReport> {
    if config.k() != 2 {
        return Err(Error::input(
            "the energy-derivative check needs exactly two sites",
        ));
    }
    if !(t > 0.0 && t.is_finite() && fd_step > 0.0 && fd_step < 0.1) {
        return Err(Error::input(
            "t must be positive and the relative step in (0, 0.1)",
        ));
    }
    let consts = compute_constants(config, 16, 0)?;
    let lambda: Vec<f64> = consts.c.iter().map(|c| c * t.powi(-2)).collect();
    let b: Vec<f64> = consts.c.iter().map(|c| 2.0 * c * t.powi(-3)).collect();
    let site = 0;
    let nrm = lw_norm_sq();

    let db_energy = richardson(
        |x| {
            let mut bb = b.clone();
            bb[site] = x;
            let e = ansatz_energy(config, &ModulationVector::new(lambda.clone(), bb)?)?;
            Ok(e.kinetic + e.cross_kinetic)
        },
        b[site],
        fd_step * b[site].abs(),
    )?;
    let dlambda_energy = richardson(
        |x| {
            let mut ll = lambda.clone();
            ll[site] = x;
            Ok(ansatz_energy(config, &ModulationVector::new(ll, b.clone())?)?.cross())
        },
        lambda[site],
        fd_step * lambda[site],
    )?;
    let db_expected = nrm * b[site];
    let lambda_norm_b = nrm * b_coefficients(config, &lambda)?[site];
    let warning = (fd_step < 1e-6)
        .then(|| format!("relative step {fd_step:e} is near the quadrature noise floor"));
    Ok(EnergyDerivativeReport {
        t,
        site,
        db_energy,
        db_expected,
        db_relative_error: (db_energy - db_expected).abs() / db_expected.abs(),
        dlambda_energy,
        lambda_norm_b,
        dlambda_relative_error: (dlambda_energy - lambda_norm_b).abs() / lambda_norm_b.abs(),
        dlambda_relative_error_literal: (dlambda_energy + lambda_norm_b).abs()
            / lambda_norm_b.abs(),
        lambda,
        b,
        warning,
    })
}
