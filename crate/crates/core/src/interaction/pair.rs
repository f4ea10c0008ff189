//! Two-center integrals `∫_{R^5} h(|x - z_j|, |x - z_k|) dx`.
//!
//! The deterministic path uses bipolar coordinates `u = |x - z_j|`,
//! `v = |x - z_k|` around the axis through both centers. With `D` the
//! separation and `ρ` the distance to the axis,
//! `dx = (2π²/D) ρ² u v du dv` on `|u - v| ≤ D ≤ u + v`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::gauss::{gauss_legendre, gauss_on};
use crate::profiles::{dw, lambda_w, w, DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    /// `⟨λ_j^{-1} W_j, λ_k^{-1} W_k⟩`
    L2Mass,
    /// `⟨λ_j^{-1} |∇_j W_j|, λ_k^{-1} |∇_k W_k|⟩` with `∇_k W_k = λ_k ∇W_k`
    Gradient,
    /// `⟨W_j^{5/3}, W_k^{5/3}⟩`
    FiveThirds,
    /// `‖W_k W_j^{4/3}‖_{L^{10/7}}`
    ProductNorm,
    /// `⟨λ_j^{-1} Λ_j W_j, λ_k^{-1} Λ_k W_k⟩`, the kinetic cross term
    GeneratorProduct,
}

impl PairKind {
    pub const SCALING: [PairKind; 4] = [
        PairKind::L2Mass,
        PairKind::Gradient,
        PairKind::FiveThirds,
        PairKind::ProductNorm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PairKind::L2Mass => "l2-mass",
            PairKind::Gradient => "gradient",
            PairKind::FiveThirds => "five-thirds",
            PairKind::ProductNorm => "product-norm",
            PairKind::GeneratorProduct => "generator-product",
        }
    }

    /// Pointwise integrand before the final power (only `ProductNorm` has one).
    fn integrand(self, lj: f64, lk: f64) -> impl Fn(f64, f64) -> f64 + Sync {
        let sj = lj.powf(-1.5);
        let sk = lk.powf(-1.5);
        move |u: f64, v: f64| {
            let wj = sj * w(u / lj);
            let wk = sk * w(v / lk);
            match self {
                PairKind::L2Mass => wj * wk / (lj * lk),
                PairKind::Gradient => (sj * dw(u / lj)).abs() * (sk * dw(v / lk)).abs() / (lj * lk),
                PairKind::FiveThirds => (wj * wk).powf(5.0 / 3.0),
                PairKind::ProductNorm => (wk * wj.powf(4.0 / 3.0)).powf(10.0 / 7.0),
                PairKind::GeneratorProduct => {
                    sj * lambda_w(u / lj) * sk * lambda_w(v / lk) / (lj * lk)
                }
            }
        }
    }

    fn finish(self, raw: f64) -> f64 {
        match self {
            PairKind::ProductNorm => raw.powf(0.7),
            _ => raw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum PairMethod {
    Bipolar,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairValue {
    pub value: f64,
    /// Present for Monte-Carlo values.
    pub std_error: Option<f64>,
    pub warning: Option<String>,
}

/// Default Monte-Carlo budget.
pub const DEFAULT_MC_SAMPLES: usize = 10_000_000;
/// Relative standard error above which a Monte-Carlo result carries a warning.
pub const MC_TARGET_REL_ERROR: f64 = 1e-2;

pub fn pair_integral(
    kind: PairKind,
    lambda_j: f64,
    lambda_k: f64,
    separation: f64,
    method: PairMethod,
) -> Result<PairValue> {
    for (name, v) in [
        ("λ_j", lambda_j),
        ("λ_k", lambda_k),
        ("separation", separation),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::input(format!("{name} must be positive, got {v}")));
        }
    }
    let h = kind.integrand(lambda_j, lambda_k);
    match method {
        PairMethod::Bipolar => Ok(PairValue {
            value: kind.finish(two_center_bipolar(&h, separation)),
            std_error: None,
            warning: None,
        }),
        PairMethod::MonteCarlo { samples, seed } => {
            let mut zk = [0.0; DIM];
            zk[0] = separation;
            let est = pair_montecarlo(
                |x: &[f64; DIM]| {
                    let u = norm(x);
                    let v = ((x[0] - separation).powi(2)
                        + x[1..].iter().map(|c| c * c).sum::<f64>())
                    .sqrt();
                    h(u, v)
                },
                &[[0.0; DIM], zk],
                &[lambda_j, lambda_k],
                samples,
                seed,
            )?;
            let (value, se) = match kind {
                // delta method for the 7/10 power
                PairKind::ProductNorm => (
                    est.value.powf(0.7),
                    0.7 * est.value.powf(-0.3) * est.std_error,
                ),
                _ => (est.value, est.std_error),
            };
            Ok(PairValue {
                value,
                std_error: Some(se),
                warning: est.warning,
            })
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

const LOG_PANEL: f64 = 0.25;
const OUTER_ORDER: usize = 8;
const INNER_ORDER: usize = 32;

/// `∫_{R^5} h(|x - z_j|, |x - z_k|) dx` with `|z_j - z_k| = separation`.
///
/// The domain is split at `u = v`; in each half the smaller distance is the
/// outer variable, integrated in `ln` on a fixed absolute panel grid (so
/// results vary smoothly with profile scales) with a break at `D/2`.
pub fn two_center_bipolar<H: Fn(f64, f64) -> f64>(h: H, separation: f64) -> f64 {
    let d = separation;
    let a = half_domain(|outer, inner| h(outer, inner), d);
    let b = half_domain(|outer, inner| h(inner, outer), d);
    2.0 * std::f64::consts::PI.powi(2) / d * (a + b)
}

fn half_domain<G: Fn(f64, f64) -> f64>(g: G, d: f64) -> f64 {
    let lo = (1e-12 * d.min(1.0)).ln();
    let hi = (1e12 * d.max(1.0)).ln();
    let k0 = (lo / LOG_PANEL).floor() as i64;
    let k1 = (hi / LOG_PANEL).ceil() as i64;
    let brk = (0.5 * d).ln();
    let mut edges: Vec<f64> = (k0..=k1).map(|k| k as f64 * LOG_PANEL).collect();
    if !edges.contains(&brk) {
        edges.push(brk);
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    let (xo, wo) = gauss_legendre(OUTER_ORDER);
    let (xi, wi) = gauss_on(INNER_ORDER, 0.0, 1.0);
    let mut total = 0.0;
    for e in edges.windows(2) {
        let half = 0.5 * (e[1] - e[0]);
        let mid = 0.5 * (e[1] + e[0]);
        for (x, wx) in xo.iter().zip(&wo) {
            let a = (mid + half * x).exp();
            let dm = (d - a).abs();
            let lo_b = a.max(dm);
            let width = d + a - lo_b;
            if width <= 0.0 {
                continue;
            }
            let mut inner = 0.0;
            for (s, ws) in xi.iter().zip(&wi) {
                let delta = s * width;
                let b = lo_b + delta;
                // 4D²ρ² = (b - |D-a|)(b + |D-a|)(D + a - b)(D + a + b)
                let rho2 = (delta + (lo_b - dm)) * (b + dm) * (width - delta) * (d + a + b)
                    / (4.0 * d * d);
                let val = g(a, b);
                if val != 0.0 {
                    inner += ws * val * a * b * rho2;
                }
            }
            total += wx * half * a * width * inner;
        }
    }
    total
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub warning: Option<String>,
}

const MC_CHUNK: usize = 1 << 16;

/// Importance-sampled `∫_{R^5} h(x) dx`. The proposal mixes 5D Cauchy-type
/// densities `s^{-5}(2/π³)(1 + |x - z|²/s²)^{-3}` centered at each site with
/// its scale (total weight 0.8) and one of scale `max(spread, 1)` at the
/// centroid (weight 0.2). Chunks use independent ChaCha streams and are
/// summed in chunk order.
pub fn pair_montecarlo<H>(
    h: H,
    centers: &[[f64; DIM]],
    scales: &[f64],
    samples: usize,
    seed: u64,
) -> Result<McEstimate>
where
    H: Fn(&[f64; DIM]) -> f64 + Sync,
{
    if centers.is_empty() || centers.len() != scales.len() || samples < 2 {
        return Err(Error::input(
            "need matching centers/scales and at least two samples",
        ));
    }
    let mut centroid = [0.0; DIM];
    for c in centers {
        for i in 0..DIM {
            centroid[i] += c[i] / centers.len() as f64;
        }
    }
    let spread = centers
        .iter()
        .map(|c| norm(&std::array::from_fn::<f64, DIM, _>(|i| c[i] - centroid[i])))
        .fold(1.0_f64, f64::max);
    let mut comps: Vec<([f64; DIM], f64, f64)> = centers
        .iter()
        .zip(scales)
        .map(|(c, &s)| (*c, s, 0.8 / centers.len() as f64))
        .collect();
    comps.push((centroid, spread, 0.2));
    let norm_const = 2.0 / std::f64::consts::PI.powi(3);
    let density = |x: &[f64; DIM]| -> f64 {
        comps
            .iter()
            .map(|(c, s, wgt)| {
                let r2: f64 = (0..DIM).map(|i| (x[i] - c[i]).powi(2)).sum::<f64>() / (s * s);
                wgt * norm_const * s.powi(-5) * (1.0 + r2).powi(-3)
            })
            .sum()
    };

    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<(f64, f64, usize)> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let n = MC_CHUNK.min(samples - ci * MC_CHUNK);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(ci as u64);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = comps.len() - 1;
                for (i, c) in comps.iter().enumerate() {
                    acc += c.2;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                let (c, s, _) = comps[pick];
                let g: f64 = StandardNormal.sample(&mut rng);
                let g = g.abs().max(1e-300);
                let mut x = [0.0; DIM];
                for (i, xi) in x.iter_mut().enumerate() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *xi = c[i] + s * z / g;
                }
                let val = h(&x) / density(&x);
                if val.is_finite() {
                    s1 += val;
                    s2 += val * val;
                }
            }
            (s1, s2, n)
        })
        .collect();
    let (mut s1, mut s2, mut n) = (0.0, 0.0, 0usize);
    for (a, b, c) in partial {
        s1 += a;
        s2 += b;
        n += c;
    }
    let nf = n as f64;
    let mean = s1 / nf;
    let var = ((s2 / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
    let se = (var / nf).sqrt();
    let warning = (se > MC_TARGET_REL_ERROR * mean.abs()).then(|| {
        format!(
            "sample budget {n} exhausted with relative standard error {:.3e}",
            se / mean.abs()
        )
    });
    Ok(McEstimate {
        value: mean,
        std_error: se,
        samples: n,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn jacobian_single_center_gaussian() {
        for d in [0.3, 1.0, 4.0] {
            let v = two_center_bipolar(|u, _| (-u * u).exp(), d);
            assert!(
                ((v - PI.powf(2.5)) / PI.powf(2.5)).abs() < 1e-10,
                "D = {d}: {v}"
            );
        }
    }

    #[test]
    fn jacobian_two_center_gaussian() {
        let d: f64 = 1.3;
        let v = two_center_bipolar(|u, v| (-u * u - v * v).exp(), d);
        let exact = (-d * d / 2.0).exp() * (PI / 2.0).powf(2.5);
        assert!(((v - exact) / exact).abs() < 1e-10, "{v} vs {exact}");
    }

    #[test]
    fn montecarlo_gaussian() {
        let est = pair_montecarlo(
            |x| (-x.iter().map(|c| c * c).sum::<f64>()).exp(),
            &[[0.0; DIM]],
            &[1.0],
            200_000,
            3,
        )
        .unwrap();
        assert!(
            (est.value - PI.powf(2.5)).abs() < 4.0 * est.std_error,
            "{est:?}"
        );
        assert!(est.warning.is_none());
        let again = pair_montecarlo(
            |x| (-x.iter().map(|c| c * c).sum::<f64>()).exp(),
            &[[0.0; DIM]],
            &[1.0],
            200_000,
            3,
        )
        .unwrap();
        assert_eq!(est, again);
    }

    #[test]
    fn decays_with_separation() {
        let mut prev = f64::INFINITY;
        for d in [1.0, 2.0, 4.0, 8.0] {
            let v = pair_integral(PairKind::L2Mass, 0.1, 0.1, d, PairMethod::Bipolar)
                .unwrap()
                .value;
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(pair_integral(PairKind::L2Mass, 0.0, 1.0, 1.0, PairMethod::Bipolar).is_err());
        assert!(pair_integral(PairKind::L2Mass, 1.0, 1.0, -1.0, PairMethod::Bipolar).is_err());
    }

    #[test]
    fn tiny_budget_warns() {
        let r = pair_integral(
            PairKind::FiveThirds,
            1e-2,
            1e-2,
            1.0,
            PairMethod::MonteCarlo {
                samples: 100,
                seed: 1,
            },
        )
        .unwrap();
        assert!(r.warning.is_some());
    }
}
