use serde::{Deserialize, Serialize};

use super::flow::{physical_error, scale, ScaledFlow, SimulationOptions};
use super::forcing::{Forcing, ForcingModel};
use super::prepare_data;
use crate::configuration::BlowupConstants;
use crate::error::{Error, Result};
use crate::interaction::PointConfig;
use crate::numerics::ode::{integrate_with, Control, Step};
use crate::numerics::roots::bisect;

/// Bisection stops once the bracket is this fraction of the initial one.
pub const BRACKET_REDUCTION: f64 = 1.0 / (1u64 << 50) as f64;
const MAX_BISECTIONS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ShootingResult {
    pub channel: usize,
    /// Tuned `α_k`, so that `a_k⁻(T) = T^{-4}α_k`.
    pub alpha: f64,
    pub a_minus: f64,
    /// Bracket widths in `α_k`, starting from the initial `2`.
    pub bracket_widths: Vec<f64>,
    /// `Σ_j ã_j ã_j'` at the exit time of every exiting trial.
    pub transversality: Vec<f64>,
    /// Whether the tuned data keeps `|ã_k| ≤ 1` down to `T0`.
    pub success: bool,
}

struct Shot {
    /// Sign of `ã_k` at exit, or at `T0` if it never exits.
    sign: f64,
    exited: bool,
    transversality: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn shoot_once(
    config: &PointConfig,
    constants: &BlowupConstants,
    t_big: f64,
    t0: f64,
    channel: usize,
    alpha: f64,
    forcing: &Forcing,
    nu: f64,
    options: &SimulationOptions,
) -> Result<Shot> {
    let k = config.k();
    let mut a = vec![0.0; k + 1];
    a[channel + 1] = alpha;
    let data = prepare_data(constants, t_big, &a)?;
    let flow = ScaledFlow {
        config,
        nu,
        forcing,
        k,
    };
    let qi = 3 * k + channel;
    let mut exit: Option<(f64, Vec<f64>)> = None;
    let out = integrate_with(
        |tau, y, dy| flow.field(tau, y, dy),
        t_big.ln(),
        t0.ln(),
        &scale(&data),
        &options.tolerances,
        |step: &Step<'_>| {
            if step.y1[qi].abs() <= 1.0 {
                return Ok(Control::Continue);
            }
            let te = if step.y0[qi].abs() > 1.0 {
                step.t0
            } else {
                bisect(
                    |tau| step.eval(tau)[qi].abs() - 1.0,
                    step.t0,
                    step.t1,
                    1e-14,
                )?
            };
            exit = Some((te, step.eval(te)));
            Ok(Control::Stop)
        },
    )
    .map_err(|e| physical_error(e, k))?;
    Ok(match exit {
        Some((tau, y)) => {
            let mut dy = vec![0.0; y.len()];
            flow.field(tau, &y, &mut dy)?;
            let t = tau.exp();
            let tr = (0..k).map(|j| y[3 * k + j] * dy[3 * k + j] / t).sum();
            Shot {
                sign: y[qi].signum(),
                exited: true,
                transversality: Some(tr),
            }
        }
        None => Shot {
            sign: if out.y[qi] < 0.0 { -1.0 } else { 1.0 },
            exited: false,
            transversality: None,
        },
    })
}

/// Tunes `a_k⁻(T) ∈ [-T^{-4}, T^{-4}]` by bisection so that the backward
/// trajectory keeps `t⁴|a_k⁻(t)| ≤ 1` on `[T0, T]`.
#[allow(clippy::too_many_arguments)]
pub fn shoot_channels(
    config: &PointConfig,
    constants: &BlowupConstants,
    t_big: f64,
    t0: f64,
    channel: usize,
    forcing: ForcingModel,
    nu: f64,
    options: &SimulationOptions,
) -> Result<ShootingResult> {
    let k = config.k();
    if channel >= k {
        return Err(Error::input(format!(
            "channel {channel} out of range for K = {k}"
        )));
    }
    if !(t0 > 0.0 && t_big > t0) {
        return Err(Error::input("shooting needs 0 < T0 < T"));
    }
    let f = Forcing::new(forcing, k)?;
    let shot = |a: f64| shoot_once(config, constants, t_big, t0, channel, a, &f, nu, options);
    let (mut lo, mut hi) = (-1.0, 1.0);
    let (s_lo, s_hi) = (shot(lo)?, shot(hi)?);
    let mut transversality: Vec<f64> = [&s_lo, &s_hi]
        .iter()
        .filter_map(|s| s.transversality)
        .collect();
    if !(s_lo.exited && s_hi.exited && s_lo.sign < 0.0 && s_hi.sign > 0.0) {
        return Err(Error::ShootingFailure(format!(
            "no sign change on the bracket: exits ({}, {}) with signs ({}, {})",
            s_lo.exited, s_hi.exited, s_lo.sign, s_hi.sign
        )));
    }
    let mut widths = vec![hi - lo];
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= 2.0 * BRACKET_REDUCTION {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let s = shot(mid)?;
        transversality.extend(s.transversality);
        if s.sign < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        widths.push(hi - lo);
    }
    let alpha = 0.5 * (lo + hi);
    let success = !shot(alpha)?.exited;
    Ok(ShootingResult {
        channel,
        alpha,
        a_minus: alpha * t_big.powi(-4),
        bracket_widths: widths,
        transversality,
        success,
    })
}

/// Width in `a_k⁻(T)` of the set of data that stay in the ball down to
/// `T0`, from bisection on both edges around the tuned `α_k`.
#[allow(clippy::too_many_arguments)]
pub fn success_width(
    config: &PointConfig,
    constants: &BlowupConstants,
    t_big: f64,
    t0: f64,
    channel: usize,
    tuned: f64,
    forcing: ForcingModel,
    nu: f64,
    options: &SimulationOptions,
) -> Result<f64> {
    let f = Forcing::new(forcing, config.k())?;
    let exits = |a: f64, sign: f64| -> Result<bool> {
        let s = shoot_once(config, constants, t_big, t0, channel, a, &f, nu, options)?;
        Ok(s.exited && s.sign == sign)
    };
    if exits(tuned, 1.0)? || exits(tuned, -1.0)? {
        return Err(Error::ShootingFailure("tuned data leave the ball".into()));
    }
    let edge = |mut inside: f64, mut outside: f64, sign: f64| -> Result<f64> {
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (inside + outside);
            if (outside - inside).abs() <= 1e-12 * inside.abs().max(outside.abs()) {
                break;
            }
            if exits(mid, sign)? {
                outside = mid;
            } else {
                inside = mid;
            }
        }
        Ok(0.5 * (inside + outside))
    };
    Ok((edge(tuned, 1.0, 1.0)? - edge(tuned, -1.0, -1.0)?) * t_big.powi(-4))
}
