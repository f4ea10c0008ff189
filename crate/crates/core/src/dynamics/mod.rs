//! Reduced modulation dynamics: `λ' = -b`, `b' = B(λ)` for the scales and
//! their velocities, coupled to scalar stable/unstable channels
//! `(a_k^±)' = ±νλ_k^{-1}a_k^±` with bounded forcing.

mod flow;
mod forcing;
mod linear;
mod shooting;

use serde::{Deserialize, Serialize};

use crate::configuration::BlowupConstants;
use crate::error::{Error, Result};
use crate::interaction::{b_coefficients, potential_v, PointConfig, SectorPoint};

pub use flow::{
    first_order_law_check, simulate, BootstrapMonitors, Direction, ExitReason, SimulationOptions,
    Trajectory, TrajectoryMetadata, MAX_LOG_STEP,
};
pub use forcing::{
    Forcing, ForcingModel, ForcingValues, B_FORCING_DECAY, CHANNEL_FORCING_DECAY,
    DEFAULT_FORCING_AMPLITUDE, LAMBDA_FORCING_DECAY,
};
pub use linear::{linearize_about_regime, Block, Exponent};
pub use shooting::{shoot_channels, success_width, ShootingResult, BRACKET_REDUCTION};

/// Slack allowed on `|α| ≤ 1`.
pub const UNIT_BALL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReducedState {
    pub t: f64,
    pub lambda: Vec<f64>,
    pub b: Vec<f64>,
    pub a_plus: Vec<f64>,
    pub a_minus: Vec<f64>,
}

impl ReducedState {
    pub fn new(
        t: f64,
        lambda: Vec<f64>,
        b: Vec<f64>,
        a_plus: Vec<f64>,
        a_minus: Vec<f64>,
    ) -> Result<Self> {
        let k = lambda.len();
        if k == 0 || b.len() != k || a_plus.len() != k || a_minus.len() != k {
            return Err(Error::input("state components must all have K entries"));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::input(format!("time must be positive, got {t}")));
        }
        if lambda.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::input("scales must be positive"));
        }
        if b.iter()
            .chain(&a_plus)
            .chain(&a_minus)
            .any(|v| !v.is_finite())
        {
            return Err(Error::input("state must be finite"));
        }
        Ok(Self {
            t,
            lambda,
            b,
            a_plus,
            a_minus,
        })
    }

    pub fn k(&self) -> usize {
        self.lambda.len()
    }

    /// The exact regime `λ = ct^{-2}`, `b = 2ct^{-3}`, `a^± = 0`.
    pub fn regime(constants: &BlowupConstants, t: f64) -> Result<Self> {
        let k = constants.c.len();
        Self::new(
            t,
            constants.c.iter().map(|c| c * t.powi(-2)).collect(),
            constants.c.iter().map(|c| 2.0 * c * t.powi(-3)).collect(),
            vec![0.0; k],
            vec![0.0; k],
        )
    }

    /// Applies a permutation of the sites: entry `i` becomes entry `perm[i]`
    /// of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let p = |v: &[f64]| perm.iter().map(|&j| v[j]).collect::<Vec<_>>();
        Self {
            t: self.t,
            lambda: p(&self.lambda),
            b: p(&self.b),
            a_plus: p(&self.a_plus),
            a_minus: p(&self.a_minus),
        }
    }
}

/// Time derivative of a [`ReducedState`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StateDerivative {
    pub lambda: Vec<f64>,
    pub b: Vec<f64>,
    pub a_plus: Vec<f64>,
    pub a_minus: Vec<f64>,
}

/// `λ' = -b + ε_λ`, `b' = B(λ) + ε_b`, `(a^±)' = ±νa^±/λ + ε^±`.
pub fn vector_field(
    config: &PointConfig,
    state: &ReducedState,
    nu: f64,
    forcing: &Forcing,
) -> Result<StateDerivative> {
    if state.k() != config.k() {
        return Err(Error::input("state and configuration sizes differ"));
    }
    if let Some(index) = state.lambda.iter().position(|&l| l <= 0.0) {
        return Err(Error::BlowDown {
            t: state.t,
            index,
            value: state.lambda[index],
            state: flat(state),
        });
    }
    let bk = b_coefficients(config, &state.lambda)?;
    let e = forcing.eval(state.t);
    let k = state.k();
    Ok(StateDerivative {
        lambda: (0..k).map(|i| -state.b[i] + e.lambda[i]).collect(),
        b: (0..k).map(|i| bk[i] + e.b[i]).collect(),
        a_plus: (0..k)
            .map(|i| nu * state.a_plus[i] / state.lambda[i] + e.a_plus[i])
            .collect(),
        a_minus: (0..k)
            .map(|i| -nu * state.a_minus[i] / state.lambda[i] + e.a_minus[i])
            .collect(),
    })
}

pub(crate) fn flat(s: &ReducedState) -> Vec<f64> {
    let mut v = Vec::with_capacity(1 + 4 * s.k());
    v.push(s.t);
    v.extend(&s.lambda);
    v.extend(&s.b);
    v.extend(&s.a_plus);
    v.extend(&s.a_minus);
    v
}

/// Data at time `T` for parameters `α = (α₀, α_1..α_K)` in the closed unit
/// ball: `r = |c|T^{-2} + T^{-12/5}α₀`, `λ = rc/|c|`, `b = 2r^{3/2}c/|c|^{3/2}`,
/// `a⁺ = 0`, `a_k⁻ = T^{-4}α_k`.
pub fn prepare_data(constants: &BlowupConstants, t: f64, alpha: &[f64]) -> Result<ReducedState> {
    let k = constants.c.len();
    if alpha.len() != k + 1 {
        return Err(Error::input(format!("α needs K + 1 = {} entries", k + 1)));
    }
    let norm = alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !(norm <= 1.0 + UNIT_BALL_SLACK) {
        return Err(Error::input(format!("|α| = {norm} exceeds 1")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::input("T must be positive"));
    }
    let cn = constants.c_norm();
    let r = cn * t.powi(-2) + t.powf(-12.0 / 5.0) * alpha[0];
    if r <= 0.0 {
        return Err(Error::input("r(T) is not positive; increase T"));
    }
    ReducedState::new(
        t,
        constants.c.iter().map(|c| r * c / cn).collect(),
        constants
            .c
            .iter()
            .map(|c| 2.0 * r.powf(1.5) * c / cn.powf(1.5))
            .collect(),
        vec![0.0; k],
        alpha[1..].iter().map(|a| a * t.powi(-4)).collect(),
    )
}

/// `λ = rθ`, `b = ρθ + b^⊥` with `b^⊥ ⊥ θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PolarDecomposition {
    pub r: f64,
    pub theta: SectorPoint,
    pub rho: f64,
    pub b_perp: Vec<f64>,
}

pub fn decompose(state: &ReducedState) -> Result<PolarDecomposition> {
    let r = state.lambda.iter().map(|x| x * x).sum::<f64>().sqrt();
    let theta = SectorPoint::from_direction(state.lambda.clone())?;
    let rho: f64 = theta.theta.iter().zip(&state.b).map(|(a, b)| a * b).sum();
    let b_perp = state
        .b
        .iter()
        .zip(&theta.theta)
        .map(|(b, th)| b - rho * th)
        .collect();
    Ok(PolarDecomposition {
        r,
        theta,
        rho,
        b_perp,
    })
}

/// `F = ½ r^{-3}|b^⊥|² + V(θ)`.
pub fn lyapunov_f(config: &PointConfig, d: &PolarDecomposition) -> f64 {
    0.5 * d.r.powi(-3) * d.b_perp.iter().map(|x| x * x).sum::<f64>()
        + potential_v(config, &d.theta.theta)
}

/// `G = ½ρ² - 2|c|^{-1}r³`.
pub fn lyapunov_g(constants: &BlowupConstants, d: &PolarDecomposition) -> f64 {
    0.5 * d.rho * d.rho - 2.0 / constants.c_norm() * d.r.powi(3)
}

/// `ã₀ = t^{12/5}(r - |c|t^{-2})`, `ã_k = t⁴a_k⁻`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ShootingVariables {
    pub a_tilde0: f64,
    pub a_tilde_k: Vec<f64>,
}

impl ShootingVariables {
    pub fn of(state: &ReducedState, constants: &BlowupConstants) -> Self {
        let t = state.t;
        let r = state.lambda.iter().map(|x| x * x).sum::<f64>().sqrt();
        Self {
            a_tilde0: t.powf(12.0 / 5.0) * (r - constants.c_norm() * t.powi(-2)),
            a_tilde_k: state.a_minus.iter().map(|a| a * t.powi(4)).collect(),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.a_tilde0 * self.a_tilde0 + self.a_tilde_k.iter().map(|x| x * x).sum::<f64>()
    }
}
