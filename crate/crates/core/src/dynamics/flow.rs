use serde::{Deserialize, Serialize};

use super::forcing::{Forcing, ForcingModel};
use super::{decompose, ReducedState};
use crate::configuration::BlowupConstants;
use crate::error::{Error, Result};
use crate::interaction::{b_unchecked, PointConfig};
use crate::numerics::ode::{integrate_with, Control, Step, Tolerances};
use crate::numerics::report::CheckReport;
use crate::numerics::roots::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Forward,
    Backward,
}

/// Why a simulation stopped: the first bootstrap inequality to fail, or
/// the end of the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExitReason {
    ReachedEnd,
    /// `|λ - ct^{-2}| ≤ t^{-7/3}`
    LambdaBoot,
    /// `|b - 2ct^{-3}| ≤ t^{-10/3}`
    BBoot,
    /// `Σ(a_k⁺)² ≤ t^{-8}`
    APlusBoot,
    /// `t^{24/5}(|λ| - |c|t^{-2})² + t⁸Σ(a_k⁻)² ≤ 1`
    BrouwerBoot,
}

/// Bootstrap quantities normalized so that each inequality reads `≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BootstrapMonitors {
    pub lambda: f64,
    pub b: f64,
    pub a_plus: f64,
    pub brouwer: f64,
}

const MONITOR_ORDER: [ExitReason; 4] = [
    ExitReason::LambdaBoot,
    ExitReason::BBoot,
    ExitReason::APlusBoot,
    ExitReason::BrouwerBoot,
];

impl BootstrapMonitors {
    fn get(&self, m: ExitReason) -> f64 {
        match m {
            ExitReason::LambdaBoot => self.lambda,
            ExitReason::BBoot => self.b,
            ExitReason::APlusBoot => self.a_plus,
            ExitReason::BrouwerBoot => self.brouwer,
            ExitReason::ReachedEnd => 0.0,
        }
    }

    /// First violated inequality in the order λ, b, a⁺, Brouwer.
    pub fn violated(&self) -> Option<ExitReason> {
        MONITOR_ORDER.into_iter().find(|&m| !(self.get(m) <= 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationOptions {
    pub tolerances: Tolerances,
    /// Output samples, uniform in `ln t`, endpoints included.
    pub samples: usize,
    /// Stop at the first bootstrap violation; otherwise only record it.
    pub stop_on_exit: bool,
}

/// Largest step in `ln t`. The radial mode of the regime has exponent 6,
/// and longer steps leave the stability region of the integrator.
pub const MAX_LOG_STEP: f64 = 0.25;

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            tolerances: Tolerances {
                max_steps: 10_000_000,
                h_max: Some(MAX_LOG_STEP),
                ..Tolerances::new(1e-10, 1e-12)
            },
            samples: 101,
            stop_on_exit: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetadata {
    pub tolerances: Tolerances,
    pub direction: Direction,
    pub forcing: ForcingModel,
    pub seed: Option<u64>,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Trajectory {
    pub samples: Vec<ReducedState>,
    pub monitors: Vec<BootstrapMonitors>,
    pub exit: ExitReason,
    /// Time of the first bootstrap violation, if any.
    pub exit_time: Option<f64>,
    pub metadata: TrajectoryMetadata,
    pub accepted_steps: usize,
}

/// The flow in `τ = ln t` for `μ = t²λ`, `β = t³b`, `p = t⁴a⁺`, `q = t⁴a⁻`,
/// in which the regime is the fixed point `(c, 2c, 0, 0)`.
pub(crate) struct ScaledFlow<'a> {
    pub config: &'a PointConfig,
    pub nu: f64,
    pub forcing: &'a Forcing,
    pub k: usize,
}

impl ScaledFlow<'_> {
    pub fn field(&self, tau: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let k = self.k;
        let t = tau.exp();
        if let Some(index) = y[..k].iter().position(|&m| !(m > 0.0)) {
            let s = unscale(tau, y, k);
            return Err(Error::BlowDown {
                t,
                index,
                value: s.lambda[index],
                state: super::flat(&s),
            });
        }
        let bk = b_unchecked(self.config, &y[..k]);
        let mut s = vec![0.0; 4 * k];
        self.forcing.scaled(t, &mut s);
        let t23 = t.powf(-2.0 / 3.0);
        let t3 = t * t * t;
        for i in 0..k {
            let (mu, beta, p, q) = (y[i], y[k + i], y[2 * k + i], y[3 * k + i]);
            dy[i] = 2.0 * mu - beta + t23 * s[i];
            dy[k + i] = 3.0 * beta + bk[i] + t23 * s[k + i];
            dy[2 * k + i] = 4.0 * p + self.nu * t3 * p / mu + t * s[2 * k + i];
            dy[3 * k + i] = 4.0 * q - self.nu * t3 * q / mu + t * s[3 * k + i];
        }
        Ok(())
    }
}

pub(crate) fn scale(s: &ReducedState) -> Vec<f64> {
    let t = s.t;
    let mut y = Vec::with_capacity(4 * s.k());
    y.extend(s.lambda.iter().map(|v| v * t * t));
    y.extend(s.b.iter().map(|v| v * t.powi(3)));
    y.extend(s.a_plus.iter().map(|v| v * t.powi(4)));
    y.extend(s.a_minus.iter().map(|v| v * t.powi(4)));
    y
}

pub(crate) fn unscale(tau: f64, y: &[f64], k: usize) -> ReducedState {
    let t = tau.exp();
    let (t2, t3, t4) = (t.powi(-2), t.powi(-3), t.powi(-4));
    ReducedState {
        t,
        lambda: y[..k].iter().map(|v| v * t2).collect(),
        b: y[k..2 * k].iter().map(|v| v * t3).collect(),
        a_plus: y[2 * k..3 * k].iter().map(|v| v * t4).collect(),
        a_minus: y[3 * k..].iter().map(|v| v * t4).collect(),
    }
}

pub(crate) fn monitors(tau: f64, y: &[f64], c: &[f64]) -> BootstrapMonitors {
    let k = c.len();
    let t = tau.exp();
    let t13 = t.powf(1.0 / 3.0);
    let dist = |off: usize, f: f64| {
        (0..k)
            .map(|i| (y[off + i] - f * c[i]).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let mu_norm = y[..k].iter().map(|v| v * v).sum::<f64>().sqrt();
    let c_norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let sq = |off: usize| y[off..off + k].iter().map(|v| v * v).sum::<f64>();
    BootstrapMonitors {
        lambda: dist(0, 1.0) * t13,
        b: dist(k, 2.0) * t13,
        a_plus: sq(2 * k),
        brouwer: t.powf(0.8) * (mu_norm - c_norm).powi(2) + sq(3 * k),
    }
}

/// Integrates the reduced flow from `data.t` to `t_end`, sampling uniformly
/// in `ln t` and evaluating every bootstrap inequality at every sample and
/// at every accepted step.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    config: &PointConfig,
    constants: &BlowupConstants,
    data: &ReducedState,
    t_end: f64,
    direction: Direction,
    forcing: ForcingModel,
    nu: f64,
    options: &SimulationOptions,
) -> Result<Trajectory> {
    let k = config.k();
    if data.k() != k || constants.c.len() != k {
        return Err(Error::input(
            "state, constants and configuration sizes differ",
        ));
    }
    let ok_dir = match direction {
        Direction::Backward => t_end < data.t,
        Direction::Forward => t_end > data.t,
    };
    if !ok_dir || !(t_end > 0.0) {
        return Err(Error::input(format!(
            "t_end = {t_end} does not lie {direction:?} of t = {}",
            data.t
        )));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::input("ν must be positive"));
    }
    if options.samples < 2 {
        return Err(Error::input("at least two samples are required"));
    }
    let forcing_eval = Forcing::new(forcing, k)?;
    let flow = ScaledFlow {
        config,
        nu,
        forcing: &forcing_eval,
        k,
    };
    let c = &constants.c;
    let (tau0, tau1) = (data.t.ln(), t_end.ln());
    let n = options.samples;
    let grid: Vec<f64> = (0..n)
        .map(|i| tau0 + (tau1 - tau0) * i as f64 / (n - 1) as f64)
        .collect();
    let y0 = scale(data);

    let mut samples = vec![data.clone()];
    let mut mons = vec![monitors(tau0, &y0, c)];
    let mut next = 1;
    let mut exit = mons[0].violated().map(|m| (m, tau0));
    if exit.is_some() && options.stop_on_exit {
        return Ok(finish(
            samples, mons, exit, direction, forcing, nu, options, 0,
        ));
    }
    let before = |a: f64, b: f64| if tau1 < tau0 { a > b } else { a < b };

    let outcome = integrate_with(
        |tau, y, dy| flow.field(tau, y, dy),
        tau0,
        tau1,
        &y0,
        &options.tolerances,
        |step: &Step<'_>| {
            let mut stop_at = None;
            if exit.is_none() {
                let m1 = monitors(step.t1, step.y1, c);
                if let Some(first) = first_crossing(step, c, &m1) {
                    exit = Some(first);
                    if options.stop_on_exit {
                        stop_at = Some(first.1);
                    }
                }
            }
            let limit = stop_at.unwrap_or(step.t1);
            while next < n && !before(limit, grid[next]) {
                let y = step.eval(grid[next]);
                let y = if next == n - 1 && grid[next] == step.t1 {
                    step.y1.to_vec()
                } else {
                    y
                };
                mons.push(monitors(grid[next], &y, c));
                samples.push(unscale(grid[next], &y, k));
                next += 1;
            }
            if let Some(te) = stop_at {
                if samples.last().map(|s| s.t.ln()) != Some(te) {
                    let y = step.eval(te);
                    mons.push(monitors(te, &y, c));
                    samples.push(unscale(te, &y, k));
                }
                return Ok(Control::Stop);
            }
            Ok(Control::Continue)
        },
    )
    .map_err(|e| physical_error(e, k))?;
    Ok(finish(
        samples,
        mons,
        exit,
        direction,
        forcing,
        nu,
        options,
        outcome.accepted,
    ))
}

/// Maps integrator errors reported in `(τ, μ, β, p, q)` to `(t, λ, b, a⁺, a⁻)`.
pub(crate) fn physical_error(e: Error, k: usize) -> Error {
    match e {
        Error::Divergence { t, h, state } => Error::Divergence {
            t: t.exp(),
            h: h * t.exp(),
            state: super::flat(&unscale(t, &state, k)),
        },
        Error::StepLimit { t, steps, state } => Error::StepLimit {
            t: t.exp(),
            steps,
            state: super::flat(&unscale(t, &state, k)),
        },
        other => other,
    }
}

/// Earliest bootstrap crossing within an accepted step, located by
/// bisection on the dense output.
fn first_crossing(
    step: &Step<'_>,
    c: &[f64],
    at_end: &BootstrapMonitors,
) -> Option<(ExitReason, f64)> {
    let mut best: Option<(ExitReason, f64)> = None;
    for m in MONITOR_ORDER {
        if at_end.get(m) <= 1.0 {
            continue;
        }
        let g = |tau: f64| monitors(tau, &step.eval(tau), c).get(m) - 1.0;
        let te = if g(step.t0) > 0.0 {
            step.t0
        } else {
            bisect(g, step.t0, step.t1, 1e-14 * step.t1.abs().max(1.0)).unwrap_or(step.t1)
        };
        let earlier = match best {
            None => true,
            Some((_, tb)) => (te - step.t0).abs() < (tb - step.t0).abs(),
        };
        if earlier {
            best = Some((m, te));
        }
    }
    best
}

#[allow(clippy::too_many_arguments)]
fn finish(
    samples: Vec<ReducedState>,
    monitors: Vec<BootstrapMonitors>,
    exit: Option<(ExitReason, f64)>,
    direction: Direction,
    forcing: ForcingModel,
    nu: f64,
    options: &SimulationOptions,
    accepted: usize,
) -> Trajectory {
    let seed = match forcing {
        ForcingModel::RandomBounded { seed, .. } => Some(seed),
        _ => None,
    };
    Trajectory {
        samples,
        monitors,
        exit: exit.map_or(ExitReason::ReachedEnd, |e| e.0),
        exit_time: exit.map(|e| e.1.exp()),
        metadata: TrajectoryMetadata {
            tolerances: options.tolerances,
            direction,
            forcing,
            seed,
            nu,
        },
        accepted_steps: accepted,
    }
}

/// `max t^{31/9}|r' + 2|c|^{-1/2}r^{3/2}|` over the samples, with `r' = -b·θ`
/// (the unforced relation `λ' = -b`), against `bound`.
pub fn first_order_law_check(
    trajectory: &Trajectory,
    constants: &BlowupConstants,
    bound: f64,
) -> Result<CheckReport> {
    let cn = constants.c_norm();
    let mut worst = 0.0_f64;
    for s in &trajectory.samples {
        let d = decompose(s)?;
        let v = s.t.powf(31.0 / 9.0) * (-d.rho + 2.0 * cn.powf(-0.5) * d.r.powf(1.5)).abs();
        worst = worst.max(v);
    }
    Ok(CheckReport::at_most("first_order_law", worst, bound))
}
