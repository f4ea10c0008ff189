//! Dormand–Prince 5(4) with Hairer's continuous extension.
//!
//! The same code integrates forward and backward in time: the sign of the
//! step follows `t1 - t0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Largest step magnitude; `None` means `|t1 - t0|`.
    pub h_max: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 1_000_000,
            h_max: None,
        }
    }
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol >= 0.0 && self.rtol.is_finite() && self.atol.is_finite())
        {
            return Err(Error::input("tolerances must be positive and finite"));
        }
        Ok(())
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step together with its continuous extension.
pub struct Step<'a> {
    pub t0: f64,
    pub t1: f64,
    pub y0: &'a [f64],
    pub y1: &'a [f64],
    cont: &'a [Vec<f64>; 5],
}

impl Step<'_> {
    /// Dense output at `t` between `t0` and `t1` (fifth order accurate at
    /// the nodes, fourth order in between).
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let h = self.t1 - self.t0;
        let th = (t - self.t0) / h;
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = self.cont;
        (0..r1.len())
            .map(|i| r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i]))))
            .collect()
    }
}

/// Observer verdict after each accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub t: f64,
    pub y: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    /// True when the observer ended the integration before `t1`.
    pub stopped: bool,
}

/// Integrates `y' = field(t, y)` from `t0` to `t1`, calling `observer` after
/// every accepted step. The field writes the derivative into its third
/// argument and may fail, which aborts the integration.
pub fn integrate_with<F, O>(
    mut field: F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    tol: &Tolerances,
    mut observer: O,
) -> Result<Outcome>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    O: FnMut(&Step<'_>) -> Result<Control>,
{
    tol.validate()?;
    if !t0.is_finite() || !t1.is_finite() || y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("initial time and state must be finite"));
    }
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    if t0 == t1 {
        return Ok(Outcome {
            t,
            y,
            accepted: 0,
            rejected: 0,
            stopped: false,
        });
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let h_max = tol.h_max.unwrap_or(span).min(span);

    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut cont: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
    field(t, &y, &mut k[0])?;

    let mut h = initial_step(&mut field, t, &y, &k[0], dir, h_max, tol)?;
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let mut last_rejected = false;

    loop {
        if accepted + rejected >= tol.max_steps {
            return Err(Error::StepLimit {
                t,
                steps: accepted + rejected,
                state: y,
            });
        }
        if h.abs() < 1e-14 * t.abs().max(1e-300) || h.abs() < f64::MIN_POSITIVE {
            return Err(Error::Divergence { t, h, state: y });
        }
        let mut last = false;
        if (t + h - t1) * dir >= 0.0 || (t1 - t - h).abs() <= 1e-13 * span {
            h = t1 - t;
            last = true;
        }

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k[0][i];
        }
        let (k0, rest) = k.split_at_mut(1);
        field(t + C2 * h, &ytmp, &mut rest[0])?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k0[0][i] + A32 * rest[0][i]);
        }
        field(t + C3 * h, &ytmp, &mut rest[1])?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k0[0][i] + A42 * rest[0][i] + A43 * rest[1][i]);
        }
        field(t + C4 * h, &ytmp, &mut rest[2])?;
        for i in 0..n {
            ytmp[i] = y[i]
                + h * (A51 * k0[0][i] + A52 * rest[0][i] + A53 * rest[1][i] + A54 * rest[2][i]);
        }
        field(t + C5 * h, &ytmp, &mut rest[3])?;
        for i in 0..n {
            ytmp[i] = y[i]
                + h * (A61 * k0[0][i]
                    + A62 * rest[0][i]
                    + A63 * rest[1][i]
                    + A64 * rest[2][i]
                    + A65 * rest[3][i]);
        }
        field(t + h, &ytmp, &mut rest[4])?;
        for i in 0..n {
            ynew[i] = y[i]
                + h * (A71 * k0[0][i]
                    + A73 * rest[1][i]
                    + A74 * rest[2][i]
                    + A75 * rest[3][i]
                    + A76 * rest[4][i]);
        }
        field(t + h, &ynew, &mut rest[5])?;

        let mut err = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * k0[0][i]
                    + E3 * rest[1][i]
                    + E4 * rest[2][i]
                    + E5 * rest[3][i]
                    + E6 * rest[4][i]
                    + E7 * rest[5][i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(ynew[i].abs());
            err += (e / sc).powi(2);
        }
        let err = if n == 0 { 0.0 } else { (err / n as f64).sqrt() };
        if !err.is_finite() {
            rejected += 1;
            last_rejected = true;
            h *= 0.1;
            continue;
        }

        let fac = if err == 0.0 {
            10.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 10.0)
        };
        if err <= 1.0 {
            for i in 0..n {
                let dy = ynew[i] - y[i];
                let bspl = h * k0[0][i] - dy;
                cont[0][i] = y[i];
                cont[1][i] = dy;
                cont[2][i] = bspl;
                cont[3][i] = dy - h * rest[5][i] - bspl;
                cont[4][i] = h
                    * (D1 * k0[0][i]
                        + D3 * rest[1][i]
                        + D4 * rest[2][i]
                        + D5 * rest[3][i]
                        + D6 * rest[4][i]
                        + D7 * rest[5][i]);
            }
            let t_new = if last { t1 } else { t + h };
            accepted += 1;
            let verdict = observer(&Step {
                t0: t,
                t1: t_new,
                y0: &y,
                y1: &ynew,
                cont: &cont,
            })?;
            t = t_new;
            std::mem::swap(&mut y, &mut ynew);
            let (first, rest) = k.split_at_mut(1);
            first[0].copy_from_slice(&rest[5]);
            if verdict == Control::Stop {
                return Ok(Outcome {
                    t,
                    y,
                    accepted,
                    rejected,
                    stopped: true,
                });
            }
            if last {
                return Ok(Outcome {
                    t,
                    y,
                    accepted,
                    rejected,
                    stopped: false,
                });
            }
            let fac = if last_rejected { fac.min(1.0) } else { fac };
            last_rejected = false;
            h = (h * fac).abs().min(h_max) * dir;
        } else {
            rejected += 1;
            last_rejected = true;
            h *= fac.min(1.0);
        }
    }
}

fn initial_step<F>(
    field: &mut F,
    t: f64,
    y: &[f64],
    f0: &[f64],
    dir: f64,
    h_max: f64,
    tol: &Tolerances,
) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    if n == 0 {
        return Ok(h_max * dir);
    }
    let sc: Vec<f64> = y.iter().map(|v| tol.atol + tol.rtol * v.abs()).collect();
    let norm = |v: &[f64]| {
        (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n as f64).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(h_max);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + dir * h0 * b).collect();
    let mut f1 = vec![0.0; n];
    field(t + dir * h0, &y1, &mut f1)?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let m = d1.max(d2);
    let h1 = if m <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / m).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(h_max) * dir)
}

/// Samples of a solution at requested times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrates from `t0` to `t1` and returns dense samples at `sample_times`
/// (which must lie between the endpoints and be ordered in the direction of
/// integration). The end state is always appended if not already sampled.
pub fn integrate_ode<F>(
    field: F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    tol: &Tolerances,
    sample_times: &[f64],
) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let dir = (t1 - t0).signum();
    let lo = t0.min(t1);
    let hi = t0.max(t1);
    if sample_times.iter().any(|&s| s < lo || s > hi) {
        return Err(Error::input(
            "sample times must lie within the integration interval",
        ));
    }
    if sample_times.windows(2).any(|w| (w[1] - w[0]) * dir <= 0.0) {
        return Err(Error::input(
            "sample times must be strictly monotone in the integration direction",
        ));
    }
    let mut ts = Vec::with_capacity(sample_times.len() + 1);
    let mut ys = Vec::with_capacity(sample_times.len() + 1);
    let mut next = 0;
    while next < sample_times.len() && sample_times[next] == t0 {
        ts.push(t0);
        ys.push(y0.to_vec());
        next += 1;
    }
    let out = integrate_with(field, t0, t1, y0, tol, |step| {
        while next < sample_times.len() && (sample_times[next] - step.t1) * dir <= 0.0 {
            let s = sample_times[next];
            ts.push(s);
            ys.push(if s == step.t1 {
                step.y1.to_vec()
            } else {
                step.eval(s)
            });
            next += 1;
        }
        Ok(Control::Continue)
    })?;
    if ts.last() != Some(&out.t) {
        ts.push(out.t);
        ys.push(out.y);
    }
    Ok(Trajectory {
        t: ts,
        y: ys,
        accepted: out.accepted,
        rejected: out.rejected,
    })
}
