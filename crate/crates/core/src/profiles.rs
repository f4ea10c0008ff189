//! The ground state `W(x) = (1 + |x|²/15)^{-3/2}` of `ΔW + W^{7/3} = 0` in
//! `R^5`, its scaling generators and the nonlinearity `f(u) = |u|^{4/3} u`.
//!
//! All radial profiles are evaluated in closed form through `s = r²/15`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::report::CheckReport;

/// Space dimension.
pub const DIM: usize = 5;
/// `N(N-2)` for `N = 5`; the constant in `W = (1 + r²/15)^{-3/2}`.
pub const CRITICAL_CONSTANT: f64 = 15.0;
/// Area of the unit sphere `S^4`.
pub const SPHERE_AREA: f64 = 8.0 * std::f64::consts::PI * std::f64::consts::PI / 3.0;

/// Closed-form evaluator for `W` and the radial profiles derived from it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GroundState;

impl GroundState {
    pub const DIM: usize = DIM;
    pub const CRITICAL_CONSTANT: f64 = CRITICAL_CONSTANT;

    /// `lim r³ W(r) = 15^{3/2}`.
    pub fn tail_constant() -> f64 {
        CRITICAL_CONSTANT.powf(1.5)
    }

    pub fn eval(r: f64) -> Result<f64> {
        check_radius(r)?;
        Ok(w(r))
    }

    pub fn eval_lambda(r: f64) -> Result<f64> {
        check_radius(r)?;
        Ok(lambda_w(r))
    }

    pub fn eval_ulambda_lambda(r: f64) -> Result<f64> {
        check_radius(r)?;
        Ok(ulambda_lambda_w(r))
    }

    pub fn eval_grad_radial(r: f64) -> Result<f64> {
        check_radius(r)?;
        Ok(dw(r))
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!(
            "radius must be finite and nonnegative, got {r}"
        )))
    }
}

#[inline]
fn s_of(r: f64) -> f64 {
    r * r / CRITICAL_CONSTANT
}

/// `W(r)`.
#[inline]
pub fn w(r: f64) -> f64 {
    (1.0 + s_of(r)).powf(-1.5)
}

/// `W'(r) = -(r/5)(1 + s)^{-5/2}`.
#[inline]
pub fn dw(r: f64) -> f64 {
    -(r / 5.0) * (1.0 + s_of(r)).powf(-2.5)
}

/// `W''(r) = (1 + s)^{-7/2} (s - (1 + s)/5)`.
#[inline]
pub fn d2w(r: f64) -> f64 {
    let s = s_of(r);
    (1.0 + s).powf(-3.5) * (s - (1.0 + s) / 5.0)
}

/// `ΛW = (3/2)W + rW' = (3/2)(1 - s)(1 + s)^{-5/2}`.
#[inline]
pub fn lambda_w(r: f64) -> f64 {
    let s = s_of(r);
    1.5 * (1.0 - s) * (1.0 + s).powf(-2.5)
}

/// `(ΛW)'(r)`.
#[inline]
pub fn d_lambda_w(r: f64) -> f64 {
    // d/dr = (2r/15) d/ds
    let s = s_of(r);
    let ds = 1.5 * (1.0 + s).powf(-3.5) * (-3.5 + 1.5 * s);
    2.0 * r / CRITICAL_CONSTANT * ds
}

/// `Λ̲ΛW = (5/2)ΛW + r(ΛW)' = (1 + s)^{-7/2}(15/4 - 21s/2 + 3s²/4)`.
#[inline]
pub fn ulambda_lambda_w(r: f64) -> f64 {
    let s = s_of(r);
    (1.0 + s).powf(-3.5) * (3.75 - 10.5 * s + 0.75 * s * s)
}

/// `ΔΛW = -f'(W) ΛW`, a consequence of `LΛW = 0`.
#[inline]
pub fn laplacian_lambda_w(r: f64) -> f64 {
    -potential(r) * lambda_w(r)
}

/// The potential of the linearized operator, `f'(W) = (7/3) W^{4/3}`.
#[inline]
pub fn potential(r: f64) -> f64 {
    7.0 / 3.0 * (1.0 + s_of(r)).powi(-2)
}

/// Values of the nonlinearity and its derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nonlinearity {
    /// `f(u) = |u|^{4/3} u`
    pub f: f64,
    /// `F(u) = (3/10)|u|^{10/3}`
    pub big_f: f64,
    /// `f'(u) = (7/3)|u|^{4/3}`
    pub df: f64,
    /// `f''(u) = (28/9)|u|^{1/3} sign(u)`, zero at the origin
    pub d2f: f64,
}

pub fn nonlinearity(u: f64) -> Nonlinearity {
    let a = u.abs();
    let a13 = a.cbrt();
    let a43 = a * a13;
    Nonlinearity {
        f: a43 * u,
        big_f: 0.3 * a.powf(10.0 / 3.0),
        df: 7.0 / 3.0 * a43,
        d2f: if u == 0.0 {
            0.0
        } else {
            28.0 / 9.0 * a13 * u.signum()
        },
    }
}

#[inline]
pub fn f(u: f64) -> f64 {
    u.abs().powf(4.0 / 3.0) * u
}

#[inline]
pub fn big_f(u: f64) -> f64 {
    0.3 * u.abs().powf(10.0 / 3.0)
}

#[inline]
pub fn df(u: f64) -> f64 {
    7.0 / 3.0 * u.abs().powf(4.0 / 3.0)
}

/// Scaling and translation `v ↦ λ^{-p} v((x - center)/λ)` acting on radial
/// profiles. `p = 3/2` preserves `Ḣ¹`, `p = 5/2` preserves `L²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingAction {
    pub lambda: f64,
    pub center: [f64; DIM],
}

impl ScalingAction {
    pub fn new(lambda: f64, center: [f64; DIM]) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::input(format!(
                "scale must be positive, got {lambda}"
            )));
        }
        Ok(Self { lambda, center })
    }

    pub fn centered(lambda: f64) -> Result<Self> {
        Self::new(lambda, [0.0; DIM])
    }

    fn radius(&self, x: &[f64; DIM]) -> f64 {
        x.iter()
            .zip(self.center.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `λ^{-3/2} v(|x - center|/λ)`.
    pub fn h1<F: Fn(f64) -> f64>(&self, profile: F, x: &[f64; DIM]) -> f64 {
        self.lambda.powf(-1.5) * profile(self.radius(x) / self.lambda)
    }

    /// `λ^{-5/2} v(|x - center|/λ)`.
    pub fn l2<F: Fn(f64) -> f64>(&self, profile: F, x: &[f64; DIM]) -> f64 {
        self.lambda.powf(-2.5) * profile(self.radius(x) / self.lambda)
    }

    /// Radial version of [`Self::h1`]: the rescaled profile at distance `r`.
    pub fn h1_radial<F: Fn(f64) -> f64>(&self, profile: F, r: f64) -> f64 {
        self.lambda.powf(-1.5) * profile(r / self.lambda)
    }

    pub fn l2_radial<F: Fn(f64) -> f64>(&self, profile: F, r: f64) -> f64 {
        self.lambda.powf(-2.5) * profile(r / self.lambda)
    }
}

/// Pointwise residual `W'' + (4/r)W' + W^{7/3}` at `r > 0`; at `r = 0` the
/// radial Laplacian is `5W''(0)`.
pub fn ground_state_residual(r: f64) -> f64 {
    let lap = if r == 0.0 {
        5.0 * d2w(0.0)
    } else {
        d2w(r) + 4.0 / r * dw(r)
    };
    lap + w(r).powf(7.0 / 3.0)
}

/// Maximum of the ground-state residual over the given radii. Passes when
/// it does not exceed `1e-10`.
pub fn verify_ground_state(radii: &[f64]) -> Result<CheckReport> {
    let mut worst = 0.0_f64;
    for &r in radii {
        check_radius(r)?;
        worst = worst.max(ground_state_residual(r).abs());
    }
    Ok(CheckReport::at_most("ground_state_residual", worst, 1e-10))
}

/// `|f(u+v) - f(u) - f(v) - f'(u)v|` against `|u|^{2/3}|v|^{5/3}`.
/// Returns `(remainder, bound)`.
pub fn taylor1_terms(u: f64, v: f64) -> (f64, f64) {
    let rem = (f(u + v) - f(u) - f(v) - df(u) * v).abs();
    let bound = u.abs().powf(2.0 / 3.0) * v.abs().powf(5.0 / 3.0);
    (rem, bound)
}

/// Multi-term remainder against
/// `|u|^{2/3} Σ|v_j|^{5/3} + Σ_{j≠l} |v_j||v_l|^{4/3}`.
pub fn taylor2_terms(u: f64, vs: &[f64]) -> (f64, f64) {
    let sum: f64 = vs.iter().sum();
    let rem = (f(u + sum) - f(u) - vs.iter().map(|&v| f(v)).sum::<f64>() - df(u) * sum).abs();
    let mut bound: f64 =
        u.abs().powf(2.0 / 3.0) * vs.iter().map(|v| v.abs().powf(5.0 / 3.0)).sum::<f64>();
    for (j, vj) in vs.iter().enumerate() {
        for (l, vl) in vs.iter().enumerate() {
            if j != l {
                bound += vj.abs() * vl.abs().powf(4.0 / 3.0);
            }
        }
    }
    (rem, bound)
}

/// Ratio remainder/bound; `0/0` counts as zero.
pub fn remainder_ratio((rem, bound): (f64, f64)) -> f64 {
    if bound == 0.0 {
        if rem <= f64::EPSILON {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        rem / bound
    }
}

/// Sampling range for the Taylor checks.
pub const TAYLOR_RANGE: f64 = 10.0;
/// Constant used in place of `≲` in the Taylor checks.
pub const TAYLOR_CONSTANT: f64 = 10.0;

/// Random-sample check of both Taylor remainder bounds on `[-10, 10]`.
/// Each sample draws one `(u, v)` pair and one `(u, v_1..v_J)` tuple with
/// `J ∈ {2, 3, 4}`; the reported value is the largest ratio seen.
pub fn taylor_remainder_check(samples: usize, seed: u64) -> Result<CheckReport> {
    if samples == 0 {
        return Err(Error::input("at least one sample is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    let draw = |rng: &mut ChaCha8Rng| rng.random_range(-TAYLOR_RANGE..=TAYLOR_RANGE);
    for _ in 0..samples {
        let u = draw(&mut rng);
        let v = draw(&mut rng);
        worst = worst.max(remainder_ratio(taylor1_terms(u, v)));
        let j = rng.random_range(2..=4);
        let u2 = draw(&mut rng);
        let vs: Vec<f64> = (0..j).map(|_| draw(&mut rng)).collect();
        worst = worst.max(remainder_ratio(taylor2_terms(u2, &vs)));
    }
    Ok(CheckReport::at_most(
        "taylor_remainder_ratio",
        worst,
        TAYLOR_CONSTANT,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn w_values() {
        assert_eq!(GroundState::eval(0.0).unwrap(), 1.0);
        assert!(close(w(15f64.sqrt()), 2f64.powf(-1.5), 1e-15));
        let r = 1e3;
        let tail = r * r * r * w(r);
        assert!((tail / GroundState::tail_constant() - 1.0).abs() < 0.01);
        assert!((GroundState::tail_constant() - 58.0948).abs() < 1e-4);
        assert!(GroundState::eval(-1.0).is_err());
        assert!(GroundState::eval_lambda(-1e-3).is_err());
    }

    #[test]
    fn w_positive_and_decreasing() {
        let mut prev = w(0.0);
        for i in 1..2000 {
            let r = i as f64 * 0.05;
            let cur = w(r);
            assert!(cur > 0.0 && cur < prev);
            prev = cur;
        }
    }

    #[test]
    fn generator_values_at_origin() {
        assert_eq!(lambda_w(0.0), 1.5);
        assert_eq!(dw(0.0), 0.0);
        assert!(close(ulambda_lambda_w(0.0), 3.75, 1e-15));
    }

    #[test]
    fn closed_forms_match_finite_differences() {
        let h = 1e-5;
        for &r in &[0.3, 1.0, 2.5, 3.9, 7.0, 20.0] {
            let fd = (w(r + h) - w(r - h)) / (2.0 * h);
            assert!(close(dw(r), fd, 1e-8), "W' at {r}");
            let fd2 = (dw(r + h) - dw(r - h)) / (2.0 * h);
            assert!(close(d2w(r), fd2, 1e-8), "W'' at {r}");
            assert!(close(lambda_w(r), 1.5 * w(r) + r * dw(r), 1e-13));
            let fdl = (lambda_w(r + h) - lambda_w(r - h)) / (2.0 * h);
            assert!(close(d_lambda_w(r), fdl, 1e-8));
            assert!(close(
                ulambda_lambda_w(r),
                2.5 * lambda_w(r) + r * d_lambda_w(r),
                1e-13
            ));
        }
    }

    #[test]
    fn generators_decay_like_inverse_cube() {
        for &r in &[1e3, 1e4] {
            let r3 = r * r * r;
            assert!(close(
                r3 * lambda_w(r),
                -1.5 * GroundState::tail_constant(),
                1e-4
            ));
            assert!((r3 * ulambda_lambda_w(r)).abs() < 1e3);
        }
    }

    #[test]
    fn scaling_generator_is_minus_lambda() {
        // d/dλ at λ = 1 of λ^{-3/2} W(r/λ) equals -ΛW(r), second order in h.
        for &r in &[0.0, 0.5, 2.0, 5.0, 11.0] {
            let g = |lam: f64| lam.powf(-1.5) * w(r / lam);
            let mut errs = Vec::new();
            for &h in &[1e-2, 5e-3] {
                let fd = (g(1.0 + h) - g(1.0 - h)) / (2.0 * h);
                errs.push((fd + lambda_w(r)).abs());
            }
            if errs[0] > 1e-12 {
                assert!(errs[0] / errs[1] > 3.5, "order at r = {r}: {errs:?}");
            }
        }
    }

    #[test]
    fn nonlinearity_values() {
        let z = nonlinearity(0.0);
        assert_eq!((z.f, z.big_f, z.df, z.d2f), (0.0, 0.0, 0.0, 0.0));
        let two = nonlinearity(2.0);
        assert!(close(two.f, 2f64.powf(7.0 / 3.0), 1e-14));
        assert!(close(two.f, 5.03968, 1e-6));
        let m1 = nonlinearity(-1.0);
        assert!(close(m1.f, -1.0, 1e-15));
        assert!(close(m1.df, 7.0 / 3.0, 1e-15));
        assert!(close(m1.d2f, -28.0 / 9.0, 1e-15));
        // F' = f, f' = df by finite differences
        for &u in &[-3.0, -0.4, 0.7, 2.2] {
            let h = 1e-6;
            let n = nonlinearity(u);
            assert!(close((big_f(u + h) - big_f(u - h)) / (2.0 * h), n.f, 1e-7));
            assert!(close((f(u + h) - f(u - h)) / (2.0 * h), n.df, 1e-7));
            assert!(close((df(u + h) - df(u - h)) / (2.0 * h), n.d2f, 1e-7));
            assert!(close(n.big_f, big_f(u), 1e-14));
        }
    }

    #[test]
    fn ground_state_residuals() {
        assert!(ground_state_residual(1.0).abs() <= 1e-12);
        let grid: Vec<f64> = (0..=4000).map(|i| i as f64 * 0.25).collect();
        assert!(verify_ground_state(&grid).unwrap().pass);
        let far: Vec<f64> = (0..=1000).map(|i| 1e3 * i as f64 / 1000.0).collect();
        assert!(verify_ground_state(&far).unwrap().pass);
        assert!(verify_ground_state(&[-1.0]).is_err());
    }

    #[test]
    fn taylor_trivial_cases() {
        assert_eq!(taylor1_terms(1.0, 0.0).0, 0.0);
        assert!(taylor1_terms(0.0, 1.0).0 <= 1e-15);
        assert_eq!(remainder_ratio(taylor1_terms(0.0, 1.0)), 0.0);
        assert!(taylor_remainder_check(0, 1).is_err());
    }

    #[test]
    fn scaling_action_rejects_nonpositive_scale() {
        assert!(ScalingAction::centered(0.0).is_err());
        assert!(ScalingAction::centered(-2.0).is_err());
        let s = ScalingAction::centered(0.5).unwrap();
        assert!(close(
            s.h1_radial(w, 0.5),
            0.5f64.powf(-1.5) * w(1.0),
            1e-15
        ));
    }
}
