use crate::error::{Error, Result};
use crate::numerics::ode::{integrate_with, Control, Tolerances};
use crate::numerics::roots::bisect;
use crate::profiles::potential;

const START: f64 = 1e-4;
const END: f64 = 30.0;
const BLOWUP: f64 = 1e8;

/// `true` if the regular solution of `Y'' + (4/r)Y' + VY = ν²Y`, `Y(0) = 1`,
/// crosses zero before `r = 30` (so `ν` is below the eigenvalue).
fn crosses(nu: f64) -> Result<bool> {
    let e = nu * nu;
    let a = (e - potential(0.0)) / 10.0;
    let y0 = [1.0 + a * START * START, 2.0 * a * START];
    let tol = Tolerances::new(1e-12, 1e-14);
    let mut crossed = false;
    integrate_with(
        |r, y, dy| {
            dy[0] = y[1];
            dy[1] = (e - potential(r)) * y[0] - 4.0 / r * y[1];
            Ok(())
        },
        START,
        END,
        &y0,
        &tol,
        |step| {
            if step.y1[0] < 0.0 {
                crossed = true;
                return Ok(Control::Stop);
            }
            Ok(if step.y1[0] > BLOWUP {
                Control::Stop
            } else {
                Control::Continue
            })
        },
    )?;
    Ok(crossed)
}

/// `ν` by bisection on the node count of the radial eigenvalue ODE.
pub fn shooting_nu(xtol: f64) -> Result<f64> {
    let (lo, hi) = (1e-3, potential(0.0).sqrt());
    if !crosses(lo)? || crosses(hi)? {
        return Err(Error::ShootingFailure(
            "ν is not bracketed by (0, √V(0))".into(),
        ));
    }
    let mut err = None;
    let nu = bisect(
        |nu| match crosses(nu) {
            Ok(true) => -1.0,
            Ok(false) => 1.0,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        xtol,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(nu),
    }
}
