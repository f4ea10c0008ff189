//! Bracketing and bisection for scalar functions.

use crate::error::{Error, Result};

/// Bisection on `[lo, hi]` for a sign change of `f`. Stops when the bracket
/// is narrower than `xtol` or after 200 halvings.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::input(format!("no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Expands `[lo, hi]` geometrically away from `lo` until `f` changes sign.
pub fn bracket_upward<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    mut hi: f64,
    max_expansions: usize,
) -> Result<(f64, f64)> {
    let flo = f(lo);
    let mut prev = lo;
    for _ in 0..max_expansions {
        let fh = f(hi);
        if fh.signum() != flo.signum() {
            return Ok((prev, hi));
        }
        prev = hi;
        hi = lo + 2.0 * (hi - lo);
    }
    Err(Error::input("failed to bracket a sign change"))
}
