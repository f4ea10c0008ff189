use serde::{Deserialize, Serialize};

use super::fem::SectorOperator;
use crate::error::{Error, Result};
use crate::numerics::eigen::{smallest_eigenpairs, smallest_eigenvalues_penalized};
use crate::numerics::fit::fit_line;
use crate::numerics::quadrature::RadialFunction;

/// Window of `r` used for the exponential decay fit of `Y`.
pub const DECAY_WINDOW: (f64, f64) = (10.0, 25.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub nu: f64,
    #[serde(rename = "Y")]
    pub y: RadialFunction,
    /// Slope of `-ln(r² Y)` against `r` over [`DECAY_WINDOW`].
    pub decay_rate: f64,
}

/// The negative eigenpair `(-ν², Y)` of the `ℓ = 0` sector, with `Y`
/// positive and `L²`-normalized.
pub fn ground_eigenpair(op: &SectorOperator) -> Result<SpectralData> {
    if op.ell != 0 {
        return Err(Error::input(
            "the negative eigenpair lives in the ℓ = 0 sector",
        ));
    }
    let pairs = smallest_eigenpairs(&op.stiffness, &op.l2_metric, 1)?;
    let lam = pairs.values[0];
    if lam >= 0.0 {
        return Err(Error::Contradiction(lam));
    }
    let mut v = pairs.vectors.into_iter().next().unwrap();
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let nodes = op.free_nodes().to_vec();
    let (x, y): (Vec<f64>, Vec<f64>) = nodes
        .iter()
        .zip(&v)
        .filter(|(r, val)| (DECAY_WINDOW.0..=DECAY_WINDOW.1).contains(*r) && **val > 0.0)
        .map(|(r, val)| (*r, (r * r * val).ln()))
        .unzip();
    let decay_rate = if x.len() >= 2 {
        -fit_line(&x, &y)?.slope
    } else {
        f64::NAN
    };
    Ok(SpectralData {
        nu: (-lam).sqrt(),
        y: RadialFunction::new(nodes, v)?,
        decay_rate,
    })
}

/// Second eigenvalue of the `ℓ = 0` sector relative to the homogeneous `H¹`
/// metric. Its continuum limit is the kernel eigenvalue `0` carried by `ΛW`.
pub fn second_radial_eigenvalue(op: &SectorOperator) -> Result<f64> {
    if op.ell != 0 {
        return Err(Error::input(
            "second radial eigenvalue is defined for ℓ = 0",
        ));
    }
    Ok(smallest_eigenvalues_penalized(&op.stiffness, &[], &op.h1_metric, 2)?[1])
}

/// Smallest eigenvalue of the sector relative to the `H¹` metric.
pub fn sector_bottom(op: &SectorOperator) -> Result<f64> {
    Ok(smallest_eigenvalues_penalized(&op.stiffness, &[], &op.h1_metric, 1)?[0])
}
