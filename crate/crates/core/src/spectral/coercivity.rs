use serde::{Deserialize, Serialize};

use super::fem::{build_sector_with_cutoff, SectorOperator};
use super::ground::SpectralData;
use crate::error::{Error, Result};
use crate::numerics::eigen::smallest_eigenvalues_penalized;
use crate::numerics::quadrature::RadialFunction;
use crate::numerics::report::CheckReport;
use crate::profiles::{dw, laplacian_lambda_w};

/// Pass threshold `η₀` for the global coercivity constant.
pub const COER0_THRESHOLD: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CoercivityMode {
    /// `⟨g, Lg⟩ + Σ wᵢ⟨uᵢ, g⟩² ≥ η‖∇g‖²` with `η ≥ η₀`.
    Global,
    /// `∫_{r≤R}|∇g|² - ∫Vg² + Σ wᵢ⟨uᵢ, g⟩² ≥ -η‖∇g‖²`.
    Truncated { radius: f64, eta: f64 },
}

/// A penalty `weight · ⟨profile, g⟩²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Penalty {
    pub weight: f64,
    pub profile: RadialFunction,
}

impl Penalty {
    pub fn from_fn<F: Fn(f64) -> f64>(op: &SectorOperator, weight: f64, f: F) -> Result<Self> {
        Ok(Self {
            weight,
            profile: RadialFunction::from_fn(op.free_nodes(), f)?,
        })
    }
}

/// Penalties of the global coercivity estimate in sector `ℓ`:
/// `(ν²+1)⟨Y,g⟩² + ⟨ΔΛW,g⟩²` for `ℓ = 0`, `⟨W',g⟩²` for `ℓ = 1`, none above.
pub fn coer0_constraints(op: &SectorOperator, data: &SpectralData) -> Result<Vec<Penalty>> {
    Ok(match op.ell {
        0 => vec![
            Penalty {
                weight: data.nu * data.nu + 1.0,
                profile: data.y.clone(),
            },
            Penalty::from_fn(op, 1.0, laplacian_lambda_w)?,
        ],
        1 => vec![Penalty::from_fn(op, 1.0, dw)?],
        _ => Vec::new(),
    })
}

/// The single penalty `ν²⟨Y,g⟩²` of the truncated estimate.
pub fn coer_constraints(data: &SpectralData) -> Vec<Penalty> {
    vec![Penalty {
        weight: data.nu * data.nu,
        profile: data.y.clone(),
    }]
}

/// Minimum of the penalized quotient over the discrete space, reported
/// against the mode's pass rule.
pub fn coercivity_constant(
    op: &SectorOperator,
    constraints: &[Penalty],
    mode: CoercivityMode,
) -> Result<CheckReport> {
    let rows: Vec<Vec<f64>> = constraints
        .iter()
        .map(|p| {
            if !(p.weight >= 0.0) {
                return Err(Error::input("penalty weights must be nonnegative"));
            }
            let sampled: Vec<f64> = op.free_nodes().iter().map(|&r| p.profile.eval(r)).collect();
            let s = p.weight.sqrt();
            Ok(op
                .l2_metric
                .matvec(&sampled)
                .into_iter()
                .map(|v| s * v)
                .collect())
        })
        .collect::<Result<_>>()?;
    match mode {
        CoercivityMode::Global => {
            let v = smallest_eigenvalues_penalized(&op.stiffness, &rows, &op.h1_metric, 1)?[0];
            Ok(CheckReport::at_least(
                format!("coercivity ℓ={}", op.ell),
                v,
                COER0_THRESHOLD,
            ))
        }
        CoercivityMode::Truncated { radius, eta } => {
            if !(radius > 0.0 && eta >= 0.0) {
                return Err(Error::input(
                    "truncation radius must be positive and η nonnegative",
                ));
            }
            let cut = build_sector_with_cutoff(op.ell, &op.mesh, Some(radius))?;
            let v = smallest_eigenvalues_penalized(&cut.stiffness, &rows, &op.h1_metric, 1)?[0];
            Ok(CheckReport::at_least(
                format!("truncated coercivity ℓ={} R={radius}", op.ell),
                v,
                -eta,
            ))
        }
    }
}
