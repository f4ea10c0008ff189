//! Sector-by-sector spectral theory of `L = -Δ - (7/3)W^{4/3}` on `R^5`.
//!
//! Functions `g(r)Y_ℓ(ω)` with `Y_ℓ` a spherical harmonic of degree `ℓ` on
//! `S^4` see the radial operator `-g'' - (4/r)g' + ℓ(ℓ+3)g/r² - Vg`.
//! The eigen and coercivity problems use P1 finite elements on a graded
//! mesh; the correctors use sixth-order finite differences.

mod coercivity;
mod correctors;
mod fem;
mod ground;
mod shooting;

pub use coercivity::{
    coer0_constraints, coer_constraints, coercivity_constant, CoercivityMode, Penalty,
    COER0_THRESHOLD,
};
pub use correctors::{
    solve_correctors, CorrectorGrid, CorrectorPair, CORRECTOR_RESIDUAL_TOL, SOLVABILITY_TOL,
};
pub use fem::{build_sector, FeMesh, SectorOperator, MIN_ELEMENTS};
pub use ground::{ground_eigenpair, second_radial_eigenvalue, sector_bottom, SpectralData};
pub use shooting::shooting_nu;

/// `105π/128`, the coefficient making `rhs_Q` orthogonal to `ΛW`.
pub const CORRECTOR_COEFFICIENT: f64 = 105.0 * std::f64::consts::PI / 128.0;
