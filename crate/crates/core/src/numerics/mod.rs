//! Numerical kernels shared by the physics modules.

pub mod banded;
pub mod eigen;
pub mod fit;
pub mod gauss;
pub mod ode;
pub mod quadrature;
pub mod report;
pub mod roots;
pub mod sphere;

pub use eigen::{smallest_eigenpairs, EigenPairs};
pub use ode::{integrate_ode, Tolerances, Trajectory};
pub use quadrature::{quad_radial, RadialFunction, RadialGrid};
pub use sphere::{minimize_on_sphere_sector, SphereMinimum};
