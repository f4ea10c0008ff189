//! Finite-dimensional mechanics of multi-bubble infinite-time blow-up for the
//! focusing energy-critical wave equation in five space dimensions.
//!
//! The crate is organised bottom-up:
//!
//! * [`profiles`]: the Aubin–Talenti ground state `W`, its scaling generators
//!   and the nonlinearity `f(u) = |u|^{4/3} u`.
//! * [`numerics`]: radial quadrature, adaptive Runge–Kutta integration,
//!   banded generalized eigensolvers and descent on the sphere sector.
//! * [`interaction`]: the interaction coefficients `B_k`, the potential `V`,
//!   two-center integrals and the ansatz energy.
//! * [`configuration`]: blow-up constants `c` with `B(c) = -6c`.
//! * [`spectral`]: the linearized operator `L = -Δ - (7/3) W^{4/3}` sector by
//!   sector, its negative eigenpair, coercivity constants and correctors.
//! * [`dynamics`]: the reduced modulation flow with instability channels,
//!   bootstrap monitoring, Lyapunov functionals and shooting.

pub mod configuration;
pub mod dynamics;
pub mod error;
pub mod interaction;
pub mod numerics;
pub mod profiles;
pub mod spectral;

pub use error::{Error, Result};
pub use numerics::report::{CheckReport, ToleranceMode};
