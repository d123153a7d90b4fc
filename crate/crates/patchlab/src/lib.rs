//! Numerical laboratory for 2D incompressible Euler flows with vortex-patch
//! structure.
//!
//! The library evaluates velocity and velocity gradients from vorticity via
//! the Biot-Savart kernel, integrates Lagrangian flow maps with their
//! Jacobians, pushes tangential vector fields forward along the flow, builds
//! the corrector matrix `A` for which `∇u − ωA` stays Hölder-continuous even
//! though `∇u` jumps across a patch boundary, and provides the discrete
//! norm estimators used to certify those regularity claims against
//! closed-form stationary solutions and brute-force quadrature oracles.

pub mod diagnostics;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod holder;
pub mod kernels;
pub mod quadrature;
pub mod tolerances;
pub mod transport;

pub use error::{Error, Result};
pub use geometry::{Mat2, Vec2};
