//! Lowest-order weakly penalized discontinuous Galerkin methods for
//! `-Δu = f` in two dimensions with homogeneous Dirichlet data, together
//! with the Crouzeix–Raviart post-processing, a residual estimator, bulk
//! marking and newest-vertex bisection needed to drive an adaptive loop.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and wall-clock timing live in the `adaptive-dg` crate.
//!
//! Module map:
//!
//! * [`mesh`]: conforming triangulations and newest-vertex bisection.
//! * [`dg`]: the discrete spaces, jumps, edge means and lifting operators.
//! * [`assembly`]: the four symmetric DG forms, the load and the CR system.
//! * [`solver`]: Jacobi-preconditioned conjugate gradients.
//! * [`postprocess`]: the averaged CR solution and its computable identities.
//! * [`estimate`] and [`marking`]: indicators and bulk marking.
//! * [`adapt`]: problems, error measurement and the adaptive loop.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod adapt;
pub mod assembly;
pub mod dg;
mod error;
pub mod estimate;
pub mod marking;
mod math;
pub mod mesh;
pub mod postprocess;
pub mod problem;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod verify;

pub use error::{Error, Result};
pub use mesh::{Edge, Mesh, Point2, RefinementMap, Triangle};
