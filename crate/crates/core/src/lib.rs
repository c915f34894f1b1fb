//! Adiabatic evolution of a dissipative two-level system and its complex
//! Berry phase.
//!
//! * [`numerics`]: complex linear algebra, adaptive integration, calculus helpers.
//! * [`model`]: effective Hamiltonian, bi-orthogonal eigensystem, connection and phases.
//! * [`geometry`]: complex mixing-angle parametrization, curvature, line/surface integrals.
//! * [`dynamics`]: loop schedules, non-Hermitian and Lindblad propagation.
//! * [`protocols`]: interferometric and norm-ratio estimators, the non-unitary gate.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod model;
pub mod numerics;
pub mod protocols;

pub use error::{Error, ErrorKind, Result};
pub use model::{Branch, ComplexPhase, Direction, DriveParams};
