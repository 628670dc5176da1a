//! Continuous weak measurement of a two-qubit system where only one qubit
//! (Alice's) is probed.
//!
//! The crate simulates the conditioned evolution of the joint state under a
//! stochastic master equation expressed in real Pauli coefficients, and
//! implements measurement-axis feedback rules for rapidly and/or
//! deterministically purifying either qubit:
//!
//! - [`pauli`] — joint states as 4×4 real coefficient matrices, reduced
//!   Bloch vectors, purities, the correlation matrix C, preset example
//!   states, validation, and projective-measurement analysis.
//! - [`vec3`] / [`mat3`] / [`svd3`] — the exact-size real linear algebra the
//!   axis rules need, including a Jacobi 3×3 SVD.
//! - [`sme`] — Euler–Maruyama integrators for the coefficient form and the
//!   dense density-matrix form of the same equation.
//! - [`strategy`] — feedback rules (rate-optimal, noise-free, simultaneous)
//!   and analytic rate predictors.
//! - [`ensemble`] — reproducible multi-trajectory runs with per-step
//!   statistics.
//! - [`scan`] — rate maps over all axis orientations and grid/SVD argmax
//!   cross-checks.

// index-based loops mirror the subscripts of the coefficient equations
#![allow(clippy::needless_range_loop)]

pub mod cmat4;
pub mod ensemble;
pub mod error;
pub mod mat3;
pub mod pauli;
pub mod rng;
pub mod scan;
pub mod sme;
pub mod strategy;
pub mod svd3;
pub mod vec3;

pub use error::{Error, Result};
pub use mat3::{plane_projector, Mat3};
pub use pauli::{Party, Preset, ProjectiveOutcome, Subsystem, TwoQubitState};
pub use sme::{SimParams, TrajectoryRecord};
pub use strategy::{DegeneracyPolicy, Rate, Strategy, StrategyConfig};
pub use svd3::{svd3, Svd3};
pub use vec3::{orthonormal_complement, Vec3};
