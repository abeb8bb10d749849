//! Autoregressive AR(1) processes on the orthogonal group, Stiefel and
//! Grassmann manifolds, and identification of the system parameter
//! `Φ ∈ O(n)` from an observed trajectory.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. The only thing `std` adds is wall-clock timing of the
//! estimators.
//!
//! Layout:
//! - [`matcore`]: dense kernels (matrix exponential, logarithm on SO(n),
//!   projections, bases, sampling).
//! - [`manifolds`]: point types, exponential and approximate logarithm
//!   maps, distances and the left `O(n)` action.
//! - [`arproc`]: trajectory simulation and Karcher means.
//! - [`sysid`]: barycentre estimator on `O(n)` and conjugate-gradient
//!   estimators on `St(n,k)` / `Gr(n,k)`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod arproc;
pub mod error;
pub mod manifolds;
pub mod matcore;
pub mod rng;
pub mod sysid;

pub use error::{Error, Result};
pub use rng::RandomStream;

/// Dense real matrix used throughout the crate.
pub type Mat = nalgebra::DMatrix<f64>;

#[cfg(test)]
pub(crate) mod testutil;
