//! General ADAM, variance-reduced ADAM (VRADAM) and the stochastic problems
//! on which plain ADAM provably drifts away from the optimum.
//!
//! The crate is `no_std` and needs only `alloc`. Everything here is a pure
//! function of its inputs plus an explicitly passed [`RandomSource`], so every
//! run is reproducible bit for bit. IO, threads and clocks live in the
//! companion `vradam` crate.
//!
//! Layout:
//!
//! - [`numerics`]: dense vectors, the seeded PRNG, finite differences, bisection
//!   and running statistics.
//! - [`problems`]: the gradient-estimator abstraction and its concrete problems
//!   (the two-branch divergence problem, its finite-sum recasts, clipped
//!   quadratics, logistic regression and a two-layer network).
//! - [`optimizers`]: ADAM without bias correction, VRADAM with the resetting and
//!   carrying options, and an SGD baseline.
//! - [`verify`]: exhaustive oracles that check problem constructions without
//!   touching optimizer code.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod numerics;
pub mod optimizers;
pub mod problems;
pub mod verify;

pub use error::{Error, Result, StepLocation};
pub use numerics::{DenseVector, RandomSource, SeriesStats};
