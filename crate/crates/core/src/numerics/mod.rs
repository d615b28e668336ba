//! Deterministic numeric foundation shared by every other module.

mod calculus;
mod rng;
mod stats;
mod vector;

pub use calculus::{bisect_root, finite_difference_gradient};
pub use rng::RandomSource;
pub use stats::{NeumaierSum, SeriesStats};
pub use vector::{axpy, DenseVector};

/// `|a - b| / max(1, |a|, |b|)`: relative error that degrades to absolute
/// error near zero.
pub fn unit_floor_relative_error(a: f64, b: f64) -> f64 {
    let scale = 1.0f64.max(a.abs()).max(b.abs());
    (a - b).abs() / scale
}
