//! General ADAM, VRADAM with both reset options, and a plain SGD baseline.
//!
//! All three drive a [`StochasticProblem`](crate::problems::StochasticProblem)
//! and emit a gap-free [`RunRecord`]. Runs are pure functions of
//! `(problem, config, start, RandomSource)`.

mod adam;
mod record;
mod schedule;
mod sgd;
mod vradam;

pub use adam::{adam_step, bias_correct, one_minus_pow, run_general_adam, AdamHyper, AdamState};
pub use record::{Clock, Evaluation, RecordedPoint, RunOptions, RunRecord};
pub use schedule::{LearningRate, Schedule};
pub use sgd::run_sgd;
pub use vradam::{run_vradam, run_vradam_finite_sum, vradam_inner_direction, ResetOption, VradamConfig};

/// Slack for bounds that hold exactly in real arithmetic but are evaluated
/// through a handful of rounded operations.
pub(crate) const ROUNDING_SLACK: f64 = 1.0 + 8.0 * f64::EPSILON;
