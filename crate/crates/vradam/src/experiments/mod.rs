//! Monte-Carlo experiments and the checks of the convergence guarantees.
//!
//! Trial `i` of an experiment always draws from stream `i` of the base seed,
//! trials run on the rayon pool, and results are reduced in trial order, so
//! aggregates do not depend on thread scheduling.

mod compare;
mod divergence;
mod rate;
mod reset;
mod train;
mod variance;

pub use compare::{relative_difference, TimedValue};
pub use divergence::{
    divergence_experiment, drift_estimate, DivergenceReport, DivergenceSpec, DriftEstimate, TrialOptimizer,
};
pub use rate::{rate_check, RateCheck, RateSpec};
pub use reset::{hyper_clause, reset_comparison, ResetOutcome, ResetSpec};
pub use train::{
    best_final_loss, grid_cells, train_cell, train_grid, GridCell, TrainMethod, TrainRun, TrainSpec, ALPHA_GRID,
    GAMMA_GRID,
};
pub use variance::{min_so_far_gradient_norm, snapshot_gradient_spread, variance_track, VariancePoint, VarianceSeries};

use rayon::prelude::*;

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_900_4;

/// Runs `f(0), …, f(trials-1)` in parallel and returns results in index order.
pub fn run_trials<T, F>(trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..trials).into_par_iter().map(f).collect()
}
