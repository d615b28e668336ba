use std::collections::HashMap;

use vradam_core::optimizers::{vradam_inner_direction, RunRecord};
use vradam_core::problems::{FiniteSum, Minibatch, StochasticProblem};
use vradam_core::{DenseVector, RandomSource, SeriesStats};

use crate::{Error, Result};

/// Resampled spread of the variance-reduced direction at one frozen
/// `(w_k, w̃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariancePoint {
    pub step: usize,
    pub outer: usize,
    pub inner: usize,
    /// Trace of the sample covariance of `g_k` over the resamples.
    pub lambda_hat: f64,
    /// Largest single-coordinate sample variance.
    pub lambda_max_coordinate: f64,
    /// Standard error of `lambda_hat`.
    pub std_error: f64,
    /// `L²‖w_k - w̃‖²`.
    pub bound: f64,
}

impl VariancePoint {
    /// `λ̂ - (bound + 3·SE)`; positive means the inequality is violated
    /// beyond sampling noise.
    pub fn excess(&self) -> f64 {
        self.lambda_hat - (self.bound + 3.0 * self.std_error)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceSeries {
    pub points: Vec<VariancePoint>,
    pub resamples: usize,
    pub lipschitz: f64,
}

impl VarianceSeries {
    pub fn max_excess(&self) -> f64 {
        self.points.iter().map(VariancePoint::excess).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Redraws `resamples` batches at every recorded point of a VRADAM run on
/// `problem` with batch size `batch_size`.
pub fn variance_track<F: FiniteSum>(
    problem: &F,
    batch_size: usize,
    record: &RunRecord,
    resamples: usize,
    rng: &mut RandomSource,
) -> Result<VarianceSeries> {
    if resamples < 30 {
        return Err(Error::config("variance tracking needs at least 30 resamples"));
    }
    let lipschitz = problem.constants().lipschitz.ok_or_else(|| Error::config("problem declares no Lipschitz constant"))?;
    let mb = Minibatch::new(problem, batch_size)?;
    let d = problem.dim();
    let mut sampler = mb.sampler();
    let mut batch = Vec::new();
    let (mut scratch, mut g) = (DenseVector::zeros(d), DenseVector::zeros(d));
    // Full gradients per snapshot, keyed by outer index.
    let mut full_cache: HashMap<usize, DenseVector> = HashMap::new();
    let mut points = Vec::with_capacity(record.points.len());

    for p in &record.points {
        let snapshot = p.snapshot.as_ref().ok_or_else(|| Error::Internal("recorded point without a snapshot".into()))?;
        let expected = record.snapshots.get(p.outer - 1);
        if expected != Some(snapshot) || (p.inner == 1 && p.w != *snapshot) {
            return Err(Error::Internal(format!("recorded state at step {} does not replay", p.step)));
        }
        let full = full_cache.entry(p.outer).or_insert_with(|| mb.full_gradient(snapshot));
        let mut coords = vec![SeriesStats::new(); d];
        let mut draws = Vec::with_capacity(resamples);
        for _ in 0..resamples {
            mb.sample(&mut sampler, rng, &mut batch);
            vradam_inner_direction(&mb, &p.w, snapshot, &batch, full, &mut scratch, &mut g)?;
            coords.iter_mut().zip(g.as_slice()).for_each(|(s, &x)| s.push(x));
            draws.push(g.clone());
        }
        let mean = DenseVector::new(coords.iter().map(SeriesStats::mean).collect())?;
        // Per-draw squared deviation; its mean scaled by r/(r-1) is λ̂.
        let r = resamples as f64;
        let dev = SeriesStats::from_slice(&draws.iter().map(|x| x.distance(&mean).powi(2)).collect::<Vec<_>>());
        let scale = r / (r - 1.0);
        points.push(VariancePoint {
            step: p.step,
            outer: p.outer,
            inner: p.inner,
            lambda_hat: coords.iter().map(SeriesStats::variance).sum(),
            lambda_max_coordinate: coords.iter().map(SeriesStats::variance).fold(0.0, f64::max),
            std_error: scale * dev.std_error(),
            bound: lipschitz * lipschitz * p.w.distance(snapshot).powi(2),
        });
    }
    Ok(VarianceSeries { points, resamples, lipschitz })
}

/// Across-run spread of `‖∇F(w̃_t)‖₂` at each snapshot index shared by all runs.
pub fn snapshot_gradient_spread<P: StochasticProblem>(problem: &P, records: &[RunRecord]) -> Vec<SeriesStats> {
    let n = records.iter().map(|r| r.snapshots.len()).min().unwrap_or(0);
    (0..n)
        .map(|t| {
            let mut s = SeriesStats::new();
            records.iter().for_each(|r| s.push(problem.full_gradient(&r.snapshots[t]).norm2()));
            s
        })
        .collect()
}

/// `min_{s ≤ t} ‖∇F(w̃_s)‖₂` along one run.
pub fn min_so_far_gradient_norm<P: StochasticProblem>(problem: &P, record: &RunRecord) -> Vec<f64> {
    let mut best = f64::INFINITY;
    record
        .snapshots
        .iter()
        .map(|w| {
            best = best.min(problem.full_gradient(w).norm2());
            best
        })
        .collect()
}
