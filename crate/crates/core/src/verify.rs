//! Problem-level oracles that do not depend on any optimizer code.
//!
//! Each check returns an [`OracleReport`]; `passed` is exactly
//! `max_violation <= tolerance`, so a report can never claim success it did
//! not measure.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::numerics::{finite_difference_gradient, unit_floor_relative_error, NeumaierSum};
use crate::optimizers::RunRecord;
use crate::problems::{binomial, for_each_batch, ratio_of_delta, FiniteSum, StochasticProblem};
use crate::{DenseVector, Error, RandomSource, Result};

/// Largest number of batches an enumeration oracle visits.
pub const ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub check: String,
    pub instance: String,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Extra observations, in insertion order.
    pub details: Vec<(String, String)>,
}

impl OracleReport {
    pub fn new(check: &str, instance: impl Into<String>, max_violation: f64, tolerance: f64) -> Self {
        OracleReport {
            check: check.to_string(),
            instance: instance.into(),
            max_violation,
            tolerance,
            // NaN violations fail.
            passed: max_violation <= tolerance,
            details: Vec::new(),
        }
    }

    pub fn with_detail(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.details.push((key.to_string(), format!("{value}")));
        self
    }

    pub fn detail(&self, key: &str) -> Option<&str> {
        self.details.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Key-value block, one `key = value` per line under a `[check]` header.
impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}]", self.check)?;
        writeln!(f, "instance = {:?}", self.instance)?;
        writeln!(f, "max_violation = {:e}", self.max_violation)?;
        writeln!(f, "tolerance = {:e}", self.tolerance)?;
        writeln!(f, "pass = {}", self.passed)?;
        for (k, v) in &self.details {
            writeln!(f, "{k} = {v:?}")?;
        }
        Ok(())
    }
}

fn ensure_enumerable(n: usize, b: usize) -> Result<u128> {
    if b == 0 || b > n {
        return Err(Error::argument(format!("batch size {b} outside 1..={n}")));
    }
    let count = binomial(n, b);
    if count > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge { count, cap: ENUMERATION_CAP });
    }
    Ok(count)
}

/// Exact mean of `∇F^B(w)` over every batch of size `b`.
pub fn enumerate_batches_expectation<F: FiniteSum>(problem: &F, w: &DenseVector, b: usize) -> Result<DenseVector> {
    w.check_len(problem.dim())?;
    let count = ensure_enumerable(problem.num_components(), b)?;
    let mut sums = vec![NeumaierSum::default(); problem.dim()];
    let mut g = DenseVector::zeros(problem.dim());
    for_each_batch(problem.num_components(), b, |batch| {
        problem.batch_gradient_into(batch, w, &mut g);
        sums.iter_mut().zip(g.as_slice()).for_each(|(s, &x)| s.add(x));
    });
    DenseVector::new(sums.iter().map(|s| s.value() / count as f64).collect())
}

/// Enumeration mean against the full gradient at `points` random `w` with
/// entries in `[-radius, radius]`.
pub fn check_unbiasedness<F: FiniteSum>(
    problem: &F,
    b: usize,
    points: usize,
    radius: f64,
    rng: &mut RandomSource,
    tolerance: f64,
) -> Result<OracleReport> {
    let mut worst = 0.0f64;
    let mut full = DenseVector::zeros(problem.dim());
    for _ in 0..points {
        let w = DenseVector::new((0..problem.dim()).map(|_| rng.uniform(-radius, radius)).collect())?;
        let mean = enumerate_batches_expectation(problem, &w, b)?;
        problem.full_gradient_sum_into(&w, &mut full);
        for (x, y) in mean.as_slice().iter().zip(full.as_slice()) {
            worst = worst.max(unit_floor_relative_error(*x, *y));
        }
    }
    let instance = format!("N={} b={} d={}", problem.num_components(), b, problem.dim());
    Ok(OracleReport::new("unbiasedness", instance, worst, tolerance).with_detail("points", points))
}

/// Sample points for the equivalence check: `|w| ≤ 10³`.
const EQUIVALENCE_RADIUS: f64 = 1e3;

/// Checks that every size-`b` minibatch loss of a one-dimensional finite sum
/// equals one of the two branch losses at `δ_expected`, and that the rare
/// branch is drawn with probability `π(δ_expected)`.
pub fn check_construction_equivalence<F: FiniteSum>(
    problem: &F,
    b: usize,
    delta_expected: f64,
    rng: &mut RandomSource,
    tolerance: f64,
) -> Result<OracleReport> {
    if problem.dim() != 1 {
        return Err(Error::Dimension { expected: 1, found: problem.dim() });
    }
    ensure_enumerable(problem.num_components(), b)?;
    let d = delta_expected;
    let d4 = libm::pow(d, 4.0);
    let ws: Vec<DenseVector> =
        (0..100).map(|_| DenseVector::scalar(rng.uniform(-EQUIVALENCE_RADIUS, EQUIVALENCE_RADIUS))).collect();
    let rare = |w: f64| w * w / (2.0 * d) + d4 * w;
    let common = |w: f64| w * w / (2.0 * d) - w;

    let (mut n_rare, mut total) = (0u64, 0u64);
    let mut worst = 0.0f64;
    let mut worst_batch: Vec<usize> = Vec::new();
    for_each_batch(problem.num_components(), b, |batch| {
        total += 1;
        let (mut e_rare, mut e_common) = (0.0f64, 0.0f64);
        for w in &ws {
            let f = problem.batch_loss(batch, w);
            e_rare = e_rare.max(unit_floor_relative_error(f, rare(w[0])));
            e_common = e_common.max(unit_floor_relative_error(f, common(w[0])));
        }
        let err = if e_rare < e_common {
            n_rare += 1;
            e_rare
        } else {
            e_common
        };
        if err > worst {
            worst = err;
            worst_batch = batch.to_vec();
        }
    });

    let frequency = n_rare as f64 / total as f64;
    let expected = ratio_of_delta(d);
    let freq_error = (frequency - expected).abs();
    let instance = format!("N={} b={} delta={d}", problem.num_components(), b);
    let mut report = OracleReport::new("construction-equivalence", instance, worst.max(freq_error), tolerance)
        .with_detail("batches", total)
        .with_detail("rare_frequency", frequency)
        .with_detail("common_frequency", 1.0 - frequency)
        .with_detail("expected_rare_frequency", expected)
        .with_detail("max_loss_error", worst);
    if worst > tolerance {
        report = report.with_detail("offending_batch", format!("{:?}", one_based(&worst_batch)));
    }
    Ok(report)
}

fn one_based(batch: &[usize]) -> Vec<usize> {
    batch.iter().map(|i| i + 1).collect()
}

/// Max over the run of `‖m‖₂/3G` and `‖v‖₂/9G²`; passes iff both are ≤ 1.
pub fn sweep_state_bounds(record: &RunRecord, g_bound: f64) -> Result<OracleReport> {
    if !(g_bound > 0.0) {
        return Err(Error::argument("gradient bound must be positive"));
    }
    if record.m_norm.len() != record.steps || record.v_norm.len() != record.steps {
        return Err(Error::argument("record series do not match its step count"));
    }
    let m_ratio = record.max_m_norm() / (3.0 * g_bound);
    let v_ratio = record.max_v_norm() / (9.0 * g_bound * g_bound);
    Ok(OracleReport::new("state-bounds", format!("steps={} G={g_bound}", record.steps), m_ratio.max(v_ratio), 1.0)
        .with_detail("m_ratio", m_ratio)
        .with_detail("v_ratio", v_ratio))
}

/// Max of `‖∇F - ∇_h F‖₂ / max(1, ‖∇F‖₂)` over `points` random `w` with
/// entries uniform in `center ± radius`.
pub fn audit_gradients<P: StochasticProblem>(
    problem: &P,
    center: &DenseVector,
    radius: f64,
    points: usize,
    h: f64,
    rng: &mut RandomSource,
    tolerance: f64,
) -> Result<OracleReport> {
    if points == 0 {
        return Err(Error::argument("need at least one audit point"));
    }
    center.check_len(problem.dim())?;
    let mut worst = 0.0f64;
    for _ in 0..points {
        let w = DenseVector::new(center.as_slice().iter().map(|c| c + rng.uniform(-radius, radius)).collect())?;
        let fd = finite_difference_gradient(|x| problem.loss(x), &w, h)?;
        let g = problem.full_gradient(&w);
        worst = worst.max(g.distance(&fd) / g.norm2().max(1.0));
    }
    Ok(OracleReport::new("gradient-audit", format!("d={} points={points} h={h}", problem.dim()), worst, tolerance))
}
