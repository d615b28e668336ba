use vradam_core::optimizers::{
    run_general_adam, run_sgd, run_vradam, AdamHyper, LearningRate, ResetOption, RunOptions, RunRecord,
    VradamConfig,
};
use vradam_core::problems::{make_op_delta, StochasticProblem};
use vradam_core::{DenseVector, RandomSource, SeriesStats};

use super::{run_trials, Z_99};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrialOptimizer {
    Adam(AdamHyper),
    /// `steps` counts inner steps; the run uses `⌈steps/m⌉` outer iterations
    /// and the series are cut at `steps`.
    Vradam(VradamConfig),
    Sgd(LearningRate),
}

impl TrialOptimizer {
    pub fn label(&self) -> String {
        match self {
            TrialOptimizer::Adam(_) => "adam".into(),
            TrialOptimizer::Vradam(c) => format!("vradam-{}", c.option.label()),
            TrialOptimizer::Sgd(_) => "sgd".into(),
        }
    }
}

/// Repeated runs on the two-branch problem from a fixed start.
#[derive(Debug, Clone)]
pub struct DivergenceSpec {
    pub delta: f64,
    pub w0: f64,
    pub trials: usize,
    pub steps: usize,
    pub base_seed: u64,
    pub optimizer: TrialOptimizer,
    /// Steps excluded from the drift estimate.
    pub warmup: usize,
    /// Reachable radius `|w| ≤ r`; when set, runs assert the gradient and
    /// moment bounds it implies.
    pub reachable_radius: Option<f64>,
    /// Fail a run whose coordinate update exceeds `α/√(1-β₂)` (ADAM, `β₁ = 0`).
    pub check_step_bound: bool,
    /// Give every trial stream 0 (degenerate Monte-Carlo, for testing).
    pub shared_stream: bool,
}

impl DivergenceSpec {
    /// One thousand proof-regime ADAM trials of 10⁴ steps at `δ = 10`.
    pub fn adam_proof_regime(w0: f64) -> Self {
        DivergenceSpec {
            delta: 10.0,
            w0,
            trials: 1000,
            steps: 10_000,
            base_seed: 0,
            optimizer: TrialOptimizer::Adam(AdamHyper::proof_regime(0.001).expect("valid constants")),
            warmup: 1000,
            reachable_radius: None,
            check_step_bound: true,
            shared_stream: false,
        }
    }


    /// One thousand Option A VRADAM trials, `m = 32`, `b = 1`, 10⁴ inner
    /// steps at `δ = 10` with `α = 0.01` constant, `β₁ = 0.9`, `β₂ = 0.999`,
    /// `ε = 1e-8`.
    pub fn vradam_default(w0: f64) -> Self {
        let hyper = AdamHyper::new(LearningRate::constant(0.01).expect("valid rate"), 0.9, 0.999, 1e-8)
            .expect("valid constants");
        DivergenceSpec {
            optimizer: TrialOptimizer::Vradam(
                VradamConfig::new(hyper, 32, 1, ResetOption::A).expect("valid config"),
            ),
            check_step_bound: false,
            ..Self::adam_proof_regime(w0)
        }
    }
}

/// Mean and normal-approximation 99% interval of the per-trial mean update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub half_width: f64,
    pub trials: u64,
    /// Steps per trial inside the window.
    pub window: usize,
}

impl DriftEstimate {
    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }

    fn from_stats(stats: &SeriesStats, window: usize) -> Self {
        let std_error = stats.std_error();
        DriftEstimate { mean: stats.mean(), std_error, half_width: Z_99 * std_error, trials: stats.count(), window }
    }
}

fn window_mean(updates: &[f64], warmup: usize) -> f64 {
    let w = &updates[warmup..];
    w.iter().sum::<f64>() / w.len() as f64
}

/// Drift of signed first-coordinate updates after `warmup` steps.
///
/// Updates within one run are strongly autocorrelated, so the interval is
/// built from one mean per run, which are independent.
pub fn drift_estimate(records: &[RunRecord], warmup: usize) -> Result<DriftEstimate> {
    let steps = records.iter().map(|r| r.steps).min().ok_or_else(|| Error::config("no runs"))?;
    if warmup >= steps {
        return Err(vradam_core::Error::Argument(format!("warmup {warmup} leaves no steps of {steps}")).into());
    }
    let mut stats = SeriesStats::new();
    records.iter().for_each(|r| stats.push(window_mean(&r.update_first[..steps], warmup)));
    Ok(DriftEstimate::from_stats(&stats, steps - warmup))
}

#[derive(Debug, Clone)]
pub struct DivergenceReport {
    pub spec: DivergenceSpec,
    pub optimum: f64,
    /// `(w_t - w*)²` across trials, `t = 0..=steps`.
    pub mse: Vec<SeriesStats>,
    /// Signed update `Δ_t`, `t = 1..=steps` at index `t-1`.
    pub drift: Vec<SeriesStats>,
    /// Per-trial mean update after warmup, in trial order.
    pub trial_drift: Vec<f64>,
    /// `(trial, error)` for runs that aborted.
    pub failures: Vec<(usize, String)>,
    /// Largest `|Δ|/(α_t/√(1-β₂))` over every step of every trial.
    pub max_step_ratio: f64,
    pub max_m_norm: f64,
    pub max_v_norm: f64,
    /// `G` implied by the reachable radius, when one was declared.
    pub gradient_bound: Option<f64>,
}

impl DivergenceReport {
    pub fn mse_at(&self, t: usize) -> f64 {
        self.mse[t].mean()
    }

    pub fn final_mse(&self) -> f64 {
        self.mse.last().expect("steps >= 1").mean()
    }

    pub fn drift_estimate(&self) -> DriftEstimate {
        let mut stats = SeriesStats::new();
        self.trial_drift.iter().for_each(|&x| stats.push(x));
        DriftEstimate::from_stats(&stats, self.spec.steps - self.spec.warmup)
    }
}

struct TrialSummary {
    sq_error: Vec<f64>,
    updates: Vec<f64>,
    step_ratio: f64,
    m_max: f64,
    v_max: f64,
}

const CHUNK: usize = 64;

/// Runs the trials and aggregates per-step squared error and update.
pub fn divergence_experiment(spec: &DivergenceSpec) -> Result<DivergenceReport> {
    if spec.trials < 2 {
        return Err(Error::config("need at least two trials"));
    }
    if spec.steps == 0 || spec.warmup >= spec.steps {
        return Err(Error::config(format!("warmup {} must be below steps {}", spec.warmup, spec.steps)));
    }
    let mut problem = make_op_delta(spec.delta)?;
    if let Some(r) = spec.reachable_radius {
        problem = problem.with_reachable_radius(r);
    }
    let gradient_bound = problem.constants().gradient_bound;
    let optimum = problem.optimum();
    let w1 = DenseVector::scalar(spec.w0);
    let options = RunOptions {
        check_step_bound: spec.check_step_bound && matches!(spec.optimizer, TrialOptimizer::Adam(h) if h.beta1 == 0.0),
        state_bound: gradient_bound,
        ..Default::default()
    };
    let beta2 = match spec.optimizer {
        TrialOptimizer::Adam(h) => Some(h.beta2),
        _ => None,
    };

    let run_one = |trial: usize| -> std::result::Result<TrialSummary, String> {
        let stream = if spec.shared_stream { 0 } else { trial as u64 };
        let mut rng = RandomSource::new(spec.base_seed, stream);
        let record = match spec.optimizer {
            TrialOptimizer::Adam(h) => run_general_adam(&problem, &h, &w1, spec.steps, &mut rng, &options),
            TrialOptimizer::Sgd(lr) => run_sgd(&problem, &lr, &w1, spec.steps, &mut rng, &options),
            TrialOptimizer::Vradam(cfg) => {
                run_vradam(&problem, &cfg, &w1, spec.steps.div_ceil(cfg.inner_length), &mut rng, &options)
            }
        }
        .map_err(|e| e.to_string())?;
        let n = spec.steps;
        let mut sq_error = Vec::with_capacity(n + 1);
        sq_error.push((spec.w0 - optimum).powi(2));
        sq_error.extend(record.w_first[..n].iter().map(|w| (w - optimum).powi(2)));
        let step_ratio = match beta2 {
            Some(b2) => record.update_max_abs[..n]
                .iter()
                .zip(&record.alpha)
                .map(|(u, a)| u * (1.0 - b2).sqrt() / a)
                .fold(0.0, f64::max),
            None => 0.0,
        };
        Ok(TrialSummary {
            sq_error,
            updates: record.update_first[..n].to_vec(),
            step_ratio,
            m_max: record.max_m_norm(),
            v_max: record.max_v_norm(),
        })
    };

    let mut mse = vec![SeriesStats::new(); spec.steps + 1];
    let mut drift = vec![SeriesStats::new(); spec.steps];
    let mut trial_drift = Vec::with_capacity(spec.trials);
    let mut failures = Vec::new();
    let (mut max_step_ratio, mut max_m_norm, mut max_v_norm) = (0.0f64, 0.0f64, 0.0f64);
    for start in (0..spec.trials).step_by(CHUNK) {
        let len = CHUNK.min(spec.trials - start);
        for (i, result) in run_trials(len, |i| run_one(start + i)).into_iter().enumerate() {
            match result {
                Ok(s) => {
                    mse.iter_mut().zip(&s.sq_error).for_each(|(st, &x)| st.push(x));
                    drift.iter_mut().zip(&s.updates).for_each(|(st, &x)| st.push(x));
                    trial_drift.push(window_mean(&s.updates, spec.warmup));
                    max_step_ratio = max_step_ratio.max(s.step_ratio);
                    max_m_norm = max_m_norm.max(s.m_max);
                    max_v_norm = max_v_norm.max(s.v_max);
                }
                Err(e) => failures.push((start + i, e)),
            }
        }
    }
    Ok(DivergenceReport {
        spec: spec.clone(),
        optimum,
        mse,
        drift,
        trial_drift,
        failures,
        max_step_ratio,
        max_m_norm,
        max_v_norm,
        gradient_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record_with_updates(u: Vec<f64>) -> RunRecord {
        let mut r = RunRecord::new(&DenseVector::scalar(0.0));
        r.steps = u.len();
        r.update_first = u;
        r
    }

    #[test]
    fn zero_updates_have_zero_drift() {
        let recs = vec![record_with_updates(vec![0.0; 10]); 3];
        let d = drift_estimate(&recs, 2).unwrap();
        assert_eq!((d.mean, d.half_width), (0.0, 0.0));
    }

    #[test]
    fn symmetric_updates_straddle_zero() {
        let recs = vec![record_with_updates(vec![1.0; 10]), record_with_updates(vec![-1.0; 10])];
        let d = drift_estimate(&recs, 5).unwrap();
        assert!(d.lower() < 0.0 && d.upper() > 0.0);
    }

    #[test]
    fn empty_window_is_rejected() {
        let recs = vec![record_with_updates(vec![0.0; 10])];
        assert!(drift_estimate(&recs, 10).is_err());
    }

    #[test]
    fn shared_streams_have_zero_spread() {
        let mut spec = DivergenceSpec::adam_proof_regime(-100.0);
        spec.trials = 2;
        spec.steps = 500;
        spec.warmup = 100;
        spec.shared_stream = true;
        let r = divergence_experiment(&spec).unwrap();
        assert!(r.mse.iter().all(|s| s.variance() == 0.0));
        assert_eq!(r.drift_estimate().half_width, 0.0);
    }

    #[test]
    fn rejects_single_trial() {
        let mut spec = DivergenceSpec::adam_proof_regime(-100.0);
        spec.trials = 1;
        assert!(matches!(divergence_experiment(&spec), Err(Error::Config(_))));
    }
}
