//! The oracle and invariant battery behind `vradam verify`.
//!
//! Each check has a negative control: the same machinery pointed at an
//! instance built to violate it. A control "passes" when its check fails.

use std::fmt::Write;

use vradam_core::optimizers::{
    run_general_adam, run_vradam_finite_sum, AdamHyper, LearningRate, ResetOption, RunOptions, RunRecord,
    VradamConfig,
};
use vradam_core::problems::{
    make_logistic, make_mlp, make_op_delta, make_quadratic, make_thm2_problem, make_thm3_problem, FiniteSum,
    Minibatch, ProblemConstants, QuadraticSpec, ScalarQuadraticSum, StochasticProblem,
};
use vradam_core::verify::{audit_gradients, check_construction_equivalence, check_unbiasedness, sweep_state_bounds, OracleReport};
use vradam_core::{DenseVector, RandomSource};

use crate::data::bundled_covtype;
use crate::experiments::{
    rate_check, reset_comparison, variance_track, RateSpec, ResetSpec, VarianceSeries,
};
use crate::{Error, Result};

pub const CHECKS: [&str; 9] = [
    "unbiasedness",
    "construction-equivalence",
    "gradient-audit",
    "state-bounds",
    "step-bound",
    "variance",
    "rate",
    "reset",
    "determinism",
];

pub const UNBIASEDNESS_TOL: f64 = 1e-12;
pub const EQUIVALENCE_TOL: f64 = 1e-10;
const AUDIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub control: bool,
    /// For a control: the underlying check failed, as designed.
    pub passed: bool,
    pub reports: Vec<OracleReport>,
}

impl CheckOutcome {
    fn new(name: &'static str, control: bool, reports: Vec<OracleReport>) -> Self {
        let all = reports.iter().all(|r| r.passed);
        CheckOutcome { name, control, passed: if control { !all } else { all }, reports }
    }
}

/// A named finite sum and the batch sizes its oracle enumerates.
pub type BundledSum = (String, Box<dyn FiniteSum + Sync>, Vec<usize>);

/// Every bundled finite sum with at most twelve components, with the batch
/// sizes its oracle enumerates.
pub fn bundled_finite_sums() -> Result<Vec<BundledSum>> {
    let mut out: Vec<BundledSum> = Vec::new();
    for n in 2..=12 {
        for b in 1..n {
            if let Ok(c) = make_thm2_problem(n, b) {
                out.push((format!("thm2 N={n} b={b}"), Box::new(c.sum), (1..=n).collect()));
            }
        }
    }
    for n in 5..=12 {
        out.push((format!("thm3 N={n}"), Box::new(make_thm3_problem(n)?.sum), (1..=n).collect()));
    }
    let reset = ResetSpec::satisfiable();
    out.push(("reset construction".into(), Box::new(reset.problem()?), (1..=8).collect()));
    out.push(("clipped quadratic".into(), Box::new(make_quadratic(QuadraticSpec::new(0.5, 1.0, 3, 0.5, 10.0))?), (1..=8).collect()));
    let rows = bundled_covtype().subset(&(0..12).collect::<Vec<_>>())?;
    out.push(("logistic 12 rows".into(), Box::new(make_logistic(rows.clone(), 0.0)?), vec![1, 2, 6, 12]));
    out.push(("logistic 12 rows l2=0.1".into(), Box::new(make_logistic(rows.clone(), 0.1)?), vec![3]));
    out.push(("mlp 12 rows".into(), Box::new(make_mlp(rows, 4)?), vec![1, 5, 12]));
    Ok(out)
}

/// Reports the full gradient as the mean over all but the last component,
/// so batch enumeration disagrees with it.
struct DroppedComponent<F>(F);

impl<F: FiniteSum> FiniteSum for DroppedComponent<F> {
    fn num_components(&self) -> usize {
        self.0.num_components()
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn component_loss(&self, n: usize, w: &DenseVector) -> f64 {
        self.0.component_loss(n, w)
    }
    fn add_component_gradient(&self, n: usize, w: &DenseVector, scale: f64, out: &mut [f64]) {
        self.0.add_component_gradient(n, w, scale, out)
    }
    fn constants(&self) -> ProblemConstants {
        self.0.constants()
    }
    fn full_gradient_sum_into(&self, w: &DenseVector, out: &mut DenseVector) {
        let kept: Vec<usize> = (0..self.num_components() - 1).collect();
        self.0.batch_gradient_into(&kept, w, out);
    }
}

/// Gradients one percent too long.
struct InflatedGradient<F>(F);

impl<F: FiniteSum> FiniteSum for InflatedGradient<F> {
    fn num_components(&self) -> usize {
        self.0.num_components()
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn component_loss(&self, n: usize, w: &DenseVector) -> f64 {
        self.0.component_loss(n, w)
    }
    fn add_component_gradient(&self, n: usize, w: &DenseVector, scale: f64, out: &mut [f64]) {
        self.0.add_component_gradient(n, w, 1.01 * scale, out)
    }
    fn constants(&self) -> ProblemConstants {
        self.0.constants()
    }
}

fn unbiasedness(control: bool, seed: u64) -> Result<Vec<OracleReport>> {
    let mut rng = RandomSource::new(seed, 1);
    let mut reports = Vec::new();
    if control {
        let s = ScalarQuadraticSum::new(vec![1.0, 2.0, 0.5, 1.5], vec![1.0, -1.0, 0.5, 2.0])?;
        let r = check_unbiasedness(&DroppedComponent(s), 2, 50, 10.0, &mut rng, UNBIASEDNESS_TOL)?;
        reports.push(r.with_detail("problem", "full gradient omits a component"));
        return Ok(reports);
    }
    for (name, p, bs) in bundled_finite_sums()? {
        for b in bs {
            let r = check_unbiasedness(&p.as_ref(), b, 50, 3.0, &mut rng, UNBIASEDNESS_TOL)?;
            reports.push(r.with_detail("problem", &name));
        }
    }
    Ok(reports)
}

fn construction_equivalence(control: bool, seed: u64) -> Result<Vec<OracleReport>> {
    let mut rng = RandomSource::new(seed, 2);
    let mut reports = Vec::new();
    let scale = if control { 1.0 + 1e-3 } else { 1.0 };
    for n in 2..=12 {
        for b in 1..n {
            if let Ok(c) = make_thm2_problem(n, b) {
                reports.push(check_construction_equivalence(&c.sum, b, c.delta * scale, &mut rng, EQUIVALENCE_TOL)?);
            }
        }
    }
    for n in 5..=12 {
        let c = make_thm3_problem(n)?;
        reports.push(check_construction_equivalence(&c.sum, n - 1, c.delta * scale, &mut rng, EQUIVALENCE_TOL)?);
    }
    Ok(reports)
}

fn gradient_audit(control: bool, seed: u64) -> Result<Vec<OracleReport>> {
    let mut rng = RandomSource::new(seed, 3);
    let rows = bundled_covtype().subset(&(0..40).collect::<Vec<_>>())?;
    let logistic = make_logistic(rows.clone(), 0.05)?;
    let mlp = make_mlp(rows, 6)?;
    let quad = make_quadratic(QuadraticSpec::new(0.5, 1.0, 4, 0.5, 10.0))?;
    let mut reports = Vec::new();
    if control {
        let p = Minibatch::new(InflatedGradient(logistic), 8)?;
        let r = audit_gradients(&p, &DenseVector::zeros(p.dim()), 0.5, 5, 1e-5, &mut rng, AUDIT_TOL)?;
        reports.push(r.with_detail("problem", "logistic with inflated gradient"));
        return Ok(reports);
    }
    let p = Minibatch::new(&logistic, 8)?;
    reports.push(audit_gradients(&p, &DenseVector::zeros(p.dim()), 0.5, 5, 1e-5, &mut rng, AUDIT_TOL)?.with_detail("problem", "logistic"));
    let p = Minibatch::new(&mlp, 8)?;
    let center = mlp.init_params(&mut rng);
    reports.push(audit_gradients(&p, &center, 0.1, 5, 1e-5, &mut rng, AUDIT_TOL)?.with_detail("problem", "mlp"));
    let p = Minibatch::new(&quad, 2)?;
    reports.push(audit_gradients(&p, &DenseVector::zeros(4), 0.5, 5, 1e-5, &mut rng, AUDIT_TOL)?.with_detail("problem", "clipped quadratic"));
    let op = make_op_delta(10.0)?;
    reports.push(audit_gradients(&op, &DenseVector::scalar(-50.0), 40.0, 5, 1e-4, &mut rng, AUDIT_TOL)?.with_detail("problem", "OP(10)"));
    Ok(reports)
}

/// Option A runs on every problem that declares `G`, swept against it.
pub fn state_bound_runs(seed: u64) -> Result<Vec<(String, RunRecord, f64)>> {
    let mut out = Vec::new();
    let hyper = |alpha: f64| AdamHyper::new(LearningRate::constant(alpha)?, 0.9, 0.999, 1e-8);
    let quad = make_quadratic(QuadraticSpec::new(0.5, 1.0, 5, 1.0, 10.0))?;
    let cfg = VradamConfig::new(hyper(0.5)?, 20, 2, ResetOption::A)?;
    let g = quad.constants().gradient_bound.expect("declared");
    let opts = RunOptions { state_bound: Some(g), ..Default::default() };
    let rec = run_vradam_finite_sum(&quad, &cfg, &DenseVector::filled(5, 3.0), 20, &mut RandomSource::new(seed, 4), &opts)?;
    out.push(("clipped quadratic".to_string(), rec, g));

    let rows = bundled_covtype().subset(&(0..200).collect::<Vec<_>>())?;
    let logistic = make_logistic(rows, 0.0)?;
    let g = logistic.constants().gradient_bound.expect("declared for l2 = 0");
    let cfg = VradamConfig::new(hyper(0.01)?, 12, 16, ResetOption::A)?;
    let opts = RunOptions { state_bound: Some(g), ..Default::default() };
    let rec = run_vradam_finite_sum(&logistic, &cfg, &DenseVector::zeros(logistic.dim()), 10, &mut RandomSource::new(seed, 5), &opts)?;
    out.push(("logistic 200 rows".to_string(), rec, g));

    let op = make_op_delta(10.0)?.with_reachable_radius(1000.0);
    let g = StochasticProblem::constants(&op).gradient_bound.expect("declared with a radius");
    let cfg = VradamConfig::new(hyper(0.01)?, 32, 1, ResetOption::A)?;
    let opts = RunOptions { state_bound: Some(g), ..Default::default() };
    let rec = vradam_core::optimizers::run_vradam(&op, &cfg, &DenseVector::scalar(-80.0), 100, &mut RandomSource::new(seed, 6), &opts)?;
    out.push(("OP(10)".to_string(), rec, g));
    Ok(out)
}

fn state_bounds(control: bool, seed: u64) -> Result<Vec<OracleReport>> {
    let scale = if control { 0.01 } else { 1.0 };
    state_bound_runs(seed)?
        .into_iter()
        .map(|(name, rec, g)| Ok(sweep_state_bounds(&rec, g * scale)?.with_detail("problem", name)))
        .collect()
}

/// Largest `|Δᵢ|·√(1-β₂)/α_t` of a proof-regime ADAM record.
pub fn step_ratio(record: &RunRecord, beta2: f64) -> f64 {
    record.update_max_abs.iter().zip(&record.alpha).map(|(u, a)| u * (1.0 - beta2).sqrt() / a).fold(0.0, f64::max)
}

fn step_bound(control: bool, seed: u64) -> Result<Vec<OracleReport>> {
    let op = make_op_delta(10.0)?;
    let hyper = AdamHyper::proof_regime(0.001)?;
    let mut worst = 0.0f64;
    for trial in 0..16 {
        let mut rng = RandomSource::new(seed, 100 + trial);
        let rec = run_general_adam(&op, &hyper, &DenseVector::scalar(-100.0), 5000, &mut rng, &RunOptions::default())?;
        worst = worst.max(step_ratio(&rec, hyper.beta2));
    }
    // The control claims the update never exceeds α_t itself.
    let observed = if control { worst / (1.0 - hyper.beta2).sqrt() } else { worst };
    Ok(vec![OracleReport::new("step-bound", "OP(10) proof-regime ADAM, 16 trials", observed, 1.0)])
}

/// VRADAM Option A on 500 bundled rows, `resamples` batches redrawn at every
/// fifth step.
pub fn variance_run(seed: u64, resamples: usize) -> Result<(RunRecord, VarianceSeries)> {
    let rows = bundled_covtype().subset(&(0..500).collect::<Vec<_>>())?;
    let p = make_logistic(rows, 0.0)?;
    let hyper = AdamHyper::new(LearningRate::constant(0.01)?, 0.9, 0.999, 1e-8)?;
    let cfg = VradamConfig::new(hyper, 20, 16, ResetOption::A)?;
    let opts = RunOptions { record_every: 5, ..Default::default() };
    let rec = run_vradam_finite_sum(&p, &cfg, &DenseVector::zeros(p.dim()), 4, &mut RandomSource::new(seed, 7), &opts)?;
    let series = variance_track(&p, 16, &rec, resamples, &mut RandomSource::new(seed, 8))?;
    Ok((rec, series))
}

fn variance(control: bool, seed: u64) -> Result<Vec<OracleReport>> {
    let (_, series) = variance_run(seed, 200)?;
    // The control asserts the corrected direction has no variance at all.
    let excess = series
        .points
        .iter()
        .map(|p| p.lambda_hat - if control { 0.0 } else { p.bound } - 3.0 * p.std_error)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![OracleReport::new("variance", "logistic 500 rows, b=16, m=20", excess, 0.0)
        .with_detail("points", series.points.len())
        .with_detail("resamples", series.resamples)])
}

fn rate(control: bool) -> Result<Vec<OracleReport>> {
    let mut spec = RateSpec::desk_default();
    if control {
        spec.cfg.hyper.lr.base *= 3.0;
        return Ok(vec![match rate_check(&spec) {
            Err(Error::Config(msg)) => OracleReport::new("rate", "C2*m*alpha = 1.5", 1.0, 0.0).with_detail("refused", msg),
            Err(e) => return Err(e),
            Ok(_) => OracleReport::new("rate", "C2*m*alpha = 1.5", 0.0, 0.0).with_detail("refused", false),
        }]);
    }
    let r = rate_check(&spec)?;
    let decay = r.gap(200) < r.gap(20);
    let violation = if decay { r.worst_ratio - 1.0 } else { f64::INFINITY };
    Ok(vec![OracleReport::new("rate", "clipped quadratic c=0.5 L=1 d=5 G=10", violation, 0.0)
        .with_detail("exponent", r.exponent)
        .with_detail("fitted_slope", r.fitted_slope)
        .with_detail("gap_20", r.gap(20))
        .with_detail("gap_200", r.gap(200))])
}

fn reset(control: bool) -> Result<Vec<OracleReport>> {
    let spec = ResetSpec::satisfiable();
    let mut worst = f64::NEG_INFINITY;
    let mut asserted = 0;
    for seed in 0..100 {
        let o = reset_comparison(&spec, seed)?;
        if o.asserted {
            asserted += 1;
            // The control checks the reverse inequality.
            let v = if control { o.f_b - o.f_a } else { o.f_a - o.f_b };
            worst = worst.max(v);
        }
    }
    if asserted == 0 {
        worst = f64::INFINITY;
    }
    Ok(vec![OracleReport::new("reset", "1-D construction, 100 seeds", worst, 1e-12).with_detail("asserted", asserted)])
}

fn determinism(control: bool, seed: u64) -> Result<Vec<OracleReport>> {
    let quad = make_quadratic(QuadraticSpec::new(0.5, 1.0, 5, 1.0, 10.0))?;
    let cfg = VradamConfig::new(AdamHyper::new(LearningRate::constant(0.5)?, 0.9, 0.999, 1e-8)?, 20, 2, ResetOption::B)?;
    let run = |s| run_vradam_finite_sum(&quad, &cfg, &DenseVector::filled(5, 3.0), 10, &mut RandomSource::new(s, 0), &RunOptions::default());
    let a = run(seed)?;
    let b = run(if control { seed + 1 } else { seed })?;
    let different = a.w_first.iter().zip(&b.w_first).filter(|(x, y)| x.to_bits() != y.to_bits()).count();
    Ok(vec![OracleReport::new("determinism", "two identical VRADAM runs", different as f64, 0.0)])
}

/// Runs `only` (all when empty), checks or their controls.
pub fn run_battery(only: &[String], control: bool, seed: u64) -> Result<Vec<CheckOutcome>> {
    for name in only {
        if !CHECKS.contains(&name.as_str()) {
            return Err(Error::config(format!("unknown check {name:?}; known: {}", CHECKS.join(", "))));
        }
    }
    let mut out = Vec::new();
    for name in CHECKS {
        if !only.is_empty() && !only.iter().any(|o| o == name) {
            continue;
        }
        let reports = match name {
            "unbiasedness" => unbiasedness(control, seed)?,
            "construction-equivalence" => construction_equivalence(control, seed)?,
            "gradient-audit" => gradient_audit(control, seed)?,
            "state-bounds" => state_bounds(control, seed)?,
            "step-bound" => step_bound(control, seed)?,
            "variance" => variance(control, seed)?,
            "rate" => rate(control)?,
            "reset" => reset(control)?,
            "determinism" => determinism(control, seed)?,
            _ => unreachable!("names come from CHECKS"),
        };
        out.push(CheckOutcome::new(name, control, reports));
    }
    Ok(out)
}

/// Summary lines followed by every report that failed (or, for controls,
/// passed unexpectedly), then the full set.
pub fn render_report(outcomes: &[CheckOutcome]) -> String {
    let mut s = String::new();
    for o in outcomes {
        let verdict = match (o.control, o.passed) {
            (false, true) => "PASS",
            (false, false) => "FAIL",
            (true, true) => "CONTROL FAILED AS DESIGNED",
            (true, false) => "CONTROL PASSED UNEXPECTEDLY",
        };
        let _ = writeln!(s, "{verdict} {} ({} instance(s))", o.name, o.reports.len());
    }
    for o in outcomes {
        let _ = writeln!(s);
        for r in &o.reports {
            let _ = write!(s, "{r}");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_filter_is_a_config_error() {
        assert!(matches!(run_battery(&["nope".into()], false, 0), Err(Error::Config(_))));
    }

    #[test]
    fn fast_checks_pass_and_their_controls_fail() {
        let only = vec!["determinism".to_string(), "rate".to_string(), "reset".to_string()];
        for control in [false, true] {
            let out = run_battery(&only, control, 0).unwrap();
            assert_eq!(out.len(), 3);
            assert!(out.iter().all(|o| o.passed), "{}", render_report(&out));
        }
    }
}
