use alloc::vec::Vec;

use crate::problems::StochasticProblem;
use crate::DenseVector;

/// Seconds since an arbitrary origin; supplied by the caller because the core
/// has no clock.
pub type Clock = fn() -> f64;

/// What a run records beyond the always-on per-step series.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Evaluate `F` and `‖∇F‖₂` every this many steps (plus before the first
    /// and after the last); 0 evaluates only at the two ends.
    pub eval_every: usize,
    /// Keep the iterate (and snapshot, for VRADAM) every this many steps; 0
    /// keeps none.
    pub record_every: usize,
    /// Fail the run if a coordinate update exceeds `α_t/√(1-β₂)`. Only
    /// meaningful for ADAM with `β₁ = 0`.
    pub check_step_bound: bool,
    /// Gradient-norm bound `G`: fail the run if an estimate exceeds `G`, or
    /// the moment estimates exceed `‖m‖₂ ≤ 3G`, `‖v‖₂ ≤ 9G²`.
    pub state_bound: Option<f64>,
    /// Stop before any step whose model cost would exceed this.
    pub cost_budget: Option<f64>,
    pub clock: Option<Clock>,
}

impl RunOptions {
    pub fn proof_checks() -> Self {
        RunOptions { check_step_bound: true, ..Default::default() }
    }
}

/// `F` and `‖∇F‖₂` at one step; not charged to the model cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub step: usize,
    pub cost: f64,
    pub wall_clock: f64,
    pub loss: f64,
    pub grad_norm: f64,
}

/// An iterate kept for replay; `w` is the point the step's gradient was
/// evaluated at.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordedPoint {
    pub step: usize,
    pub outer: usize,
    pub inner: usize,
    pub w: DenseVector,
    pub snapshot: Option<DenseVector>,
}

/// Telemetry of one run. Every per-step series has exactly `steps` entries;
/// entry `s - 1` describes step `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub steps: usize,
    pub alpha: Vec<f64>,
    /// `‖g‖₂` of the direction fed to the optimizer.
    pub direction_norm: Vec<f64>,
    pub update_norm: Vec<f64>,
    pub update_max_abs: Vec<f64>,
    /// First coordinate of the update, signed.
    pub update_first: Vec<f64>,
    /// First coordinate of the iterate after the step.
    pub w_first: Vec<f64>,
    pub m_norm: Vec<f64>,
    pub v_norm: Vec<f64>,
    /// Cumulative model cost after the step.
    pub cost: Vec<f64>,
    /// Cumulative seconds after the step; empty without a clock.
    pub wall_clock: Vec<f64>,
    pub evals: Vec<Evaluation>,
    pub points: Vec<RecordedPoint>,
    /// `w̃₁, w̃₂, …` for VRADAM (including the final one); empty otherwise.
    pub snapshots: Vec<DenseVector>,
    /// `‖m‖₂`, `‖v‖₂` at each outer-loop start, after any reset.
    pub outer_start_m_norm: Vec<f64>,
    pub outer_start_v_norm: Vec<f64>,
    pub full_gradient_evals: usize,
    pub final_iterate: DenseVector,
    pub w_start: DenseVector,
}

impl RunRecord {
    /// A record of zero steps starting (and ending) at `w`.
    pub fn new(w: &DenseVector) -> Self {
        RunRecord {
            steps: 0,
            alpha: Vec::new(),
            direction_norm: Vec::new(),
            update_norm: Vec::new(),
            update_max_abs: Vec::new(),
            update_first: Vec::new(),
            w_first: Vec::new(),
            m_norm: Vec::new(),
            v_norm: Vec::new(),
            cost: Vec::new(),
            wall_clock: Vec::new(),
            evals: Vec::new(),
            points: Vec::new(),
            snapshots: Vec::new(),
            outer_start_m_norm: Vec::new(),
            outer_start_v_norm: Vec::new(),
            full_gradient_evals: 0,
            final_iterate: w.clone(),
            w_start: w.clone(),
        }
    }

    pub fn total_cost(&self) -> f64 {
        self.cost.last().copied().unwrap_or(0.0)
    }

    pub fn final_eval(&self) -> Option<&Evaluation> {
        self.evals.last()
    }

    pub fn max_m_norm(&self) -> f64 {
        self.m_norm.iter().chain(&self.outer_start_m_norm).copied().fold(0.0, f64::max)
    }

    pub fn max_v_norm(&self) -> f64 {
        self.v_norm.iter().chain(&self.outer_start_v_norm).copied().fold(0.0, f64::max)
    }
}

pub(crate) struct Recorder<'a> {
    pub options: &'a RunOptions,
    pub record: RunRecord,
    origin: f64,
    last_eval_step: Option<usize>,
    grad: DenseVector,
}

impl<'a> Recorder<'a> {
    pub fn new(options: &'a RunOptions, w: &DenseVector) -> Self {
        let origin = options.clock.map_or(0.0, |c| c());
        Recorder { options, record: RunRecord::new(w), origin, last_eval_step: None, grad: DenseVector::zeros(w.len()) }
    }

    pub fn elapsed(&self) -> f64 {
        self.options.clock.map_or(0.0, |c| c() - self.origin)
    }

    pub fn cost(&self) -> f64 {
        self.record.total_cost()
    }

    /// Whether a step costing `step_cost` fits the budget given cost so far
    /// `spent`.
    pub fn affordable(&self, spent: f64, step_cost: f64) -> bool {
        self.options.cost_budget.map_or(true, |b| spent + step_cost <= b)
    }

    pub fn evaluate<P: StochasticProblem>(&mut self, problem: &P, w: &DenseVector, step: usize, cost: f64) {
        if self.last_eval_step == Some(step) {
            return;
        }
        self.last_eval_step = Some(step);
        problem.full_gradient_into(w, &mut self.grad);
        let wall_clock = self.elapsed();
        self.record.evals.push(Evaluation {
            step,
            cost,
            wall_clock,
            loss: problem.loss(w),
            grad_norm: self.grad.norm2(),
        });
    }

    pub fn wants_eval(&self, step: usize) -> bool {
        self.options.eval_every > 0 && step % self.options.eval_every == 0
    }

    pub fn wants_point(&self, step: usize) -> bool {
        self.options.record_every > 0 && step % self.options.record_every == 0
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push_step(
        &mut self,
        alpha: f64,
        g: &DenseVector,
        update: &DenseVector,
        w: &DenseVector,
        m: &DenseVector,
        v: &DenseVector,
        cost: f64,
    ) {
        let r = &mut self.record;
        r.steps += 1;
        r.alpha.push(alpha);
        r.direction_norm.push(g.norm2());
        r.update_norm.push(update.norm2());
        r.update_max_abs.push(update.norm_inf());
        r.update_first.push(update[0]);
        r.w_first.push(w[0]);
        r.m_norm.push(m.norm2());
        r.v_norm.push(v.norm2());
        r.cost.push(cost);
        if self.options.clock.is_some() {
            let t = self.elapsed();
            self.record.wall_clock.push(t);
        }
    }

    pub fn finish(mut self, w: &DenseVector) -> RunRecord {
        self.record.final_iterate = w.clone();
        self.record
    }
}
