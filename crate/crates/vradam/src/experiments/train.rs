use rayon::prelude::*;

use vradam_core::optimizers::{
    run_general_adam, run_vradam, AdamHyper, Clock, LearningRate, ResetOption, RunOptions, RunRecord, Schedule,
    VradamConfig,
};
use vradam_core::problems::{FiniteSum, Minibatch};
use vradam_core::{DenseVector, RandomSource};

use crate::Result;

/// Initial step sizes searched for every schedule.
pub const ALPHA_GRID: [f64; 5] = [0.0005, 0.001, 0.005, 0.01, 0.05];
/// Decay factors searched for the exponential schedule.
pub const GAMMA_GRID: [f64; 3] = [0.6, 0.8, 0.95];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrainMethod {
    /// Bias-corrected ADAM; the schedule ticks once per epoch.
    Adam,
    /// The schedule ticks once per outer iteration.
    Vradam { option: ResetOption, inner_length: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub method: TrainMethod,
    pub schedule: Schedule,
    pub alpha0: f64,
}

impl GridCell {
    pub fn method_label(&self) -> String {
        match self.method {
            TrainMethod::Adam => "adam".into(),
            TrainMethod::Vradam { option, .. } => format!("vradam-{}", option.label()),
        }
    }

    /// A file-name-safe identifier unique within a grid.
    pub fn label(&self) -> String {
        let sched = match self.schedule {
            Schedule::Constant => "const".to_string(),
            Schedule::InverseTime => "invt".to_string(),
            Schedule::Exponential { gamma } => format!("exp{gamma}"),
        };
        let m = match self.method {
            TrainMethod::Adam => String::new(),
            TrainMethod::Vradam { inner_length, .. } => format!("_m{inner_length}"),
        };
        format!("{}_{sched}_a{}{m}", self.method_label(), self.alpha0)
    }

    /// Same schedule and step size, method ignored.
    pub fn same_schedule(&self, other: &GridCell) -> bool {
        self.schedule == other.schedule && self.alpha0 == other.alpha0
    }
}

pub fn grid_cells(methods: &[TrainMethod], alphas: &[f64], gammas: &[f64]) -> Vec<GridCell> {
    let mut schedules = vec![Schedule::Constant, Schedule::InverseTime];
    schedules.extend(gammas.iter().map(|&gamma| Schedule::Exponential { gamma }));
    let mut cells = Vec::new();
    for &method in methods {
        for &schedule in &schedules {
            for &alpha0 in alphas {
                cells.push(GridCell { method, schedule, alpha0 });
            }
        }
    }
    cells
}

#[derive(Debug, Clone)]
pub struct TrainSpec {
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Model-cost budget in epochs (one epoch = N/b units).
    pub budget_epochs: f64,
    pub seed: u64,
    pub evals_per_epoch: usize,
    pub clock: Option<Clock>,
}

impl Default for TrainSpec {
    fn default() -> Self {
        TrainSpec {
            batch_size: 64,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            budget_epochs: 20.0,
            seed: 0,
            evals_per_epoch: 4,
            clock: None,
        }
    }
}

impl TrainSpec {
    pub fn epoch_units(&self, n: usize) -> f64 {
        n as f64 / self.batch_size as f64
    }

    pub fn budget_units(&self, n: usize) -> f64 {
        self.budget_epochs * self.epoch_units(n)
    }
}

#[derive(Debug, Clone)]
pub struct TrainRun {
    pub cell: GridCell,
    pub record: RunRecord,
    pub final_loss: f64,
}

pub fn train_cell<F: FiniteSum>(problem: &F, spec: &TrainSpec, cell: &GridCell, w0: &DenseVector) -> Result<TrainRun> {
    let n = problem.num_components();
    let mb = Minibatch::new(problem, spec.batch_size)?;
    let budget = spec.budget_units(n);
    let steps_per_epoch = (spec.epoch_units(n).round() as usize).max(1);
    let options = RunOptions {
        eval_every: (steps_per_epoch / spec.evals_per_epoch.max(1)).max(1),
        cost_budget: Some(budget),
        clock: spec.clock,
        ..Default::default()
    };
    let lr = LearningRate::new(cell.alpha0, cell.schedule)?;
    let mut rng = RandomSource::new(spec.seed, 0);
    let record = match cell.method {
        TrainMethod::Adam => {
            let hyper = AdamHyper::new(lr.with_period(steps_per_epoch)?, spec.beta1, spec.beta2, spec.eps)?
                .with_bias_correction(true);
            run_general_adam(&mb, &hyper, w0, budget.ceil() as usize + 1, &mut rng, &options)?
        }
        TrainMethod::Vradam { option, inner_length } => {
            let hyper = AdamHyper::new(lr, spec.beta1, spec.beta2, spec.eps)?;
            let cfg = VradamConfig::new(hyper, inner_length, spec.batch_size, option)?;
            // The budget ends the run well before this many outer iterations.
            let outer = (budget / (spec.epoch_units(n) + 2.0 * inner_length as f64)).ceil() as usize + 1;
            run_vradam(&mb, &cfg, w0, outer, &mut rng, &options)?
        }
    };
    let final_loss = record.final_eval().expect("runs always evaluate at the end").loss;
    Ok(TrainRun { cell: *cell, record, final_loss })
}

/// Every cell from the same start and seed, in parallel, in cell order.
pub fn train_grid<F: FiniteSum + Sync>(
    problem: &F,
    spec: &TrainSpec,
    cells: &[GridCell],
    w0: &DenseVector,
) -> Result<Vec<TrainRun>> {
    cells.par_iter().map(|c| train_cell(problem, spec, c, w0)).collect()
}

/// The run with the lowest final loss among those `keep` accepts; ties go to
/// the earlier cell.
pub fn best_final_loss(runs: &[TrainRun], keep: impl Fn(&GridCell) -> bool) -> Option<&TrainRun> {
    runs.iter().filter(|r| keep(&r.cell)).fold(None, |best: Option<&TrainRun>, r| match best {
        Some(b) if b.final_loss <= r.final_loss => Some(b),
        _ => Some(r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use vradam_core::problems::{make_logistic, Dataset};

    fn tiny() -> vradam_core::problems::LogisticRegression {
        let mut rng = RandomSource::new(1, 0);
        let n = 256;
        let features: Vec<f64> = (0..n * 3).map(|_| rng.next_f64()).collect();
        let labels = (0..n).map(|i| (features[i * 3] + features[i * 3 + 1] > 1.0) as usize).collect();
        make_logistic(Dataset::new(features, labels, 3, 2).unwrap(), 0.0).unwrap()
    }

    #[test]
    fn grid_shape_and_labels() {
        let methods = [TrainMethod::Adam, TrainMethod::Vradam { option: ResetOption::B, inner_length: 31 }];
        let cells = grid_cells(&methods, &ALPHA_GRID, &GAMMA_GRID);
        assert_eq!(cells.len(), 2 * 5 * 5);
        let labels: std::collections::BTreeSet<_> = cells.iter().map(GridCell::label).collect();
        assert_eq!(labels.len(), cells.len());
        assert!(cells[30].label().starts_with("vradam-no-reset_"));
    }

    #[test]
    fn runs_respect_the_budget_and_are_reproducible() {
        let p = tiny();
        let spec = TrainSpec { batch_size: 16, budget_epochs: 3.0, ..Default::default() };
        let w0 = DenseVector::zeros(p.dim());
        let cells = grid_cells(
            &[TrainMethod::Adam, TrainMethod::Vradam { option: ResetOption::A, inner_length: 16 }],
            &[0.01],
            &[],
        );
        let a = train_grid(&p, &spec, &cells, &w0).unwrap();
        let b = train_grid(&p, &spec, &cells, &w0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.record, y.record);
            assert!(x.record.total_cost() <= 48.0);
            assert!(x.final_loss < core::f64::consts::LN_2);
        }
        assert!(best_final_loss(&a, |c| c.method == TrainMethod::Adam).is_some());
    }
}
