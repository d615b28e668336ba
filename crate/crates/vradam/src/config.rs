//! Run configuration: one TOML table per command, unknown keys rejected.
//! Command-line flags override file values; the merged result is what gets
//! echoed into the output directory. The grammar is documented in the README.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use vradam_core::optimizers::{AdamHyper, LearningRate, ResetOption, Schedule, VradamConfig};

use crate::data::{DatasetFormat, LabelColumn};
use crate::experiments::{
    grid_cells, DivergenceSpec, GridCell, ResetSpec, TrainMethod, TrainSpec, TrialOptimizer, ALPHA_GRID, GAMMA_GRID,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub divergence: DivergenceConfig,
    pub train: TrainConfig,
    pub verify: VerifyConfig,
    pub reset_compare: ResetConfig,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

/// Renders one command's table as it would appear in a config file.
pub fn echo_section<T: Serialize>(name: &str, section: &T) -> Result<String> {
    let body = toml::to_string(section).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(format!("[{name}]\n{body}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerName {
    Adam,
    Vradam,
    Sgd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum OptionName {
    /// Reset the moments every outer iteration.
    #[value(name = "A", alias = "a")]
    A,
    /// Carry the moments across outer iterations ("no-reset").
    #[value(name = "B", alias = "b")]
    B,
}

impl From<OptionName> for ResetOption {
    fn from(o: OptionName) -> Self {
        match o {
            OptionName::A => ResetOption::A,
            OptionName::B => ResetOption::B,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleName {
    Const,
    #[value(name = "inv_t")]
    InvT,
    Exp,
}

fn schedule(name: ScheduleName, gamma: f64) -> Schedule {
    match name {
        ScheduleName::Const => Schedule::Constant,
        ScheduleName::InvT => Schedule::InverseTime,
        ScheduleName::Exp => Schedule::Exponential { gamma },
    }
}

fn positive(name: &str, value: usize) -> Result<usize> {
    if value == 0 {
        return Err(Error::config(format!("{name} must be at least 1")));
    }
    Ok(value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DivergenceConfig {
    pub delta: f64,
    pub w0: f64,
    pub trials: usize,
    pub steps: usize,
    pub warmup: usize,
    pub seed: u64,
    pub optimizer: OptimizerName,
    /// VRADAM only.
    pub option: OptionName,
    pub inner_length: usize,
    /// Defaults per optimizer when absent: proof-regime ADAM
    /// (`α = 0.001`, `β₁ = 0`, `ε = 1e-12`), VRADAM (`α = 0.01`, `β₁ = 0.9`,
    /// `ε = 1e-8`), SGD (`α = 0.01`).
    pub alpha: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: f64,
    pub eps: Option<f64>,
    pub schedule: ScheduleName,
    pub gamma: f64,
    pub svg: bool,
}

impl Default for DivergenceConfig {
    fn default() -> Self {
        DivergenceConfig {
            delta: 10.0,
            w0: -100.0,
            trials: 1000,
            steps: 10_000,
            warmup: 1000,
            seed: 0,
            optimizer: OptimizerName::Adam,
            option: OptionName::A,
            inner_length: 32,
            alpha: None,
            beta1: None,
            beta2: 0.999,
            eps: None,
            schedule: ScheduleName::Const,
            gamma: 0.8,
            svg: true,
        }
    }
}

impl DivergenceConfig {
    /// Fills per-optimizer defaults so the echo shows every value used.
    pub fn resolved(mut self) -> Self {
        let (a, b1, e) = match self.optimizer {
            OptimizerName::Adam => (0.001, 0.0, 1e-12),
            OptimizerName::Vradam => (0.01, 0.9, 1e-8),
            OptimizerName::Sgd => (0.01, 0.0, 0.0),
        };
        self.alpha.get_or_insert(a);
        self.beta1.get_or_insert(b1);
        self.eps.get_or_insert(e);
        self
    }

    pub fn to_spec(&self) -> Result<DivergenceSpec> {
        let c = self.clone().resolved();
        if c.trials < 2 {
            return Err(Error::config("trials must be at least 2"));
        }
        positive("steps", c.steps)?;
        let lr = LearningRate::new(c.alpha.unwrap_or_default(), schedule(c.schedule, c.gamma))?;
        let hyper = || AdamHyper::new(lr, c.beta1.unwrap_or_default(), c.beta2, c.eps.unwrap_or_default());
        let optimizer = match c.optimizer {
            OptimizerName::Adam => TrialOptimizer::Adam(hyper()?),
            OptimizerName::Vradam => TrialOptimizer::Vradam(VradamConfig::new(
                hyper()?,
                positive("inner_length", c.inner_length)?,
                1,
                c.option.into(),
            )?),
            OptimizerName::Sgd => TrialOptimizer::Sgd(lr),
        };
        Ok(DivergenceSpec {
            delta: c.delta,
            w0: c.w0,
            trials: c.trials,
            steps: c.steps,
            base_seed: c.seed,
            optimizer,
            warmup: c.warmup,
            reachable_radius: None,
            check_step_bound: matches!(optimizer, TrialOptimizer::Adam(h) if h.beta1 == 0.0),
            shared_stream: false,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Logistic,
    Mlp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Dataset path; absent means the bundled 2,000-row table.
    pub data: Option<PathBuf>,
    pub format: String,
    /// CSV label column name; empty means the first column.
    pub label_column: String,
    pub model: ModelName,
    pub hidden: usize,
    pub l2: f64,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub epochs: f64,
    pub seed: u64,
    pub evals_per_epoch: usize,
    pub optimizers: Vec<OptimizerName>,
    pub options: Vec<OptionName>,
    pub schedules: Vec<ScheduleName>,
    pub alpha0: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Inner lengths as multiples of `N/b` (rounded down, at least 1).
    pub inner_epochs: Vec<f64>,
    pub wall_clock: bool,
    pub svg: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let spec = TrainSpec::default();
        TrainConfig {
            data: None,
            format: "csv".into(),
            label_column: "y".into(),
            model: ModelName::Logistic,
            hidden: 32,
            l2: 0.0,
            batch_size: spec.batch_size,
            beta1: spec.beta1,
            beta2: spec.beta2,
            eps: spec.eps,
            epochs: spec.budget_epochs,
            seed: spec.seed,
            evals_per_epoch: spec.evals_per_epoch,
            optimizers: vec![OptimizerName::Adam, OptimizerName::Vradam],
            options: vec![OptionName::A, OptionName::B],
            schedules: vec![ScheduleName::Const, ScheduleName::InvT, ScheduleName::Exp],
            alpha0: ALPHA_GRID.to_vec(),
            gamma: GAMMA_GRID.to_vec(),
            inner_epochs: vec![0.5, 1.0, 2.0, 4.0],
            wall_clock: true,
            svg: true,
        }
    }
}

impl TrainConfig {
    pub fn format(&self) -> Result<DatasetFormat> {
        self.format.parse().map_err(Error::Config)
    }

    pub fn label(&self) -> LabelColumn {
        if self.label_column.is_empty() {
            LabelColumn::First
        } else {
            LabelColumn::Named(self.label_column.clone())
        }
    }

    pub fn spec(&self) -> Result<TrainSpec> {
        positive("batch_size", self.batch_size)?;
        if !(self.epochs > 0.0) {
            return Err(Error::config("epochs must be positive"));
        }
        Ok(TrainSpec {
            batch_size: self.batch_size,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
            budget_epochs: self.epochs,
            seed: self.seed,
            evals_per_epoch: positive("evals_per_epoch", self.evals_per_epoch)?,
            clock: None,
        })
    }

    /// The grid over `n` samples.
    pub fn cells(&self, n: usize) -> Result<Vec<GridCell>> {
        for &g in &self.gamma {
            if !(g > 0.0 && g < 1.0) {
                return Err(Error::config(format!("gamma {g} outside (0, 1)")));
            }
        }
        for &a in &self.alpha0 {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::config(format!("alpha0 {a} must be positive")));
            }
        }
        if self.optimizers.is_empty() || self.alpha0.is_empty() || self.schedules.is_empty() {
            return Err(Error::config("optimizers, schedules and alpha0 must be non-empty"));
        }
        if self.schedules.contains(&ScheduleName::Exp) && self.gamma.is_empty() {
            return Err(Error::config("the exp schedule needs at least one gamma"));
        }
        let epoch = n as f64 / self.batch_size as f64;
        let mut methods = Vec::new();
        for &o in &self.optimizers {
            match o {
                OptimizerName::Adam => methods.push(TrainMethod::Adam),
                OptimizerName::Vradam => {
                    if self.options.is_empty() || self.inner_epochs.is_empty() {
                        return Err(Error::config("vradam needs at least one option and one inner_epochs value"));
                    }
                    for &e in &self.inner_epochs {
                        if !(e > 0.0) {
                            return Err(Error::config(format!("inner_epochs {e} must be positive")));
                        }
                        for &option in &self.options {
                            let inner_length = ((e * epoch).floor() as usize).max(1);
                            methods.push(TrainMethod::Vradam { option: option.into(), inner_length });
                        }
                    }
                }
                OptimizerName::Sgd => return Err(Error::config("train supports adam and vradam")),
            }
        }
        let mut cells = Vec::new();
        for c in grid_cells(&methods, &self.alpha0, &self.gamma) {
            let name = match c.schedule {
                Schedule::Constant => ScheduleName::Const,
                Schedule::InverseTime => ScheduleName::InvT,
                Schedule::Exponential { .. } => ScheduleName::Exp,
            };
            if self.schedules.contains(&name) {
                cells.push(c);
            }
        }
        Ok(cells)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub only: Vec<String>,
    pub negative_controls: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResetConfig {
    pub seeds: u64,
    pub curvature: Vec<f64>,
    pub linear: Vec<f64>,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub inner_length: usize,
    pub g_bound: f64,
    pub eps: f64,
    pub alpha: f64,
    pub w1: f64,
}

impl Default for ResetConfig {
    fn default() -> Self {
        let s = ResetSpec::satisfiable();
        ResetConfig {
            seeds: 100,
            curvature: s.curvature,
            linear: s.linear,
            batch_size: s.batch_size,
            beta1: s.beta1,
            beta2: s.beta2,
            inner_length: s.inner_length,
            g_bound: s.g_bound,
            eps: s.eps,
            alpha: s.alpha,
            w1: s.w1,
        }
    }
}

impl ResetConfig {
    pub fn spec(&self) -> Result<ResetSpec> {
        positive("seeds", self.seeds as usize)?;
        if self.curvature.len() != self.linear.len() {
            return Err(Error::config("curvature and linear need the same length"));
        }
        Ok(ResetSpec {
            curvature: self.curvature.clone(),
            linear: self.linear.clone(),
            batch_size: self.batch_size,
            beta1: self.beta1,
            beta2: self.beta2,
            inner_length: positive("inner_length", self.inner_length)?,
            g_bound: self.g_bound,
            eps: self.eps,
            alpha: self.alpha,
            w1: self.w1,
        })
    }
}
