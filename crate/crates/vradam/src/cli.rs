//! The `vradam` command line. Exit codes: 0 success, 1 check failure,
//! 2 usage or configuration error, 3 I/O error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use vradam_core::problems::{make_logistic, make_mlp, Dataset, FiniteSum};
use vradam_core::{DenseVector, RandomSource};

use crate::battery::{render_report, run_battery};
use crate::config::{
    echo_section, ConfigFile, DivergenceConfig, ModelName, OptimizerName, OptionName, ResetConfig, ScheduleName,
    TrainConfig, VerifyConfig,
};
use crate::data::{bundled_covtype, load_dataset};
use crate::experiments::{
    best_final_loss, divergence_experiment, reset_comparison, train_grid, DivergenceReport, TrainRun,
};
use crate::output::{
    create_dir, echo_config, loss_by_cost, write_divergence_csv, write_relative_csv, write_reset_csv, write_text,
    write_train_csv,
};
use crate::svg::{emit_svg_lines, Axes, Scale, Series};
use crate::{Error, Result};

/// Overrides the output root when `--out` is absent.
pub const OUT_ENV: &str = "VRADAM_OUT";
const DEFAULT_OUT: &str = "vradam-out";
/// Polyline points per series in emitted charts.
const SVG_POINTS: usize = 2000;

#[derive(Debug, Parser)]
#[command(name = "vradam", version, about = "ADAM divergence and variance-reduced ADAM experiments")]
struct Cli {
    /// Output root; each command writes into `<root>/<command>`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML file with `[divergence]`, `[train]`, `[verify]` and
    /// `[reset_compare]` tables; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte-Carlo runs on the two-branch OP(δ) problem.
    Divergence(DivergenceArgs),
    /// Grid search of ADAM and VRADAM on a classification dataset.
    Train(TrainArgs),
    /// Oracle and invariant battery.
    Verify(VerifyArgs),
    /// Option A against Option B after the first outer iteration.
    ResetCompare(ResetArgs),
}

#[derive(Debug, Args)]
struct DivergenceArgs {
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    w0: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    warmup: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    optimizer: Option<OptimizerName>,
    #[arg(long, value_enum)]
    option: Option<OptionName>,
    #[arg(long)]
    inner_length: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, value_enum)]
    schedule: Option<ScheduleName>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    no_svg: bool,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Dataset file; the bundled 2,000-row table when absent.
    #[arg(long)]
    data: Option<PathBuf>,
    /// `csv` or `libsvm`.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long, value_enum)]
    model: Option<ModelName>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    epochs: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    evals_per_epoch: Option<usize>,
    #[arg(long, value_enum, num_args = 1..)]
    optimizer: Vec<OptimizerName>,
    #[arg(long, value_enum, num_args = 1..)]
    option: Vec<OptionName>,
    #[arg(long, value_enum, num_args = 1..)]
    schedule: Vec<ScheduleName>,
    #[arg(long, num_args = 1..)]
    alpha0: Vec<f64>,
    #[arg(long, num_args = 1..)]
    gamma: Vec<f64>,
    /// VRADAM inner lengths as multiples of N/b.
    #[arg(long, num_args = 1..)]
    inner_epochs: Vec<f64>,
    /// Write 0 in the wall-clock column so reruns are byte-identical.
    #[arg(long)]
    no_wall_clock: bool,
    #[arg(long)]
    no_svg: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Run only the named checks.
    #[arg(long, num_args = 1..)]
    only: Vec<String>,
    /// Run the deliberately failing controls instead of the checks.
    #[arg(long)]
    negative_controls: bool,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ResetArgs {
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    w1: Option<f64>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    #[arg(long)]
    inner_length: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_list<T>(slot: &mut Vec<T>, values: Vec<T>) {
    if !values.is_empty() {
        *slot = values;
    }
}

fn wall_clock() -> f64 {
    static START: OnceLock<Instant> = OnceLock::new();
    START.get_or_init(Instant::now).elapsed().as_secs_f64()
}

fn output_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status. Diagnostics go to stderr, summaries to stdout.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}

fn dispatch(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let root = output_root(cli.out);
    match cli.command {
        Command::Divergence(a) => divergence(file.divergence, a, &root.join("divergence")),
        Command::Train(a) => train(file.train, a, &root.join("train")),
        Command::Verify(a) => verify(file.verify, a, &root.join("verify")),
        Command::ResetCompare(a) => reset_compare(file.reset_compare, a, &root.join("reset-compare")),
    }
}

fn downsample(points: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let stride = points.len().div_ceil(SVG_POINTS).max(1);
    let last = points.last().copied();
    let mut out: Vec<(f64, f64)> = points.into_iter().step_by(stride).collect();
    if let (Some(l), Some(o)) = (last, out.last()) {
        if *o != l {
            out.push(l);
        }
    }
    out
}

fn divergence(mut c: DivergenceConfig, a: DivergenceArgs, dir: &Path) -> Result<()> {
    set(&mut c.delta, a.delta);
    set(&mut c.w0, a.w0);
    set(&mut c.trials, a.trials);
    set(&mut c.steps, a.steps);
    set(&mut c.warmup, a.warmup);
    set(&mut c.seed, a.seed);
    set(&mut c.optimizer, a.optimizer);
    set(&mut c.option, a.option);
    set(&mut c.inner_length, a.inner_length);
    c.alpha = a.alpha.or(c.alpha);
    c.beta1 = a.beta1.or(c.beta1);
    set(&mut c.beta2, a.beta2);
    c.eps = a.eps.or(c.eps);
    set(&mut c.schedule, a.schedule);
    set(&mut c.gamma, a.gamma);
    if a.no_svg {
        c.svg = false;
    }
    let c = c.resolved();
    let spec = c.to_spec()?;
    let echo = echo_section("divergence", &c)?;
    let report = divergence_experiment(&spec)?;

    create_dir(dir)?;
    echo_config(dir, &echo)?;
    write_divergence_csv(&dir.join("divergence.csv"), &report)?;
    if c.svg {
        write_text(&dir.join("divergence.svg"), &divergence_svg(&report)?)?;
    }
    let d = report.drift_estimate();
    println!(
        "{}: mse {:e} -> {:e}; drift past warmup {:e} (99% CI [{:e}, {:e}]); {} trial(s) failed",
        spec.optimizer.label(),
        report.mse_at(0),
        report.final_mse(),
        d.mean,
        d.lower(),
        d.upper(),
        report.failures.len()
    );
    if let Some((trial, msg)) = report.failures.first() {
        return Err(Error::Check(format!("trial {trial}: {msg}")));
    }
    Ok(())
}

fn divergence_svg(report: &DivergenceReport) -> Result<String> {
    let pts = report.mse.iter().enumerate().map(|(t, s)| (t as f64, s.mean())).collect();
    let axes = Axes {
        title: format!("OP({}) from w0 = {}", report.spec.delta, report.spec.w0),
        x_label: "t".into(),
        y_label: "mean (w_t - w*)^2".into(),
        y_scale: Scale::Log,
        ..Axes::default()
    };
    emit_svg_lines(&[Series::new(report.spec.optimizer.label(), downsample(pts))], &axes)
}

enum Model {
    Logistic(vradam_core::problems::LogisticRegression),
    Mlp(vradam_core::problems::Mlp),
}

fn train(mut c: TrainConfig, a: TrainArgs, dir: &Path) -> Result<()> {
    c.data = a.data.or(c.data);
    set(&mut c.format, a.format);
    set(&mut c.label_column, a.label_column);
    set(&mut c.model, a.model);
    set(&mut c.hidden, a.hidden);
    set(&mut c.l2, a.l2);
    set(&mut c.batch_size, a.batch_size);
    set(&mut c.epochs, a.epochs);
    set(&mut c.seed, a.seed);
    set(&mut c.evals_per_epoch, a.evals_per_epoch);
    set_list(&mut c.optimizers, a.optimizer);
    set_list(&mut c.options, a.option);
    set_list(&mut c.schedules, a.schedule);
    set_list(&mut c.alpha0, a.alpha0);
    set_list(&mut c.gamma, a.gamma);
    set_list(&mut c.inner_epochs, a.inner_epochs);
    if a.no_wall_clock {
        c.wall_clock = false;
    }
    if a.no_svg {
        c.svg = false;
    }

    let mut spec = c.spec()?;
    let data: Dataset = match &c.data {
        Some(path) => load_dataset(path, c.format()?, &c.label())?,
        None => bundled_covtype(),
    };
    let n = data.num_samples();
    if c.batch_size > n {
        return Err(Error::config(format!("batch_size {} exceeds the {n} samples", c.batch_size)));
    }
    let cells = c.cells(n)?;
    if c.wall_clock {
        wall_clock();
        spec.clock = Some(wall_clock);
    }
    let echo = echo_section("train", &c)?;
    let model = match c.model {
        ModelName::Logistic => Model::Logistic(make_logistic(data, c.l2)?),
        ModelName::Mlp => Model::Mlp(make_mlp(data, c.hidden)?),
    };
    let runs = match &model {
        Model::Logistic(p) => train_grid(p, &spec, &cells, &DenseVector::zeros(p.dim()))?,
        Model::Mlp(p) => {
            let w0 = p.init_params(&mut RandomSource::new(c.seed, u64::MAX));
            train_grid(p, &spec, &cells, &w0)?
        }
    };

    create_dir(dir)?;
    echo_config(dir, &echo)?;
    let epoch = spec.epoch_units(n);
    for run in &runs {
        write_train_csv(&dir.join(format!("train_{}.csv", run.cell.label())), run, epoch)?;
    }
    if runs.iter().any(|r| r.cell.method_label() == "adam") && runs.iter().any(|r| r.cell.method_label() != "adam") {
        write_relative_csv(&dir.join("relative.csv"), &runs)?;
    }
    let best = best_by_method(&runs);
    for r in &best {
        println!("best {}: final loss {} ({})", r.cell.method_label(), r.final_loss, r.cell.label());
    }
    if c.svg {
        let series: Vec<Series> = best.iter().map(|r| Series::new(r.cell.label(), loss_by_cost(r))).collect();
        let axes = Axes {
            title: "best grid cell per method".into(),
            x_label: "model cost units".into(),
            y_label: "training loss".into(),
            ..Axes::default()
        };
        write_text(&dir.join("train.svg"), &emit_svg_lines(&series, &axes)?)?;
    }
    Ok(())
}

fn best_by_method(runs: &[TrainRun]) -> Vec<&TrainRun> {
    let mut labels: Vec<String> = Vec::new();
    for r in runs {
        if !labels.contains(&r.cell.method_label()) {
            labels.push(r.cell.method_label());
        }
    }
    labels.iter().filter_map(|l| best_final_loss(runs, |c| c.method_label() == *l)).collect()
}

fn verify(mut c: VerifyConfig, a: VerifyArgs, dir: &Path) -> Result<()> {
    set_list(&mut c.only, a.only);
    if a.negative_controls {
        c.negative_controls = true;
    }
    set(&mut c.seed, a.seed);
    let echo = echo_section("verify", &c)?;
    let outcomes = run_battery(&c.only, c.negative_controls, c.seed)?;
    let report = render_report(&outcomes);

    create_dir(dir)?;
    echo_config(dir, &echo)?;
    write_text(&dir.join("verify_report.txt"), &report)?;
    print!("{}", report.lines().take_while(|l| !l.is_empty()).map(|l| format!("{l}\n")).collect::<String>());
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Check(format!("failing: {}", failed.join(", "))))
    }
}

fn reset_compare(mut c: ResetConfig, a: ResetArgs, dir: &Path) -> Result<()> {
    set(&mut c.seeds, a.seeds);
    set(&mut c.w1, a.w1);
    set(&mut c.beta1, a.beta1);
    set(&mut c.beta2, a.beta2);
    set(&mut c.inner_length, a.inner_length);
    set(&mut c.batch_size, a.batch_size);
    set(&mut c.eps, a.eps);
    set(&mut c.alpha, a.alpha);
    let spec = c.spec()?;
    let echo = echo_section("reset_compare", &c)?;
    let outcomes = (0..c.seeds).map(|s| reset_comparison(&spec, s)).collect::<Result<Vec<_>>>()?;

    create_dir(dir)?;
    echo_config(dir, &echo)?;
    write_reset_csv(&dir.join("reset_compare.csv"), &outcomes)?;
    let asserted: Vec<_> = outcomes.iter().filter(|o| o.asserted).collect();
    let violations: Vec<u64> = asserted.iter().filter(|o| o.f_b < o.f_a - 1e-12).map(|o| o.seed).collect();
    println!("{} of {} seeds asserted; {} violation(s)", asserted.len(), outcomes.len(), violations.len());
    if !violations.is_empty() {
        return Err(Error::Check(format!("F_B < F_A on asserted seeds {violations:?}")));
    }
    Ok(())
}
