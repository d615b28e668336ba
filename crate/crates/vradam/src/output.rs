//! CSV schemas written by the command-line tool. Every file starts with its
//! header; floats use Rust's shortest round-trip formatting so a rerun from
//! the echoed config reproduces the bytes.

use std::fs;
use std::path::{Path, PathBuf};

use crate::experiments::{relative_difference, DivergenceReport, ResetOutcome, TimedValue, TrainRun};
use crate::{Error, Result};

pub const DIVERGENCE_COLUMNS: [&str; 5] = ["t", "mse_mean", "mse_stderr", "drift_mean", "drift_stderr"];
pub const TRAIN_COLUMNS: [&str; 6] = ["step", "epoch_equiv", "wall_clock_s", "model_cost_units", "loss", "grad_norm"];
pub const RELATIVE_COLUMNS: [&str; 4] = ["vradam_cell", "adam_cell", "model_cost_units", "relative_difference"];
pub const RESET_COLUMNS: [&str; 7] =
    ["seed", "F_A", "F_B", "assumption1_ok", "assumption2_ok", "assumption3_ok", "asserted"];

/// Name of the echoed configuration in every output directory.
pub const CONFIG_ECHO: &str = "effective_config.toml";

/// Shortest round-trip text: plain decimal in `[1e-4, 1e15)`, exponent
/// notation outside it.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let io_err = |e: csv::Error| -> Error {
        let path = path.to_path_buf();
        match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::io(path, source),
            other => Error::Internal(format!("{}: {other:?}", path.display())),
        }
    };
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One row per `t = 0..=steps`; the update columns are empty at `t = 0`.
pub fn write_divergence_csv(path: &Path, report: &DivergenceReport) -> Result<()> {
    let rows = report.mse.iter().enumerate().map(|(t, m)| {
        let (dm, ds) = match t.checked_sub(1).map(|i| &report.drift[i]) {
            Some(d) => (num(d.mean()), num(d.std_error())),
            None => (String::new(), String::new()),
        };
        vec![t.to_string(), num(m.mean()), num(m.std_error()), dm, ds]
    });
    write_csv(path, &DIVERGENCE_COLUMNS, rows)
}

/// The evaluations of one run; `epoch_units` is the cost of one pass, `N/b`.
pub fn write_train_csv(path: &Path, run: &TrainRun, epoch_units: f64) -> Result<()> {
    let rows = run.record.evals.iter().map(|e| {
        vec![
            e.step.to_string(),
            num(e.cost / epoch_units),
            num(e.wall_clock),
            num(e.cost),
            num(e.loss),
            num(e.grad_norm),
        ]
    });
    write_csv(path, &TRAIN_COLUMNS, rows)
}

/// Loss against model cost, the time axis shared by both methods.
pub fn loss_by_cost(run: &TrainRun) -> Vec<TimedValue> {
    let mut out: Vec<TimedValue> = Vec::with_capacity(run.record.evals.len());
    for e in &run.record.evals {
        // Evaluations at equal cost (a budget stop right after a scheduled
        // one) keep the later value.
        match out.last_mut() {
            Some(last) if last.0 == e.cost => last.1 = e.loss,
            _ => out.push((e.cost, e.loss)),
        }
    }
    out
}

/// Relative loss difference of every VRADAM cell against the ADAM cell with
/// the same schedule and initial step size.
pub fn write_relative_csv(path: &Path, runs: &[TrainRun]) -> Result<()> {
    let mut rows = Vec::new();
    for vr in runs.iter().filter(|r| r.cell.method_label() != "adam") {
        let Some(adam) = runs.iter().find(|r| r.cell.method_label() == "adam" && r.cell.same_schedule(&vr.cell)) else {
            continue;
        };
        for (cost, rel) in relative_difference(&loss_by_cost(vr), &loss_by_cost(adam))? {
            rows.push(vec![vr.cell.label(), adam.cell.label(), num(cost), num(rel)]);
        }
    }
    write_csv(path, &RELATIVE_COLUMNS, rows)
}

pub fn write_reset_csv(path: &Path, outcomes: &[ResetOutcome]) -> Result<()> {
    let rows = outcomes.iter().map(|o| {
        vec![
            o.seed.to_string(),
            num(o.f_a),
            num(o.f_b),
            o.clauses[0].to_string(),
            o.clauses[1].to_string(),
            o.clauses[2].to_string(),
            o.asserted.to_string(),
        ]
    });
    write_csv(path, &RESET_COLUMNS, rows)
}

/// Writes `config` (already TOML) under a version comment.
pub fn echo_config(dir: &Path, config: &str) -> Result<PathBuf> {
    let path = dir.join(CONFIG_ECHO);
    let text = format!("# vradam {}\n{config}", env!("CARGO_PKG_VERSION"));
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, -0.0, 1.0, 400.0, 1e-4, 9.99e-5, 7.275021100308453e-16, 1e15, -3.5e200, f64::MIN_POSITIVE] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits(), "{x}");
        }
        assert_eq!(num(7.275021100308453e-16), "7.275021100308453e-16");
        assert_eq!(num(0.25), "0.25");
    }
}
