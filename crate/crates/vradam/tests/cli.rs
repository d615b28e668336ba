use std::fs;
use std::path::Path;
use std::process::Command;

use vradam::cli::run;

fn vradam(out: &Path, args: &[&str]) -> u8 {
    let mut argv = vec!["vradam", "--out", out.to_str().unwrap()];
    argv.extend_from_slice(args);
    run(argv)
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let j = rows[0].iter().position(|h| h == name).unwrap();
    rows[1..].iter().map(|r| r[j].parse().unwrap()).collect()
}

#[test]
fn adam_mse_grows_and_vradam_mse_shrinks() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(vradam(out.path(), &["divergence", "--trials", "20", "--steps", "3000", "--no-svg"]), 0);
    let csv = out.path().join("divergence/divergence.csv");
    let adam = rows(&csv);
    assert_eq!(adam[0], ["t", "mse_mean", "mse_stderr", "drift_mean", "drift_stderr"]);
    assert_eq!(adam.len(), 3002);
    assert_eq!(adam[1][3], "");
    let mse = column(&adam, "mse_mean");
    assert!(mse[3000] > 1.0 && mse[3000] > mse[100], "{} vs {}", mse[3000], mse[100]);

    let args = ["divergence", "--optimizer", "vradam", "--w0", "-80", "--trials", "4", "--steps", "300", "--warmup", "10"];
    assert_eq!(vradam(out.path(), &args), 0);
    let mse = column(&rows(&csv), "mse_mean");
    assert_eq!(mse[0], 6400.0 / 16.0);
    assert!(mse[300] < mse[0]);
    assert!(out.path().join("divergence/divergence.svg").exists());
}

#[test]
fn invalid_arguments_exit_with_two() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(vradam(out.path(), &["divergence", "--trials", "0"]), 2);
    assert_eq!(vradam(out.path(), &["divergence", "--steps", "300"]), 2);
    assert_eq!(vradam(out.path(), &["train", "--gamma", "1.5"]), 2);
    assert_eq!(vradam(out.path(), &["verify", "--only", "bogus"]), 2);
    assert_eq!(vradam(out.path(), &["divergence", "--no-such-flag"]), 2);
}

#[test]
fn train_labels_cells_and_pairs_them() {
    let out = tempfile::tempdir().unwrap();
    let args = [
        "train", "--optimizer", "adam", "vradam", "--option", "B", "--schedule", "exp", "--gamma", "0.8",
        "--alpha0", "0.01", "--inner-epochs", "1", "--epochs", "4", "--no-wall-clock", "--no-svg",
    ];
    assert_eq!(vradam(out.path(), &args), 0);
    let dir = out.path().join("train");
    let vr = rows(&dir.join("train_vradam-no-reset_exp0.8_a0.01_m31.csv"));
    assert_eq!(vr[0], ["step", "epoch_equiv", "wall_clock_s", "model_cost_units", "loss", "grad_norm"]);
    assert!(column(&vr, "wall_clock_s").iter().all(|&w| w == 0.0));
    let epochs = column(&vr, "epoch_equiv");
    assert!(*epochs.last().unwrap() <= 4.0 + 1e-12);
    let loss = column(&vr, "loss");
    assert!(loss.last().unwrap() < &loss[0]);

    let adam = dir.join("train_adam_exp0.8_a0.01.csv");
    assert!(adam.exists());
    let rel = rows(&dir.join("relative.csv"));
    assert_eq!(rel[0], ["vradam_cell", "adam_cell", "model_cost_units", "relative_difference"]);
    assert!(rel.len() > 2 && rel[1..].iter().all(|r| r[1] == "adam_exp0.8_a0.01"));

    // The echoed config reruns to the same bytes.
    let echo = fs::read_to_string(dir.join("effective_config.toml")).unwrap();
    assert!(echo.starts_with(&format!("# vradam {}", env!("CARGO_PKG_VERSION"))));
    let first = fs::read(&adam).unwrap();
    let again = tempfile::tempdir().unwrap();
    let cfg = dir.join("effective_config.toml");
    assert_eq!(vradam(again.path(), &["--config", cfg.to_str().unwrap(), "train"]), 0);
    assert_eq!(fs::read(again.path().join("train/train_adam_exp0.8_a0.01.csv")).unwrap(), first);
}

#[test]
fn gamma_inside_the_unit_interval_is_accepted() {
    let out = tempfile::tempdir().unwrap();
    let args = ["train", "--optimizer", "adam", "--schedule", "exp", "--gamma", "0.8", "--alpha0", "0.05", "--epochs", "1", "--no-svg"];
    assert_eq!(vradam(out.path(), &args), 0);
}

#[test]
fn verify_and_its_controls_succeed() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(vradam(out.path(), &["verify", "--only", "state-bounds", "unbiasedness"]), 0);
    let report = fs::read_to_string(out.path().join("verify/verify_report.txt")).unwrap();
    assert!(report.contains("PASS state-bounds") && report.contains("PASS unbiasedness"), "{report}");
    assert_eq!(vradam(out.path(), &["verify", "--negative-controls", "--only", "unbiasedness"]), 0);
}

#[test]
fn reset_compare_writes_one_row_per_seed() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(vradam(out.path(), &["reset-compare", "--seeds", "5"]), 0);
    let table = rows(&out.path().join("reset-compare/reset_compare.csv"));
    assert_eq!(
        table[0],
        ["seed", "F_A", "F_B", "assumption1_ok", "assumption2_ok", "assumption3_ok", "asserted"]
    );
    assert_eq!(table.len(), 6);
}

#[test]
fn config_errors_and_missing_files() {
    let out = tempfile::tempdir().unwrap();
    let cfg = out.path().join("bad.toml");
    fs::write(&cfg, "[divergence]\ntrails = 3\n").unwrap();
    assert_eq!(vradam(out.path(), &["--config", cfg.to_str().unwrap(), "divergence"]), 2);

    let missing = out.path().join("nope.toml");
    assert_eq!(vradam(out.path(), &["--config", missing.to_str().unwrap(), "divergence"]), 3);
    let data = out.path().join("nope.csv");
    assert_eq!(vradam(out.path(), &["train", "--data", data.to_str().unwrap()]), 3);

    let blocked = out.path().join("file");
    fs::write(&blocked, "").unwrap();
    assert_eq!(vradam(&blocked, &["divergence", "--trials", "2", "--steps", "2000"]), 3);
}

#[test]
fn malformed_data_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    fs::write(&data, "y,a,b\n0,1,2\n1,3,oops\n").unwrap();
    let bin = env!("CARGO_BIN_EXE_vradam");
    let res = Command::new(bin)
        .args(["train", "--optimizer", "adam", "--data", data.to_str().unwrap()])
        .env("VRADAM_OUT", dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn output_root_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let res = Command::new(env!("CARGO_BIN_EXE_vradam"))
        .args(["reset-compare", "--seeds", "2"])
        .env("VRADAM_OUT", dir.path())
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(dir.path().join("reset-compare/reset_compare.csv").exists());
}
