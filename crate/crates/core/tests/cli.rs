use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bahadur::cli::RunManifest;
use bahadur::rate_lab::{RateFitResult, VarEstimate};

const IID_NORMAL: &str =
    "seed = 3\n[spec]\nmodel = \"iid\"\nmarginal = { kind = \"normal\" }\n[series]\nn = 500\n";

fn bahadur(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bahadur"))
        .args(args)
        .env_remove("BAHADUR_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn gen_writes_series_sidecar_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "iid.toml", IID_NORMAL);
    let out = dir.path().join("out");
    let o = bahadur(&["gen", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("series.csv")).unwrap();
    assert_eq!(csv.lines().count(), 501);
    let manifest: RunManifest =
        serde_json::from_str(&fs::read_to_string(out.join("gen_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.command, "gen");
    assert_eq!(manifest.seed, 3);
    assert!(manifest.finished >= manifest.started);
    for path in &manifest.outputs {
        assert!(Path::new(path).exists(), "{path}");
    }
    assert_eq!(manifest.outputs.len(), 2);
}

#[test]
fn gen_is_byte_identical_on_replay_and_seed_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "iid.toml", IID_NORMAL);
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec!["gen", "--config", &cfg, "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert_eq!(bahadur(&args).status.code(), Some(0));
        fs::read(out.join("series.csv")).unwrap()
    };
    let a = run("a", &[]);
    let b = run("b", &[]);
    let c = run("c", &["--seed", "4"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn malformed_config_exits_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "[spec]\nmodel = \"powerlaw\"\nb = \"seven\"\n",
    );
    let out = dir.path().join("out");
    let o = bahadur(&["gen", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    let o = bahadur(&[
        "gen",
        "--config",
        "/nonexistent.toml",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

const B4: &str =
    "seed = 1\n[spec]\nmodel = \"powerlaw\"\nb = 4.0\nmarginal = { kind = \"normal\" }\n\
                  [experiment]\nn_grid = [256, 512, 1024, 2048]\nn_reps = 30\n";

#[test]
fn remainder_below_threshold_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "b4.toml", B4);
    let out = dir.path().join("out");
    for cmd in [vec!["rates", "--metric", "remainder"], vec!["osc"]] {
        let mut args = cmd.clone();
        args.extend(["--config", &cfg, "--out", out.to_str().unwrap()]);
        let o = bahadur(&args);
        assert_eq!(o.status.code(), Some(4), "{args:?}");
        assert!(stderr(&o).contains("4.5616"), "{}", stderr(&o));
    }
    assert!(!out.exists());
}

#[test]
fn deviation_runs_for_b4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "b4.toml", B4);
    let out = dir.path().join("out");
    let o = bahadur(&[
        "rates",
        "--metric",
        "deviation",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("slope ="));
    let fit: RateFitResult =
        serde_json::from_str(&fs::read_to_string(out.join("rates_deviation_fit.json")).unwrap())
            .unwrap();
    assert_eq!(fit.per_n.len(), 4);
    assert_eq!(fit.theory_exponent, -0.5);
    let csv = fs::read_to_string(out.join("rates_deviation_replications.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 * 30);
    assert!(out.join("rates_deviation_experiment.json").exists());
    assert!(out.join("rates_deviation_manifest.json").exists());
}

#[test]
fn iid_remainder_slope_printed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "iid.toml",
        "seed = 5\n[spec]\nmodel = \"iid\"\nmarginal = { kind = \"normal\" }\n[experiment]\nn_reps = 500\n",
    );
    let out = dir.path().join("out");
    let o = bahadur(&["rates", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("slope =")).unwrap();
    let slope: f64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((-0.85..=-0.65).contains(&slope), "{line}");
}

#[test]
fn check_suites() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = bahadur(&[
        "check",
        "--suite",
        "shao",
        "--rho",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("checks.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().all(|l| l.contains("\"verdict\":\"Pass\"")));
    let rows = stdout(&o);
    assert_eq!(rows.lines().filter(|l| l.starts_with("Pass")).count(), 3);

    // reports append on rerun
    let o = bahadur(&["check", "--suite", "smooth", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(out.join("checks.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 6);

    let o = bahadur(&["check", "--suite", "bogus", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_all_defaults_exit_0() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = bahadur(&["check", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}\n{}", stdout(&o), stderr(&o));
    assert!(!stdout(&o).lines().any(|l| l.starts_with("Fail")));
}

#[test]
fn var_from_config_and_guards() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "exp.toml",
        "seed = 8\n[spec]\nmodel = \"iid\"\nmarginal = { kind = \"exponential\", rate = 1.0 }\n",
    );
    let out = dir.path().join("out");
    let o = bahadur(&[
        "var",
        "--config",
        &cfg,
        "--level",
        "0.95",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("VaR_0.95 = "));
    let est: VarEstimate =
        serde_json::from_str(&fs::read_to_string(out.join("var.json")).unwrap()).unwrap();
    assert!((est.var_point - 20f64.ln()).abs() < 3.0 * est.width());
    assert_eq!(est.n, 100_000);

    let out2 = dir.path().join("out2");
    let o = bahadur(&[
        "var",
        "--config",
        &cfg,
        "--level",
        "0.5",
        "--out",
        out2.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out2.exists());
}

#[test]
fn var_from_generated_csv_needs_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "iid.toml", IID_NORMAL);
    let gen_out = dir.path().join("gen");
    assert_eq!(
        bahadur(&["gen", "--config", &cfg, "--out", gen_out.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let data = gen_out.join("series.csv");
    let out = dir.path().join("out");
    let o = bahadur(&[
        "var",
        "--data",
        data.to_str().unwrap(),
        "--level",
        "0.9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let orphan = dir.path().join("orphan.csv");
    fs::copy(&data, &orphan).unwrap();
    let o = bahadur(&[
        "var",
        "--data",
        orphan.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("sidecar"));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "iid.toml", IID_NORMAL);
    let out = dir.path().join("envout");
    let o = Command::new(env!("CARGO_BIN_EXE_bahadur"))
        .args(["gen", "--config", &cfg])
        .env("BAHADUR_OUT_DIR", &out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("series.csv").exists());
}
