use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use esjj::kernel::truncation_tail_bound;
use esjj::{decay_constants, Field, Grid, Parameters, Provenance};
use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn esjj(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esjj"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env_remove("ESJJ_WORKERS")
        .output()
        .expect("binary runs")
}

fn ok(o: &Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read_field(path: &Path) -> Field {
    Field::read_csv(
        fs::File::open(path).map(std::io::BufReader::new).unwrap(),
        Provenance::Linear,
    )
    .unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn single_mode_solve_matches_closed_form() {
    let tmp = TempDir::new().unwrap();
    ok(&esjj(&["solve"], &configs().join("single_mode.toml"), tmp.path()));
    let u = read_field(&tmp.path().join("u.csv"));
    let exact = Field::from_fn(&u.grid(), Provenance::Analytic, |x, t| (-t).exp() * x.sin());
    assert!(u.max_abs_diff(&exact).unwrap() < 1e-6);
    assert_eq!(json(&tmp.path().join("report.json"))["solver"], "linear");
}

#[test]
fn zero_data_gives_zero_field() {
    let tmp = TempDir::new().unwrap();
    ok(&esjj(&["solve"], &configs().join("zero.toml"), tmp.path()));
    assert_eq!(read_field(&tmp.path().join("u.csv")).sup_norm(), 0.0);
}

#[test]
fn tabulated_profile_is_reproduced_at_t0() {
    let tmp = TempDir::new().unwrap();
    ok(&esjj(&["solve"], &configs().join("tabulated.toml"), tmp.path()));
    let u = read_field(&tmp.path().join("u.csv"));
    let mid = u.x_grid.iter().position(|x| (x - 1.0).abs() < 1e-12).unwrap();
    assert!((u.get(mid, 0) - 0.45).abs() < 1e-3);
}

#[test]
fn sine_gordon_picard_run_records_contraction() {
    let tmp = TempDir::new().unwrap();
    let stdout = ok(&esjj(&["solve"], &configs().join("sine_gordon.toml"), tmp.path()));
    assert!(stdout.contains("contraction_ratio"));
    let report = json(&tmp.path().join("report.json"));
    assert_eq!(report["picard"]["converged"], true);
    assert!(report["picard"]["contraction_ratio"].as_f64().unwrap() < 1.0);
    assert!(report["bound"]["delta"].as_f64().unwrap() > 0.0);
}

#[test]
fn green_eval_rows() {
    let tmp = TempDir::new().unwrap();
    ok(&esjj(&["green-eval"], &configs().join("green.toml"), tmp.path()));
    let rows = read_rows(&tmp.path().join("green.csv"));
    assert_eq!(rows.len(), 8);
    for r in rows.iter().filter(|r| r[2] == 0.0) {
        assert_eq!(r[3], 0.0);
    }
    let find = |x: f64, xi: f64| rows.iter().find(|r| r[0] == x && r[1] == xi && r[2] > 0.0).unwrap()[3];
    let (a, b) = (rows[0][0], rows[2][1]);
    assert!((find(a, b) - find(b, a)).abs() < 1e-14);

    let doubled = TempDir::new().unwrap();
    ok(&esjj(
        &["green-eval", "--truncation", "2x"],
        &configs().join("green.toml"),
        doubled.path(),
    ));
    let rows2 = read_rows(&doubled.path().join("green.csv"));
    // The config fixes 200 modes; 2x adds modes 201..400, whose sum the tail bound controls.
    let p = Parameters::new(1.0, 1.0, 0.0, std::f64::consts::PI, 2.0).unwrap();
    let tail = truncation_tail_bound(&p, 0.7, 201).unwrap();
    for (r, s) in rows.iter().zip(&rows2).filter(|(r, _)| r[2] > 0.0) {
        let d = (r[3] - s[3]).abs();
        assert!(d > 0.0 && d <= tail, "{d} vs bound {tail}");
    }
}

fn read_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn validate_against_fd_separates_the_weights() {
    let tmp = TempDir::new().unwrap();
    let cfg = configs().join("tapered_validate.toml");
    ok(&esjj(&["validate"], &cfg, tmp.path()));
    let good = json(&tmp.path().join("validation.json"))["linf"].as_f64().unwrap();
    ok(&esjj(&["validate", "--weight", "paperliteral"], &cfg, tmp.path()));
    let bad = json(&tmp.path().join("validation.json"))["linf"].as_f64().unwrap();
    assert!(good < 5e-3, "{good}");
    assert!(bad > 10.0 * good, "{bad} vs {good}");
}

#[test]
fn decay_study_reports_forcing_rate_and_constants() {
    let tmp = TempDir::new().unwrap();
    ok(&esjj(
        &["decay-study"],
        &configs().join("forced_decay.toml"),
        tmp.path(),
    ));
    let rows = read_rows(&tmp.path().join("decay.csv"));
    assert!((rows[0][2] + 0.2).abs() < 0.05, "{}", rows[0][2]);
    let dc = decay_constants(&Parameters::new(1.0, 1.0, 0.0, std::f64::consts::PI, 20.0).unwrap());
    assert_eq!(
        (rows[0][3], rows[0][4], rows[0][5]),
        (dc.delta, dc.p_lambda, dc.q_lambda)
    );
}

#[test]
fn homogeneous_decay_study_decays_faster_than_delta() {
    let tmp = TempDir::new().unwrap();
    ok(&esjj(
        &["decay-study", "--format", "json"],
        &configs().join("single_mode.toml"),
        tmp.path(),
    ));
    let rows = json(&tmp.path().join("decay.json"));
    let r = &rows[0];
    assert!(r["fitted_rate"].as_f64().unwrap() <= -r["delta"].as_f64().unwrap());
}

#[test]
fn binary_and_json_fields_round_trip() {
    let tmp = TempDir::new().unwrap();
    let cfg = configs().join("single_mode.toml");
    ok(&esjj(&["solve", "--format", "bin", "--solver", "fd"], &cfg, tmp.path()));
    let grid_json = json(&tmp.path().join("u.grid.json"));
    let axis = |k: &str| {
        grid_json[k]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect::<Vec<_>>()
    };
    let grid = Grid::new(axis("x"), axis("t")).unwrap();
    let bin = Field::read_bin(
        fs::File::open(tmp.path().join("u.bin")).unwrap(),
        &grid,
        Provenance::Oracle,
    )
    .unwrap();
    let exact = Field::from_fn(&grid, Provenance::Analytic, |x, t| (-t).exp() * x.sin());
    assert!(bin.max_abs_diff(&exact).unwrap() < 1e-3);

    ok(&esjj(&["solve", "--format", "json"], &cfg, tmp.path()));
    let j = json(&tmp.path().join("u.json"));
    assert_eq!(j["values"].as_array().unwrap().len(), j["x"].as_array().unwrap().len());
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let code = |o: Output| o.status.code().unwrap();
    assert_eq!(code(esjj(&["solve"], &tmp.path().join("missing.toml"), tmp.path())), 4);

    let bad = write_config(
        tmp.path(),
        "[params]\nalpha = -1\nepsilon = 1\nlength = 1\nhorizon = 1\n",
    );
    assert_eq!(code(esjj(&["solve"], &bad, tmp.path())), 2);

    let base = fs::read_to_string(configs().join("sine_gordon.toml")).unwrap();
    let stalled = write_config(tmp.path(), &base.replace("tol = 1e-10", "tol = 1e-15\nmax_iter = 1"));
    assert_eq!(code(esjj(&["solve"], &stalled, tmp.path())), 3);

    let cfg = configs().join("sine_gordon.toml");
    assert_eq!(code(esjj(&["solve", "--solver", "linear"], &cfg, tmp.path())), 2);
    assert_eq!(code(esjj(&["solve", "--weight", "sideways"], &cfg, tmp.path())), 2);

    let workers = Command::new(env!("CARGO_BIN_EXE_esjj"))
        .args(["solve", "--config"])
        .arg(configs().join("zero.toml"))
        .arg("--out")
        .arg(tmp.path())
        .env("ESJJ_WORKERS", "none")
        .output()
        .unwrap();
    assert_eq!(code(workers), 2);
}

#[test]
fn worker_count_does_not_change_results() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let cfg = configs().join("sine_gordon.toml");
    for (dir, n) in [(&a, "1"), (&b, "3")] {
        let o = Command::new(env!("CARGO_BIN_EXE_esjj"))
            .args(["solve", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path())
            .env("ESJJ_WORKERS", n)
            .output()
            .unwrap();
        ok(&o);
    }
    let ua = fs::read(a.path().join("u.csv")).unwrap();
    let ub = fs::read(b.path().join("u.csv")).unwrap();
    assert_eq!(ua, ub);
}
