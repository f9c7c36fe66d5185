use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lfgabor::field::FieldParams;
use lfgabor::transform::{Domain, GridSpec, SampledFunction};
use num_complex::Complex64;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lfgabor"));
    for var in [
        "LFGABOR_CONFIG",
        "LFGABOR_OUT",
        "LFGABOR_SEED",
        "LFGABOR_WORKERS",
        "LFGABOR_COUNT",
    ] {
        cmd.env_remove(var);
    }
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn reports_match_golden_files() {
    for name in ["onb", "nonframe", "two_term"] {
        let config = fixture(&format!("{name}.json"));
        let config = config.to_str().unwrap();
        for cmd in ["certify", "oracle"] {
            let want =
                std::fs::read_to_string(fixture(&format!("golden/{name}.{cmd}.json"))).unwrap();
            let first = run(&["--config", config, cmd]);
            let second = run(&["--config", config, cmd]);
            assert_eq!(first.status.code(), Some(0), "{name} {cmd}");
            assert_eq!(stdout(&first), want, "{name} {cmd}");
            assert_eq!(first.stdout, second.stdout);
        }
    }
}

#[test]
fn chain_check_matches_golden() {
    let out = run(&["chain-check", "--count", "200", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let want = std::fs::read_to_string(fixture("golden/chain_check_seed7.json")).unwrap();
    assert_eq!(stdout(&out), want);
    assert_eq!(json(&out)["ok"], true);
}

#[test]
fn orthonormal_certificate() {
    let out = run(&["--config", fixture("onb.json").to_str().unwrap(), "certify"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    for key in ["beta", "mu", "sigma"] {
        let t = &report["theorems"][key];
        assert_eq!(t["applicable"], true);
        assert_eq!(t["C"].as_f64(), Some(1.0));
        assert_eq!(t["D"].as_f64(), Some(1.0));
    }
    assert!(report["oracle"].is_null());
}

#[test]
fn oracle_writes_spectrum_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("spec.csv");
    let out = run(&[
        "--config",
        fixture("two_term.json").to_str().unwrap(),
        "oracle",
        "--spectrum",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,eigenvalue"));
    let vals: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(vals.len(), 4);
    assert!((vals[0] - 0.25).abs() < 1e-9 && (vals[3] - 2.25).abs() < 1e-9);
    assert_eq!(json(&out)["oracle"]["bracketed"], true);
}

#[test]
fn environment_supplies_defaults_and_flags_override() {
    let config = fixture("onb.json");
    let out = bin()
        .env("LFGABOR_CONFIG", &config)
        .arg("certify")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["grid"]["M"], 2);

    let out = bin()
        .env("LFGABOR_CONFIG", "/nonexistent.json")
        .args(["--config", config.to_str().unwrap(), "certify"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));

    let out = bin()
        .env("LFGABOR_COUNT", "3")
        .args(["chain-check", "--seed", "1"])
        .output()
        .unwrap();
    let summary = json(&out);
    assert_eq!(summary["fields"][0]["cases"], 3);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = run(&[
        "--config",
        fixture("onb.json").to_str().unwrap(),
        "--out",
        path.to_str().unwrap(),
        "certify",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let want = std::fs::read_to_string(fixture("golden/onb.certify.json")).unwrap();
    assert_eq!(std::fs::read_to_string(path).unwrap(), want);
}

#[test]
fn bad_input_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"schemaVersion": 1, "field": {"p": 2}, "grid": {"M": 1, "N": 1},
            "lattice": {"s": 0, "t": 0},
            "window": {"domain": "time", "terms": [{"k": 0, "re": 1.0}]}}"#,
    )
    .unwrap();
    let out = run(&["--config", bad.to_str().unwrap(), "certify"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("window") && err.contains("`h`"), "{err}");

    std::fs::write(&bad, r#"{"schemaVersion": 1, "field": {"p": 4}}"#).unwrap();
    assert_eq!(
        run(&["--config", bad.to_str().unwrap(), "certify"])
            .status
            .code(),
        Some(2)
    );

    std::fs::write(&bad, r#"{"schemaVersion": 1, "field": {"p": 2}}"#).unwrap();
    assert_eq!(
        run(&["--config", bad.to_str().unwrap(), "certify"])
            .status
            .code(),
        Some(2)
    );

    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&["--config", "/nonexistent.json", "certify"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn non_frame_window_reports_no_applicable_bound() {
    let out = run(&[
        "--config",
        fixture("nonframe.json").to_str().unwrap(),
        "oracle",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    for key in ["beta", "mu", "sigma"] {
        assert_eq!(report["theorems"][key]["applicable"], false);
    }
    assert_eq!(report["oracle"]["isFrame"], false);
    assert!(report["oracle"]["bracketed"].is_null());
}

fn sample(domain: Domain) -> SampledFunction {
    let f = FieldParams::new(3, 1).unwrap();
    let g = GridSpec::new(&f, 1, 1).unwrap();
    SampledFunction::from_fn(&g, domain, |j| {
        Complex64::new(j as f64 * 0.5 - 1.0, (j as f64).cos())
    })
}

#[test]
fn transform_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.json");
    let fwd = dir.path().join("fh.json");
    let back = dir.path().join("back.json");
    let f = sample(Domain::Time);
    std::fs::write(&input, f.to_json()).unwrap();

    let out = run(&[
        "--out",
        fwd.to_str().unwrap(),
        "transform",
        input.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let naive = run(&["transform", input.to_str().unwrap(), "--naive"]);
    let fh = SampledFunction::from_json(&std::fs::read_to_string(&fwd).unwrap()).unwrap();
    let fh_naive = SampledFunction::from_json(&stdout(&naive)).unwrap();
    assert!(fh.max_abs_diff(&fh_naive) <= 1e-10);

    let out = run(&[
        "--out",
        back.to_str().unwrap(),
        "transform",
        fwd.to_str().unwrap(),
        "--inverse",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let again = SampledFunction::from_json(&std::fs::read_to_string(&back).unwrap()).unwrap();
    assert!(again.max_abs_diff(&f) <= 1e-12);
}

#[test]
fn transform_reads_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.csv");
    let output = dir.path().join("fh.csv");
    let config = dir.path().join("cfg.json");
    let f = sample(Domain::Time);
    let mut buf = Vec::new();
    f.write_csv(&mut buf).unwrap();
    std::fs::write(&input, buf).unwrap();
    std::fs::write(
        &config,
        r#"{"schemaVersion": 1, "field": {"p": 3}, "grid": {"M": 1, "N": 1}}"#,
    )
    .unwrap();

    let missing_domain = run(&[
        "--config",
        config.to_str().unwrap(),
        "transform",
        input.to_str().unwrap(),
    ]);
    assert_eq!(missing_domain.status.code(), Some(2));

    let out = run(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        output.to_str().unwrap(),
        "transform",
        input.to_str().unwrap(),
        "--domain",
        "time",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let g = f.grid().dual();
    let text = std::fs::read_to_string(&output).unwrap();
    let fh = SampledFunction::read_csv(&g, Domain::Frequency, text.as_bytes()).unwrap();
    let want = lfgabor::transform::fourier_fast(&f).unwrap();
    assert!(fh.max_abs_diff(&want) <= 1e-15);
}

#[test]
fn bench_prints_one_row_per_size() {
    let out = run(&["bench", "--sizes", "4,16"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "D,naive_seconds,fast_seconds,speedup");
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("4,") && rows[2].starts_with("16,"));
    assert_eq!(run(&["bench", "--sizes", "6"]).status.code(), Some(2));
}
