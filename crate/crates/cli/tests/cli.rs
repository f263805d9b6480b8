use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_mim");

fn mim(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Value of `key = value` in the command output.
fn field(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in:\n{out}"))
        .parse()
        .unwrap()
}

#[test]
fn compute_uniform_closed_form() {
    let o = mim(&["compute", "--dist", r#"{"probs":[0.5,0.5]}"#, "--omega", "2"]);
    assert!(o.status.success());
    assert!((field(&stdout(&o), "L") - 1.0).abs() < 1e-11);
}

#[test]
fn compute_focus_matches_direct_sum() {
    let o = mim(&["compute", "--dist", r#"{"probs":[0.2,0.8]}"#, "--focus", "0", "--terms"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let want = (0.2 * 4f64.exp() + 0.8 * 1f64.exp()).ln();
    assert!((field(&out, "L") - want).abs() < 1e-10);
    assert!(out.contains("0,0.2,"));
    assert!(out.lines().any(|l| l.starts_with("0,") && l.ends_with(",*")));
}

#[test]
fn compute_reads_distribution_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    std::fs::write(&path, r#"{"kind": "uniform", "n": 4}"#).unwrap();
    let o = mim(&["compute", "--dist", path.to_str().unwrap(), "--focus", "2"]);
    assert!(o.status.success());
    assert!((field(&stdout(&o), "L") - 3.0).abs() < 1e-11);
}

#[test]
fn compute_validation_exits_two() {
    for args in [
        vec!["compute", "--dist", r#"{"probs":[0,1]}"#, "--focus", "0"],
        vec!["compute", "--dist", r#"{"probs":[0.3,0.3]}"#, "--omega", "1"],
        vec!["compute", "--dist", r#"{"probs":[0.5,0.5]}"#, "--omega", "-1"],
        vec!["compute", "--dist", r#"{"probs":[0.5,0.5]}"#, "--focus", "2"],
        vec!["compute", "--dist", r#"{"probs":[0.5,0.5]}"#],
        vec!["compute", "--dist", "/no/such/file.json", "--omega", "1"],
        vec!["compute", "--dist", "{not json", "--omega", "1"],
    ] {
        assert_eq!(mim(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn select_single_p() {
    let o = mim(&["select", "--p", "0.1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let exact = field(&out, "exact");
    assert!((exact - 10.03).abs() < 0.005);
    assert!(exact > 4.0 && exact < 20.0);
    assert!((field(&out, "taylor") - 12.68).abs() < 0.005);
    assert!(field(&out, "residual") < 1e-8);
}

#[test]
fn select_interval_reports_bounds() {
    let o = mim(&["select", "--interval", "0.1", "0.4"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("bounds = [5, 20]"), "{out}");
    assert!((field(&out, "solved at p") - 0.1).abs() < 1e-15);
    assert!((field(&out, "exact") - 10.026355011754).abs() < 1e-9);
}

#[test]
fn select_exit_codes() {
    assert_eq!(mim(&["select", "--p", "0.5"]).status.code(), Some(3));
    assert_eq!(mim(&["select", "--p", "0.7"]).status.code(), Some(3));
    assert_eq!(mim(&["select", "--p", "0"]).status.code(), Some(2));
    assert_eq!(mim(&["select", "--p", "1.2"]).status.code(), Some(2));
    assert_eq!(mim(&["select", "--interval", "0.3", "0.2"]).status.code(), Some(2));
    assert_eq!(mim(&["select", "--interval", "0.1", "0.5"]).status.code(), Some(2));
    assert_eq!(mim(&["select", "--p", "0.1", "--interval", "0.1", "0.2"]).status.code(), Some(2));
}

fn summary(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn simulate_tracks_exact_probability() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let o = mim(&[
        "simulate", "--M", "100", "--p1", "0.3", "--eps", "0.1", "--batches", "1000x10", "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let s = summary(&o);
    assert_eq!(s["seed"], 20170001);
    let exact = s["exact_event_probability"].as_f64().unwrap();
    assert!((exact - 0.037451429245794).abs() < 1e-12);
    assert!(s["final_z_score"].as_f64().unwrap().abs() <= 3.0);
    assert_eq!(s["sandwich"]["violations"].as_array().unwrap().len(), 0);
    let table = std::fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("i,delta_n,delta_N,n,N,p_hat,L_hat"));
    assert_eq!(lines.count(), 10);
}

#[test]
fn simulate_impossible_event() {
    let o = mim(&["simulate", "--M", "50", "--p1", "0.3", "--eps", "2", "--batches", "20,30"]);
    assert!(o.status.success());
    let table = stdout(&o);
    for line in table.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[1], "0");
        assert_eq!(cols[5], "0");
        assert_eq!(cols[6], "");
    }
    let s: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(s["final_l_hat"].is_null());
    assert_eq!(s["exact_event_probability"], 0.0);
}

#[test]
fn simulate_model_json_and_seed_echo() {
    let model = r#"{"probs":[0.3,0.7],"M":100,"epsilon":0.1}"#;
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let json = dir.path().join("s.json");
    let o = mim(&[
        "simulate", "--model", model, "--batches", "100x3", "--seed", "42", "--out",
        csv.to_str().unwrap(), "--summary", json.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&json).unwrap();
    let s: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(s["seed"], 42);
    assert_eq!(s["total_sequences"], 300);
    assert!(text.starts_with("{\n  \"seed\": 42,\n  \"sequence_len\": 100,"), "{text}");
}

#[test]
fn simulate_validation_exits_two() {
    for args in [
        vec!["simulate", "--M", "100", "--p1", "0.3", "--eps", "0.1", "--batches", "0x3"],
        vec!["simulate", "--M", "100", "--p1", "0.3", "--eps", "0.1", "--batches", "ten"],
        vec!["simulate", "--M", "0", "--p1", "0.3", "--eps", "0.1", "--batches", "10"],
        vec!["simulate", "--M", "100", "--p1", "1.3", "--eps", "0.1", "--batches", "10"],
        vec!["simulate", "--M", "100", "--p1", "0.3", "--eps", "-1", "--batches", "10"],
        vec!["simulate", "--p1", "0.3", "--eps", "0.1", "--batches", "10"],
        vec!["simulate", "--model", r#"{"probs":[0.3,0.7],"M":100}"#, "--batches", "10"],
    ] {
        assert_eq!(mim(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn verify_reports_and_exit_codes() {
    let o = mim(&["verify", "select", "--grid", "0.02:0.45:0.01"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("PASS select_residual"));
    assert!(out.contains("PASS select_decreasing"));
    assert!(out.ends_with("result: PASS (7 of 7 checks passed)\n"));

    // p = 0.5 has no bracketed root
    let o = mim(&["verify", "select", "--grid", "0.3:0.5:0.1"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("FAIL select_residual"), "{out}");
    assert!(out.contains("p=0.5"), "{out}");
    assert_eq!(mim(&["verify", "select", "--grid", "0.1:0.2"]).status.code(), Some(2));
    assert_eq!(mim(&["verify", "nonsense"]).status.code(), Some(2));
}

#[test]
fn verify_properties_small_run() {
    let o = mim(&["verify", "properties", "--samples", "50", "--seed", "3"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("suite properties (seed 3)\n"));
    assert_eq!(out.matches("  PASS ").count(), 6);
}

#[test]
fn figures_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = mim(&["figures", "fig3", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let zeros = std::fs::read_to_string(dir.path().join("fig3_zeros.csv")).unwrap();
    let row = zeros.lines().find(|l| l.starts_with("0.1,")).unwrap();
    let w: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((w - 10.03).abs() < 0.005);
    assert!(!dir.path().join("fig1.csv").exists());

    let o = mim(&["figures", "fig1", "--out", dir.path().to_str().unwrap(), "--binomial-n", "4"]);
    assert!(o.status.success());
    let fig1 = std::fs::read_to_string(dir.path().join("fig1.csv")).unwrap();
    assert_eq!(fig1.lines().next(), Some("distribution,j,p_j,omega_j,l_j"));
    assert_eq!(fig1.lines().filter(|l| l.contains("binomial")).count(), 5);
}

#[test]
fn figures_validation() {
    let file = tempfile::NamedTempFile::new().unwrap();
    let inside = file.path().join("sub");
    assert_eq!(mim(&["figures", "fig1", "--out", inside.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(mim(&["figures", "fig1", "--binomial-theta", "1.5"]).status.code(), Some(2));
    assert_eq!(mim(&["figures", "fig9"]).status.code(), Some(2));
}

#[test]
fn help_documents_default_seed() {
    let o = mim(&["simulate", "--help"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("20170001"));
}
