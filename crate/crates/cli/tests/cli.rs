use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn chardy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chardy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn leech_problem(dir: &Path, scale: f64) -> String {
    // A(λ) = (1, λ), B = A·Σ₀ with Σ₀ = scale·[[0.3, 0.1], [0.2, -0.4]].
    let nodes = [0.1, -0.3, 0.5, 0.2];
    let sigma = [[0.3 * scale, 0.1 * scale], [0.2 * scale, -0.4 * scale]];
    let mut a = Vec::new();
    let mut b = Vec::new();
    for &l in &nodes {
        a.push(format!("[[1.0, 0.0], [{l}, 0.0]]"));
        let b0 = sigma[0][0] + l * sigma[1][0];
        let b1 = sigma[0][1] + l * sigma[1][1];
        b.push(format!("[[{b0}, 0.0], [{b1}, 0.0]]"));
    }
    let nodes: Vec<String> = nodes.iter().map(|l| format!("[{l}, 0.0]")).collect();
    let text = format!(
        "{{\"nodes\": [{}], \"A_row\": [{}], \"B_row\": [{}]}}",
        nodes.join(", "),
        a.join(", "),
        b.join(", ")
    );
    let path = dir.join(format!("problem-{scale}.json"));
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn fixture_passes_and_emits_json() {
    let o = chardy(&["fixture", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    let collapse = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "kernel_collapse")
        .unwrap();
    assert!(collapse["metric"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn normalization_two_fails_with_factor_two() {
    let o = chardy(&["fixture", "--normalization=2"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("rewritten_collapse"), "{err}");
    assert!(err.contains("factor-2.000000"), "{err}");
}

#[test]
fn fixture_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = chardy(&["fixture", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let first = fs::read(a.join("fixture.json")).unwrap();
    assert!(!first.is_empty());
    assert_eq!(first, fs::read(b.join("fixture.json")).unwrap());
}

#[test]
fn orbit_csv_has_two_l_plus_one_rows() {
    let o = chardy(&["orbit", "--gens", "cosh1,sinh1", "--L", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("word,length"));
    assert_eq!(lines.count(), 21);
    assert_eq!(text, stdout(&chardy(&["orbit", "--gens", "cosh1,sinh1", "--L", "10"])));
}

#[test]
fn orbit_depth_cap_is_a_usage_error() {
    assert_eq!(
        chardy(&["orbit", "--gens", "cosh1,sinh1", "--L", "17"]).status.code(),
        Some(2)
    );
    assert_eq!(
        chardy(&["orbit", "--gens", "cosh1,sinh1; cosh1,0.5+0.5i", "--L", "9"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# cyclic\ngens = cosh1,sinh1\nL = 3\n").unwrap();
    let o = chardy(&["orbit", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 8);
    // Flags override the file.
    let o = chardy(&["orbit", "--config", cfg.to_str().unwrap(), "--L", "1"]);
    assert_eq!(stdout(&o).lines().count(), 4);
    fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(
        chardy(&["orbit", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn multiplier_accepts_shift_and_rejects_double() {
    let o = chardy(&["multiplier", "--fixture", "trivial", "--s", "z", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    let o = chardy(&["multiplier", "--fixture", "trivial", "--s", "2z"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("multiplier_psd"));
}

#[test]
fn multiplier_usage_errors() {
    assert_eq!(chardy(&["multiplier"]).status.code(), Some(2));
    assert_eq!(chardy(&["multiplier", "--s", "z^"]).status.code(), Some(2));
    assert_eq!(
        chardy(&["multiplier", "--s", "z", "--fixture", "annulus"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        chardy(&["multiplier", "--s", "z", "--char", "1"]).status.code(),
        Some(2)
    );
}

#[test]
fn leech_emits_realization_with_residual() {
    let dir = tempfile::tempdir().unwrap();
    let input = leech_problem(dir.path(), 1.0);
    let o = chardy(&["leech", "--input", &input]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["residual"].as_f64().unwrap() <= 1e-8);
    let r = &v["realization"];
    assert_eq!(r["D"].as_array().unwrap().len(), 2);
    assert_eq!(r["k"], v["state_dim"]);
}

#[test]
fn infeasible_leech_reports_json_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let input = leech_problem(dir.path(), 5.0);
    let o = chardy(&["leech", "--input", &input]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "error");
    assert_eq!(v["command"], "leech");
    assert!(v["details"]["min_eig"].as_f64().unwrap() < 0.0);
}

#[test]
fn leech_rejects_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\"nodes\": 3}").unwrap();
    assert_eq!(
        chardy(&["leech", "--input", path.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(
        chardy(&["leech", "--input", "/nonexistent/p.json"]).status.code(),
        Some(2)
    );
}

#[test]
fn green_and_kernel_outputs() {
    let o = chardy(&["green", "--gens", "cosh1,sinh1", "--L", "6", "--grid-n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 17);
    let o = chardy(&["green", "--gens", "cosh1,sinh1", "--L", "6", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["elements"], 13);
    let o = chardy(&["kernel", "--grid-n", "3"]);
    assert_eq!(stdout(&o).lines().count(), 10);
    let o = chardy(&["kernel", "--json", "--normalization", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_subcommand_is_usage() {
    assert_eq!(chardy(&["bogus"]).status.code(), Some(2));
    assert_eq!(chardy(&["fixture", "--seed", "nope"]).status.code(), Some(2));
    assert_eq!(chardy(&["fixture", "--tol", "-1"]).status.code(), Some(2));
}
