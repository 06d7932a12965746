use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lie3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lie3")).args(args).output().expect("binary runs")
}

fn request(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr_error(o: &Output) -> Value {
    let v: Value = serde_json::from_slice(&o.stderr).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)));
    v["error"].clone()
}

#[test]
fn analyze_heis_lorentz() {
    let d = tempfile::tempdir().unwrap();
    let f = request(d.path(), "h.json", r#"{"algebra": {"family": "heis"}, "metric": [[1,0,0],[0,1,0],[0,0,-1]]}"#);
    let o = lie3(&["analyze", &f]);
    assert!(o.status.success());
    let v = stdout_json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["killing"]["killing_dim"], 4);
    assert_eq!(v["killing"]["isotropy_type"], "elliptic");
    assert_eq!(v["normal_form"]["rendered"], "(e1)^2+(e2)^2-(e3)^2");
}

#[test]
fn analyze_flat_r3() {
    let d = tempfile::tempdir().unwrap();
    let f = request(d.path(), "r.json", r#"{"algebra": {"family": "R3"}, "metric": [[1,0,0],[0,1,0],[0,0,1]]}"#);
    let v = stdout_json(&lie3(&["analyze", &f]));
    assert_eq!(v["killing"]["killing_dim"], 6);
    assert_eq!(v["curvature"]["constant_k"], 0.0);
}

#[test]
fn analyze_is_byte_identical_across_runs() {
    let d = tempfile::tempdir().unwrap();
    let f = request(
        d.path(),
        "s.json",
        r#"{"algebra": {"family": "sl2"}, "metric": [[1,0.2,0],[0.2,-2,0.5],[0,0.5,1]], "options": {"seed": 4}}"#,
    );
    let a = lie3(&["analyze", &f]);
    let b = lie3(&["analyze", &f]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn error_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"algebra": {"family": "R3"}, "metric": [[1,1,0],[0,1,0],[0,0,1]]}"#, 2, "DegenerateMetric"),
        (r#"{"algebra": {"family": "R3"}, "metric": [[1,0,0],[0,1,0]]}"#, 2, "InvalidInput"),
        (r#"{"algebra": {"family": "R3"}, "metric": [[-1,0,0],[0,-1,0],[0,0,1]]}"#, 2, "DegenerateMetric"),
        (
            r#"{"algebra": {"structure": [[[0,0,0],[0,0,1],[-1,0,0]],[[0,0,-1],[0,0,0],[1,0,0]],[[1,0,0],[-1,0,0],[0,0,0]]]}, "metric": [[1,0,0],[0,1,0],[0,0,1]]}"#,
            3,
            "NotJacobi",
        ),
        (
            r#"{"algebra": {"structure": [[[0,0,0],[0,0,1],[0,0,0]],[[0,0,1],[0,0,0],[0,0,0]],[[0,0,0],[0,0,0],[0,0,0]]]}, "metric": [[1,0,0],[0,1,0],[0,0,1]]}"#,
            2,
            "NotAntisymmetric",
        ),
    ];
    for (i, (body, code, kind)) in cases.iter().enumerate() {
        let f = request(d.path(), &format!("e{i}.json"), body);
        let o = lie3(&["analyze", &f]);
        assert_eq!(o.status.code(), Some(*code), "{body}");
        assert_eq!(stderr_error(&o)["kind"], *kind, "{body}");
    }
    let o = lie3(&["analyze", "/nonexistent/request.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn atlas_writes_three_files() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("atlas");
    let o = lie3(&["atlas", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t2: Value = serde_json::from_str(&std::fs::read_to_string(out.join("table2.json")).unwrap()).unwrap();
    let t3: Value = serde_json::from_str(&std::fs::read_to_string(out.join("table3.json")).unwrap()).unwrap();
    assert!(out.join("normal_forms.json").exists());
    assert_eq!(t2["rows"].as_array().unwrap().len(), 11);
    let rows = t3["rows"].as_array().unwrap();
    assert!(rows.iter().all(|r| r["family"] != "euc2"));
    let psh = rows.iter().find(|r| r["family"] == "psh").unwrap();
    assert_eq!(psh["isotropy"], "nilpotent");
    assert_eq!(psh["ideal"], true);
    assert_eq!(psh["derived"], "R2");
}

#[test]
fn probe_sol_plane_wave_finds_blowup_and_writes_csv() {
    let d = tempfile::tempdir().unwrap();
    let f = request(d.path(), "p.json", r#"{"algebra": {"family": "sol"}, "metric": [[0,0,1],[0,1,0],[1,0,0]]}"#);
    let csv = d.path().join("traj.csv");
    let o = lie3(&["probe", &f, "--horizon", "100", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let v = stdout_json(&o);
    assert_eq!(v["result"]["report"]["overall"], "blowup-detected");
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("t,v1,v2,v3,energy\n"));
    assert!(text.lines().count() > 10);
}

#[test]
fn probe_euc2_flat_lorentz_is_bounded() {
    let d = tempfile::tempdir().unwrap();
    let f = request(d.path(), "e.json", r#"{"algebra": {"family": "euc2"}, "metric": [[-1,0,0],[0,1,0],[0,0,1]]}"#);
    let v = stdout_json(&lie3(&["probe", &f]));
    assert_eq!(v["result"]["report"]["overall"], "bounded-to-horizon");
}

#[test]
fn probe_tolerance_out_of_range() {
    let d = tempfile::tempdir().unwrap();
    let f = request(d.path(), "r.json", r#"{"algebra": {"family": "R3"}, "metric": [[1,0,0],[0,1,0],[0,0,1]]}"#);
    let o = lie3(&["probe", &f, "--tol", "1e-3"]);
    assert_eq!(o.status.code(), Some(7));
    assert_eq!(stderr_error(&o)["kind"], "ToleranceUnachievable");
}

#[test]
fn global_flags_are_accepted() {
    let d = tempfile::tempdir().unwrap();
    let f = request(d.path(), "r.json", r#"{"algebra": {"family": "so3"}, "metric": [[1,0,0],[0,1,0],[0,0,2]]}"#);
    let o = lie3(&["--seed", "7", "--eps-jac", "1e-10", "--eps-rank", "1e-9", "analyze", &f]);
    assert!(o.status.success());
    let v = stdout_json(&o);
    assert_eq!(v["settings"]["seed"], 7);
    assert_eq!(v["settings"]["tolerances"]["eps_jac"], 1e-10);
}
