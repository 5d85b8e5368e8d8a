use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

fn wepolicy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wepolicy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(cmd: &str, scenario: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        cmd,
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    wepolicy(&args)
}

fn write_scenario(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("scenario.json");
    fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn surface_hits_the_loss_asymptote() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run_in("surface", &fixture("fig2.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("surface.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x_n,x_w,W"));
    let cell = lines.find(|l| l.starts_with("-20,-20,")).unwrap();
    let w: f64 = cell.rsplit(',').next().unwrap().parse().unwrap();
    assert!((w + 2.0).abs() <= 1e-6);
    assert_eq!(text.lines().count(), 1 + 201 * 201);
    assert!(out.join("curve.csv").exists());

    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["command"], "surface");
    assert_eq!(report["scenario_digest"].as_str().unwrap().len(), 64);
    assert_eq!(report["outputs"].as_array().unwrap().len(), 2);
    assert!(report["wall_time_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn json_format_flag_switches_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run_in(
        "sweep",
        &fixture("pipeline/scenario.json"),
        &out,
        &["--format", "json"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Vec<serde_json::Value> =
        serde_json::from_slice(&fs::read(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(rows.len(), 27);
    assert_eq!(rows[5]["policy_id"], 5);
    assert!(!out.join("sweep.csv").exists());
}

#[test]
fn consensus_fixture_holds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run_in("consensus-check", &fixture("consensus.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("consensus.json")).unwrap()).unwrap();
    assert_eq!(report["holds"], true);
    assert_eq!(report["probes"], 100);
}

#[test]
fn select_matches_a_brute_force_scan() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let scenario = fixture("pipeline/scenario.json");
    let o = run_in("select", &scenario, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let selection: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("selection.json")).unwrap()).unwrap();

    let fit = run_in("fit", &scenario, &out, &[]);
    assert_eq!(fit.status.code(), Some(0));
    let model: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("model.json")).unwrap()).unwrap();
    let baseline: Vec<f64> =
        serde_json::from_slice(&fs::read(out.join("aggregate.json")).unwrap()).unwrap();
    let sweep = run_in("sweep", &scenario, &out, &[]);
    assert_eq!(sweep.status.code(), Some(0));
    let table = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<Vec<f64>> = table
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 27);

    let spec: serde_json::Value = serde_json::from_slice(&fs::read(&scenario).unwrap()).unwrap();
    let intercept = model["intercept"].as_f64().unwrap();
    let coefs: Vec<f64> = model["coefficients"]
        .as_object()
        .unwrap()
        .values()
        .map(|v| v.as_f64().unwrap())
        .collect();
    for profile in spec["weighting_profiles"].as_array().unwrap() {
        let m: Vec<Vec<f64>> =
            serde_json::from_value(profile["coupling"]["matrix"].clone()).unwrap();
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for row in &rows {
            let facts = &row[4..7];
            let mut w = intercept;
            for i in 0..3 {
                let shift: f64 = (0..3).map(|j| m[i][j] * facts[j]).sum();
                w += coefs[i] * (baseline[i] + shift);
            }
            if w > best.0 {
                best = (w, row[0] as usize);
            }
        }
        let name = profile["name"].as_str().unwrap();
        assert_eq!(selection[name].as_u64().unwrap() as usize, best.1, "{name}");
    }
}

#[test]
fn missing_scenario_is_an_io_error_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run_in("fit", &dir.path().join("absent.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
    assert!(!out.exists());
}

#[test]
fn failed_runs_leave_existing_directories_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    fs::create_dir(&out).unwrap();
    fs::write(out.join("keep.txt"), "x").unwrap();
    // the surface fixture has no dynamics section
    let o = run_in("sweep", &fixture("fig2.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("dynamics"));
    let names: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names.len(), 1);
}

#[test]
fn rank_deficient_survey_exits_with_numerical_code() {
    let dir = tempfile::tempdir().unwrap();
    // two constructs read the same question, so their columns coincide
    let csv = "respondent,q1,q2,q3\nr1,1,2,3\nr2,2,2,4\nr3,3,1,2\nr4,4,3,5\nr5,5,4,1\n";
    fs::write(dir.path().join("survey.csv"), csv).unwrap();
    let scenario = write_scenario(
        dir.path(),
        r#"{"survey": {"source": {"file": "survey.csv"}, "scale": 5, "wellbeing_question": "q3",
            "construct_map": [[1, 0], [1, 0]]}}"#,
    );
    let out = dir.path().join("out");
    let o = run_in("fit", &scenario, &out, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("x_w2"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn validate_reports_named_fields() {
    let dir = tempfile::tempdir().unwrap();
    let bad_weights = write_scenario(
        dir.path(),
        r#"{"value_functions": {"v": {"kind": "asymmetric"}},
            "layers": [{"scope": "I", "value_function": "v", "weight": 0.5},
                       {"scope": "world", "value_function": "v", "weight": 0.4}]}"#,
    );
    let o = wepolicy(&["validate", "--scenario", bad_weights.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("layers"), "{}", stderr(&o));

    let coupling = write_scenario(
        dir.path(),
        r#"{"element_sets": [
                {"name": "X_w", "variables": [{"name": "a"}, {"name": "b"}]},
                {"name": "X_c", "variables": [{"name": "economic"}, {"name": "environmental"}, {"name": "social"}]}],
            "fact_coupling": {"mode": "additive", "matrix": [[0, 0, 0], [0, 0, 0]]}}"#,
    );
    let o = wepolicy(&["validate", "--scenario", coupling.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let unknown = write_scenario(
        dir.path(),
        r#"{
  "value_functions": {"v": {"kind": "family", "family": "cubic", "a": 1}}
}"#,
    );
    let o = wepolicy(&["validate", "--scenario", unknown.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    assert!(
        msg.contains("value_functions") && msg.contains("line 2"),
        "{msg}"
    );
}

#[test]
fn unknown_command_and_bad_flags_exit_one() {
    assert_eq!(wepolicy(&["bogus"]).status.code(), Some(1));
    assert_eq!(wepolicy(&["sweep"]).status.code(), Some(1));
    assert_eq!(wepolicy(&["--help"]).status.code(), Some(0));
}

#[test]
fn reruns_are_byte_identical_and_seed_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = fixture("pipeline/scenario.json");
    let (a, b, c) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("c"),
    );
    for out in [&a, &b] {
        assert_eq!(run_in("sweep", &scenario, out, &[]).status.code(), Some(0));
    }
    assert_eq!(
        fs::read(a.join("sweep.csv")).unwrap(),
        fs::read(b.join("sweep.csv")).unwrap()
    );

    let o = run_in("sweep", &scenario, &c, &["--seed", "99"]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["seed"], 99);
    assert_ne!(
        fs::read(a.join("sweep.csv")).unwrap(),
        fs::read(c.join("sweep.csv")).unwrap()
    );
}

#[test]
fn digest_tracks_file_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture("fig2.json")).unwrap();
    let p = write_scenario(dir.path(), &text);
    let digest = |p: &Path| {
        let o = wepolicy(&["validate", "--scenario", p.to_str().unwrap()]);
        let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        r["scenario_digest"].as_str().unwrap().to_string()
    };
    let first = digest(&p);
    assert_eq!(first, digest(&p));
    fs::write(&p, format!("{text} ")).unwrap();
    assert_ne!(first, digest(&p));
}

#[test]
fn impact_uses_the_selected_policy() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let scenario = fixture("pipeline/scenario.json");
    assert_eq!(
        run_in("select", &scenario, &out, &[]).status.code(),
        Some(0)
    );
    assert_eq!(
        run_in("impact", &scenario, &out, &[]).status.code(),
        Some(0)
    );
    let sel: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("selection.json")).unwrap()).unwrap();
    let imp: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("impact.json")).unwrap()).unwrap();
    assert_eq!(imp["selected_policy"], sel["balanced"]);
    assert!(imp["impacts"]["regional_wellbeing"]
        .as_f64()
        .unwrap()
        .is_finite());
}

#[test]
fn network_command_writes_value_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run_in("network", &fixture("pipeline/scenario.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("network.json")).unwrap()).unwrap();
    // income 0.1 → security 0.06 → health 0.03, plus renewables 0.05 · 0.1
    assert!((v["health"].as_f64().unwrap() - 0.035).abs() < 1e-15);
    assert!((v["environment_care"].as_f64().unwrap() - 0.04).abs() < 1e-15);
    assert_eq!(v["community_ties"].as_f64().unwrap(), 0.0);
}
