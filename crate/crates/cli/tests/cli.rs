use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qnmlab(args: &[&str], dir: &Path, seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qnmlab"));
    cmd.args(args).current_dir(dir).env_remove("QNMLAB_SEED");
    if let Some(s) = seed_env {
        cmd.env("QNMLAB_SEED", s);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run_config(body: &str, extra: &[&str], seed_env: Option<&str>) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cfg.json", body);
    let mut args = vec!["run", cfg.to_str().unwrap()];
    args.extend_from_slice(extra);
    (qnmlab(&args, dir.path(), seed_env), dir)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn passing_run_exits_zero_and_writes_one_line() {
    let (o, _d) = run_config(r#"{"experiment": "secrecy-1design", "seed": 3}"#, &["-q"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["experiment"], "secrecy-1design");
    assert_eq!(v["seed"], 3);
    assert_eq!(v["pass"], true);
    assert!(v["runtime_ms"].is_null());
}

#[test]
fn failed_check_exits_one() {
    let (o, _d) = run_config(r#"{"experiment": "qotp-malleable", "seed": 3}"#, &[], None);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], false);
    assert!(stderr(&o).contains("FAIL"), "{}", stderr(&o));
}

#[test]
fn malformed_config_names_the_field() {
    let (o, _d) = run_config(r#"{"experiment": "secrecy-1design", "seed": "three"}"#, &[], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));

    let (o, _d) = run_config(r#"{"experiment": "secrecy-1design", "seed": 1, "sead": 2}"#, &[], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sead"), "{}", stderr(&o));

    let (o, _d) = run_config(r#"{"experiments": [{"experiment": "its-iff-ind", "seed": 1, "scheme": {"kind": "qotp"}}]}"#, &[], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("experiments[0].scheme"), "{}", stderr(&o));

    let (o, _d) = run_config(r#"{"experiment": "nm-2design", "seed": 1, "tolerances": {"abw": 0.1}}"#, &[], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("tolerances.abw"), "{}", stderr(&o));

    let (o, _d) = run_config(r#"{"experiment": "nm-2design", "seed": 1, "tolerances": {"nm-gain": -1.0}}"#, &[], None);
    assert_eq!(o.status.code(), Some(2));

    let (o, _d) = run_config(r#"{"experiment": "nm-2design", "seed": 1, "states": {"count": 0}}"#, &[], None);
    assert_eq!(o.status.code(), Some(2));

    let (o, _d) = run_config("{not json", &[], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnmlab(&["run", "nope.json"], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_seed_is_rejected_unless_overridden() {
    let body = r#"{"experiment": "secrecy-1design"}"#;
    let (o, _d) = run_config(body, &[], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));

    let (o, _d) = run_config(body, &["-q"], Some("77"));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["seed"], 77);

    let (o, _d) = run_config(body, &[], Some("seventy"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_env_overrides_config_seed() {
    let body = r#"{"experiment": "nm-2design", "seed": 1, "states": {"count": 2}}"#;
    let (a, _d) = run_config(body, &["-q"], Some("9"));
    let (b, _d) = run_config(&body.replace("\"seed\": 1", "\"seed\": 9"), &["-q"], None);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn unknown_experiment_exits_three() {
    let (o, _d) = run_config(r#"{"experiment": "nm-3design", "seed": 1}"#, &[], None);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("nm-3design"));
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qnmlab(&["describe", "nm-3design"], dir.path(), None).status.code(), Some(3));
}

#[test]
fn invalid_combinations_exit_four() {
    for body in [
        // fixed-scheme experiment with a scheme override
        r#"{"experiment": "qotp-malleable", "seed": 1, "scheme": {"kind": "clifford", "qubits": 1}}"#,
        // tagged-only experiment on an untagged scheme
        r#"{"experiment": "gyz-2design", "seed": 1, "scheme": {"kind": "qotp", "qubits": 1}}"#,
        // unknown attack
        r#"{"experiment": "nm-2design", "seed": 1, "attacks": ["teleport"]}"#,
    ] {
        let (o, _d) = run_config(body, &[], None);
        assert_eq!(o.status.code(), Some(4), "{body}: {}", stderr(&o));
    }
}

#[test]
fn a_bad_entry_stops_the_batch_before_anything_runs() {
    let body = r#"{"experiments": [
        {"experiment": "secrecy-1design", "seed": 1},
        {"experiment": "nm-2design", "seed": 1, "attacks": ["teleport"]}
    ], "output": "out.jsonl"}"#;
    let (o, d) = run_config(body, &[], None);
    assert_eq!(o.status.code(), Some(4));
    assert!(!d.path().join("out.jsonl").exists());
}

#[test]
fn output_is_byte_identical_and_ordered_regardless_of_parallelism() {
    let body = r#"{"experiments": [
        {"experiment": "twirl-lemmas", "seed": 5},
        {"experiment": "secrecy-1design", "seed": 5},
        {"experiment": "nm-2design", "seed": 5, "states": {"count": 3}},
        {"experiment": "secrecy-1design", "seed": 6},
        {"experiment": "characterization", "seed": 5}
    ], "output": "v.jsonl"}"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "batch.json", body);
    let mut files = Vec::new();
    for (i, par) in ["1", "4", "4"].iter().enumerate() {
        let out = format!("v{i}.jsonl");
        let o = qnmlab(&["run", "-q", "--parallel", par, "-o", &out, cfg.to_str().unwrap()], dir.path(), None);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        files.push(std::fs::read_to_string(dir.path().join(out)).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[1], files[2]);
    let order: Vec<(String, u64)> = files[0]
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            (v["experiment"].as_str().unwrap().to_string(), v["seed"].as_u64().unwrap())
        })
        .collect();
    let names: Vec<&str> = order.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["characterization", "nm-2design", "secrecy-1design", "secrecy-1design", "twirl-lemmas"]);
    assert_eq!(order[2].1, 5);
    assert_eq!(order[3].1, 6);

    // the config's own output path is used when -o is absent
    let o = qnmlab(&["run", cfg.to_str().unwrap()], dir.path(), None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(dir.path().join("v.jsonl")).unwrap(), files[0]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("twirl-lemmas"));
}

#[test]
fn timings_fill_runtime() {
    let (o, _d) = run_config(r#"{"experiment": "secrecy-1design", "seed": 3}"#, &["-q", "--timings"], None);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["runtime_ms"].is_u64());
}

#[test]
fn inputs_digest_tracks_inputs_not_output_path() {
    let (a, _d) = run_config(r#"{"experiment": "secrecy-1design", "seed": 3}"#, &["-q"], None);
    let (b, _d) = run_config(r#"{"experiment": "secrecy-1design", "seed": 4}"#, &["-q"], None);
    let (c, _d) = run_config(r#"{"experiment": "secrecy-1design", "seed": 3, "output": "x.jsonl"}"#, &["-q", "-o", "/dev/stdout"], None);
    let digest = |o: &Output| {
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["inputs_digest"].as_str().unwrap().to_string()
    };
    assert_ne!(digest(&a), digest(&b));
    assert_eq!(digest(&a), digest(&c));
}

#[test]
fn list_and_describe() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnmlab(&["list"], dir.path(), None);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 13);
    for name in ["gyz-2design", "injection-separation", "werner-holevo-sideinfo"] {
        assert!(text.contains(name));
    }
    let o = qnmlab(&["describe", "dns-from-nm"], dir.path(), None);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("dns-residual"), "{text}");
}
