use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_gaitforge");

fn gaitforge(config_dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("GAITFORGE_CONFIG_DIR", config_dir).output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// A config dir whose `queen` and `leaper` have a 40-step horizon, written
/// through `export-spec` so the TOML path is exercised too.
fn short_configs() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for name in ["queen", "leaper"] {
        let path = dir.path().join(format!("{name}.toml"));
        ok(&gaitforge(dir.path(), &["export-spec", "--morph", name, "--out", path.to_str().unwrap()]));
        let text = std::fs::read_to_string(&path).unwrap().replace("horizon = 1000", "horizon = 40");
        std::fs::write(&path, text).unwrap();
    }
    dir
}

#[test]
fn list_shows_every_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&gaitforge(dir.path(), &["list"]));
    for (name, obs) in [("queen", 199), ("bastion", 151), ("tick", 199), ("leaper", 163)] {
        let line = text.lines().find(|l| l.starts_with(name)).unwrap();
        assert!(line.ends_with(&format!("obs {obs}")), "{line}");
    }
}

#[test]
fn run_cpg_writes_report_with_config_dir_override() {
    let dir = short_configs();
    let csv = dir.path().join("report.csv");
    let text =
        ok(&gaitforge(dir.path(), &["run-cpg", "--morph", "queen", "--episodes", "3", "--seeds", "2,4", "--out", csv.to_str().unwrap()]));
    assert!(text.contains("seed    5"), "{text}");
    let body = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines[0], "step,mean_return,std_return,morphology,policy_name");
    assert_eq!(lines.len(), 2);
    // three 40-step episodes from the overriding config
    assert!(lines[1].starts_with("120,"), "{}", lines[1]);
}

#[test]
fn record_then_verify_buffer() {
    let dir = short_configs();
    let buf = dir.path().join("b.gfb");
    let text = ok(&gaitforge(dir.path(), &["record", "--morph", "leaper", "--transitions", "90", "--out", buf.to_str().unwrap()]));
    assert!(text.contains("90 transitions from 3 episodes"), "{text}");
    let text = ok(&gaitforge(dir.path(), &["verify-buffer", buf.to_str().unwrap()]));
    assert!(text.starts_with("ok: 90 transitions in 3 episodes"), "{text}");

    // a different config for the same name no longer matches the recording
    let other = tempfile::tempdir().unwrap();
    let out = gaitforge(other.path(), &["verify-buffer", buf.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema mismatch at byte 32"));

    let bytes = std::fs::read(&buf).unwrap();
    std::fs::write(&buf, &bytes[..bytes.len() - 100]).unwrap();
    let out = gaitforge(dir.path(), &["verify-buffer", buf.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("at byte"));
}

#[test]
fn eval_with_external_server_matches_zero_policy() {
    let dir = short_configs();
    let csv = dir.path().join("eval.csv");
    let csv_s = csv.to_str().unwrap();
    ok(&gaitforge(dir.path(), &["eval", "--morph", "queen", "--policy", "zero", "--episodes", "2", "--out", csv_s]));
    ok(&gaitforge(
        dir.path(),
        &["eval", "--morph", "queen", "--policy", "extern", "--episodes", "2", "--out", csv_s, "--cmd", BIN, "serve-constant"],
    ));
    let body = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<Vec<&str>> = body.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    // step, mean and std agree; only the policy name differs
    assert_eq!(rows[0][..4], rows[1][..4]);
    assert_eq!(rows[0][4], "zero");
    assert!(rows[1][4].starts_with("extern:"));
}

#[test]
fn dump_replay_writes_json_lines() {
    let dir = short_configs();
    let out = dir.path().join("replay.jsonl");
    ok(&gaitforge(dir.path(), &["dump-replay", "--morph", "leaper", "--seed", "1", "--out", out.to_str().unwrap()]));
    let text = std::fs::read_to_string(&out).unwrap();
    // header, reset frame and one frame per step
    assert_eq!(text.lines().count(), 42);
    for line in text.lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = gaitforge(dir.path(), &["run-cpg", "--morph", "centipede"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown morphology `centipede`"));
    let out = gaitforge(dir.path(), &["eval", "--morph", "tick", "--policy", "extern"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--cmd"));
}
