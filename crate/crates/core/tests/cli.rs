use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: [&str; 4] = ["--set", "gen.n_requests=1500", "--set", "gen.cardinality=50"];

fn ctxctr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctxctr")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = ctxctr(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn with_small<'a>(args: &[&'a str]) -> Vec<&'a str> {
    let mut v = args.to_vec();
    v.extend(SMALL);
    v
}

fn json_tail(stdout: &str) -> Value {
    serde_json::from_str(stdout.lines().last().unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(ctxctr(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ctxctr(&["gen", "--threads", "many"]).status.code(), Some(1));
    assert_eq!(ctxctr(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_config_exits_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let res = ctxctr(&["experiment", "--config", "/no/such/file.cfg", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&res.stderr).trim()).unwrap();
    assert_eq!(err["error"], "config");
    assert!(!out.exists());
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "gen.n_request = 5\n").unwrap();
    let res = ctxctr(&["gen", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("unknown key"));
}

#[test]
fn gen_is_deterministic_and_sized() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let stdout = ok(&with_small(&["gen", a.to_str().unwrap(), "--seed", "7", "--out", d]));
    ok(&with_small(&["gen", b.to_str().unwrap(), "--seed", "7", "--out", d]));
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    assert_eq!(text.iter().filter(|&&c| c == b'\n').count(), 1500 * 4);
    assert!(stdout.contains("n_requests 1500"));
    let ctr: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("empirical_ctr "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((0.17..=0.23).contains(&ctr), "{ctr}");
    assert!(dir.path().join("resolved_config.txt").exists());
}

#[test]
fn default_generator_ctr_is_near_target() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let stdout = ok(&["gen", "--out", d]);
    let ctr: f64 = stdout.lines().find_map(|l| l.strip_prefix("empirical_ctr ")).unwrap().parse().unwrap();
    assert!((0.185..=0.215).contains(&ctr), "{ctr}");
}

#[test]
fn trained_model_beats_intercept_only() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.jsonl");
    let log_s = log.to_str().unwrap();
    let ffm = dir.path().join("ffm");
    let icpt = dir.path().join("icpt");
    ok(&with_small(&["gen", log_s, "--out", dir.path().to_str().unwrap()]));
    let before = fs::read(&log).unwrap();

    ok(&with_small(&["train", log_s, "--out", ffm.to_str().unwrap()]));
    let r_ffm = json_tail(&ok(&with_small(&["eval", log_s, "--out", ffm.to_str().unwrap()])))["rig"]
        .as_f64()
        .unwrap();
    let intercept = ["--set", "main.kind=intercept", "--set", "ctx.mode=baseline"];
    let mut train = with_small(&["train", log_s, "--out", icpt.to_str().unwrap()]);
    train.extend(intercept);
    ok(&train);
    let mut eval = with_small(&["eval", log_s, "--out", icpt.to_str().unwrap()]);
    eval.extend(intercept);
    let r_icpt = json_tail(&ok(&eval))["rig"].as_f64().unwrap();
    assert!(r_ffm > r_icpt, "{r_ffm} <= {r_icpt}");
    assert!(r_icpt.abs() < 0.05);
    assert_eq!(fs::read(&log).unwrap(), before, "input log was modified");
    assert!(ffm.join("main.ckpt").exists() && ffm.join("ctx.ckpt").exists());
}

#[test]
fn eval_rejects_mismatched_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let log = dir.path().join("log.jsonl");
    let other = dir.path().join("other.jsonl");
    ok(&with_small(&["gen", log.to_str().unwrap(), "--out", d]));
    let mut gen_other = with_small(&["gen", other.to_str().unwrap(), "--out", d]);
    gen_other.extend(["--set", "gen.n_item_fields=3"]);
    ok(&gen_other);
    ok(&with_small(&["train", log.to_str().unwrap(), "--out", d]));
    let res = ctxctr(&with_small(&["eval", other.to_str().unwrap(), "--out", d]));
    assert_eq!(res.status.code(), Some(2));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&res.stderr).trim()).unwrap();
    assert_eq!(err["error"], "schema_mismatch");
    let res = ctxctr(&with_small(&["eval", log.to_str().unwrap(), "--out", dir.path().join("none").to_str().unwrap()]));
    assert_eq!(res.status.code(), Some(2));
}

fn serve(dir: &Path, candidates: &str) -> Value {
    let d = dir.to_str().unwrap();
    let log = dir.join(format!("c{candidates}.jsonl"));
    let set = format!("gen.candidates_per_request={candidates}");
    let mut gen = with_small(&["gen", log.to_str().unwrap(), "--out", d]);
    gen.extend(["--set", &set]);
    ok(&gen);
    json_tail(&ok(&with_small(&["serve-sim", log.to_str().unwrap(), "--out", d])))
}

#[test]
fn serve_sim_amortizes_the_context_model() {
    let dir = tempfile::tempdir().unwrap();
    let one = serve(dir.path(), "1");
    let eight = serve(dir.path(), "8");
    assert_eq!(one["counters"]["ctx_evals"], eight["counters"]["ctx_evals"]);
    assert_eq!(one["counters"]["ctx_evals"], 1500);
    assert!(eight["ctx_flops_share"].as_f64().unwrap() < one["ctx_flops_share"].as_f64().unwrap());

    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let s = json_tail(&ok(&["serve-sim", empty.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]));
    assert_eq!(s["counters"]["requests"], 0);
    assert_eq!(s["counters"]["ctx_evals"], 0);
}

fn experiment(out: &Path, extra: &[&str]) {
    let mut args = with_small(&["experiment", "--out", out.to_str().unwrap()]);
    args.extend(extra);
    ok(&args);
}

#[test]
fn experiment_files_and_echoed_config_reproduce() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    experiment(&first, &["--set", "plan.seeds=1,2"]);
    for name in ["report.csv", "report_seeds.csv", "daily_lifts.csv", "counters.json", "table.txt", "resolved_config.txt"] {
        assert!(first.join(name).exists(), "{name} missing");
    }
    let report = fs::read_to_string(first.join("report.csv")).unwrap();
    assert!(report.starts_with("mode,rig,rig_lift_pct,flops_per_ad,flops_per_request,flops_change_pct,auc,n"));
    assert_eq!(report.lines().count(), 4);
    let daily = fs::read_to_string(first.join("daily_lifts.csv")).unwrap();
    assert!(daily.starts_with("chunk_index,lift_pct"));
    assert_eq!(daily.lines().filter(|l| l.starts_with(|c: char| c.is_ascii_digit())).count(), 6);

    let table = fs::read_to_string(first.join("table.txt")).unwrap();
    let rows: Vec<&str> = table.lines().filter(|l| l.contains('%')).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let cells: Vec<&str> = row.split('|').skip(1).map(str::trim).collect();
        assert!(cells.iter().all(|c| (c.starts_with('+') || c.starts_with('-')) && c.ends_with('%')), "{row}");
    }

    // the echo carries the output directory, so point it elsewhere
    let echoed = fs::read_to_string(first.join("resolved_config.txt")).unwrap();
    let second = dir.path().join("second");
    let cfg = dir.path().join("echo.cfg");
    fs::write(&cfg, echoed.replace(&format!("out = {}", first.display()), &format!("out = {}", second.display()))).unwrap();
    ok(&["experiment", "--config", cfg.to_str().unwrap()]);
    for name in ["report.csv", "report_seeds.csv", "daily_lifts.csv", "table.txt"] {
        assert_eq!(fs::read(first.join(name)).unwrap(), fs::read(second.join(name)).unwrap(), "{name}");
    }

    let printed = ok(&["report", first.to_str().unwrap()]);
    assert!(printed.contains("Add alongside context fields") && printed.contains("mean"));
}

#[test]
fn baseline_only_table_is_one_row_of_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    experiment(&out, &["--set", "plan.variants=baseline", "--seed", "3"]);
    let table = fs::read_to_string(out.join("table.txt")).unwrap();
    let rows: Vec<&str> = table.lines().filter(|l| l.contains('%')).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].matches("+0.00%").count(), 3, "{}", rows[0]);
    assert!(table.contains("mean of 1 seeds"));
}

#[test]
fn strict_ts_rejects_unordered_logs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let log = dir.path().join("log.jsonl");
    ok(&with_small(&["gen", log.to_str().unwrap(), "--out", d]));
    let text = fs::read_to_string(&log).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.swap(0, 40);
    let shuffled = dir.path().join("shuffled.jsonl");
    fs::write(&shuffled, lines.join("\n") + "\n").unwrap();
    let res = ctxctr(&with_small(&["train", shuffled.to_str().unwrap(), "--out", d, "--strict-ts"]));
    assert_eq!(res.status.code(), Some(2));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&res.stderr).trim()).unwrap();
    assert_eq!(err["error"], "timestamp_order");
}
