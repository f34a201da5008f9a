use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pfoco(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfoco"))
        .args(args)
        .current_dir(cwd)
        .env("PFOCO_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn config(algorithms: &str, horizons: &str, seeds: &str) -> String {
    format!(
        r#"{{
  "problem": {{"kind": "matrix_completion", "m": 6, "n": 5, "b": 8}},
  "domain": {{"kind": "nuclear_ball", "radius": 2.0}},
  "algorithm": {algorithms},
  "T": {horizons},
  "beta": 0.1,
  "seeds": {seeds},
  "output_dir": "out",
  "benchmark": {{"iters": 200}}
}}
"#
    )
}

#[test]
fn run_writes_records_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), config(r#""pdmfw""#, "8", "[4]")).unwrap();
    let out = pfoco(&["run", "--config", "c.json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(dir.path().join("out/pdmfw_T8_seed4.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,f_val,g_val,lambda,x_hash");
    assert_eq!(lines.len(), 9);
    assert!(!csv.contains('\r'));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/pdmfw_T8_seed4.json")).unwrap()).unwrap();
    assert_eq!(summary["T"], 8);
    assert!(summary["regret"].is_number());

    let first = fs::read(dir.path().join("out/pdmfw_T8_seed4.csv")).unwrap();
    let again = pfoco(&["run", "--config", "c.json"], dir.path());
    assert!(again.status.success());
    assert_eq!(first, fs::read(dir.path().join("out/pdmfw_T8_seed4.csv")).unwrap());
}

#[test]
fn run_selects_one_cell_of_a_grid() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), config(r#"["alg1", "pdmfw"]"#, "[8, 16]", "[1, 2]")).unwrap();
    let ambiguous = pfoco(&["run", "--config", "c.json"], dir.path());
    assert_eq!(ambiguous.status.code(), Some(2));
    let out = pfoco(
        &["run", "--config", "c.json", "--algorithm", "alg1", "--T", "16", "--seed", "2"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/alg1_T16_seed2.csv").exists());
}

#[test]
fn sweep_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.json"),
        config(r#"["alg1", "pdmfw"]"#, "[64, 128, 256]", "[1, 2, 3]"),
    )
    .unwrap();
    let out = pfoco(&["sweep", "--config", "c.json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out_dir = dir.path().join("out");
    let summaries = fs::read_dir(&out_dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "json"))
        .count();
    assert_eq!(summaries, 18);
    let sweep = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 19);

    // The merged table has no timing column, so a rerun reproduces it.
    let again = pfoco(&["sweep", "--config", "c.json"], dir.path());
    assert!(again.status.success());
    assert_eq!(sweep, fs::read_to_string(out_dir.join("sweep.csv")).unwrap());

    let plot = pfoco(&["plot", "--input", "out/sweep.csv"], dir.path());
    assert!(plot.status.success(), "{}", String::from_utf8_lossy(&plot.stderr));
    for name in ["regret", "violation", "cumulative_violation"] {
        let svg = fs::read_to_string(out_dir.join(format!("{name}.svg"))).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("alg1") && svg.contains("pdmfw"));
    }
    assert!(fs::read_to_string(out_dir.join("regret.svg")).unwrap().contains("log-log"));
}

#[test]
fn malformed_config_exits_with_two_and_a_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let broken = config(r#""pdmfw""#, "8", "[4]").replace("\"beta\": 0.1,", "\"beta\": ,");
    fs::write(dir.path().join("c.json"), broken).unwrap();
    let out = pfoco(&["run", "--config", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 6"));

    let bad_domain = config(r#""pdmfw""#, "8", "[4]").replace("\"radius\": 2.0", "\"radius\": 0.5");
    fs::write(dir.path().join("d.json"), bad_domain).unwrap();
    let out = pfoco(&["sweep", "--config", "d.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn runtime_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = config(r#""pdmfw""#, "8", "[4]").replace("\"output_dir\"", "\"tape_path\": \"missing.tape\", \"output_dir\"");
    fs::write(dir.path().join("c.json"), text).unwrap();
    let out = pfoco(&["run", "--config", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tape_export_inspect_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), config(r#""pdmfw""#, "8", "[4]")).unwrap();
    let out = pfoco(
        &["tape", "export", "--config", "c.json", "--T", "12", "--seed", "4", "--output", "r.tape"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let inspect = pfoco(&["tape", "inspect", "r.tape"], dir.path());
    let header: serde_json::Value = serde_json::from_slice(&inspect.stdout).unwrap();
    assert_eq!(header["T"], 12);
    assert_eq!(header["m"], 6);

    assert!(pfoco(&["run", "--config", "c.json"], dir.path()).status.success());
    let generated = fs::read(dir.path().join("out/pdmfw_T8_seed4.csv")).unwrap();
    let replay = config(r#""pdmfw""#, "8", "[4]").replace("\"output_dir\": \"out\"", "\"tape_path\": \"r.tape\", \"output_dir\": \"replay\"");
    fs::write(dir.path().join("replay.json"), replay).unwrap();
    assert!(pfoco(&["run", "--config", "replay.json"], dir.path()).status.success());
    assert_eq!(generated, fs::read(dir.path().join("replay/pdmfw_T8_seed4.csv")).unwrap());
}
