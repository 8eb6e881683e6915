use std::path::Path;
use std::process::{Command, Output};

fn indexlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_indexlab")).args(args).current_dir(dir).env_remove("INDEXLAB_OUT_DIR").output().unwrap()
}

fn run_config(dir: &Path, config: &str, extra: &[&str]) -> Output {
    std::fs::write(dir.join("c.json"), config).unwrap();
    let mut args = vec!["run", "--config", "c.json", "--out", "out"];
    args.extend_from_slice(extra);
    indexlab(&args, dir)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn lists_and_describes_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let o = indexlab(&["list-scenarios"], dir.path());
    assert!(o.status.success());
    let names: Vec<String> = String::from_utf8(o.stdout).unwrap().lines().map(String::from).collect();
    assert_eq!(names, ["sf", "relind", "index1d", "cutpaste", "callias", "tower", "appendix", "all"]);
    let o = indexlab(&["describe", "callias"], dir.path());
    assert!(o.status.success() && String::from_utf8_lossy(&o.stdout).starts_with("callias: "));
    assert_eq!(indexlab(&["describe", "calias"], dir.path()).status.code(), Some(2));
}

#[test]
fn misspelled_scenario_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), r#"{"scenario": "calias"}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`scenario`"), "{}", stderr(&o));
    let o = run_config(dir.path(), "{\"scenario\": \"sf\",\n \"trails\": 3}", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn corrupted_potential_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("v.txt"), "1 3\n-1 -1,0\n0 oops,0\n1 1,0\n").unwrap();
    let o = run_config(dir.path(), r#"{"scenario": "sf", "potential": {"file": "v.txt"}, "trials": 1}"#, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("not a number"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn tabulated_potential_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("1 41\n");
    for j in 0..41 {
        let t = -2.0 + 0.1 * j as f64;
        text.push_str(&format!("{t} {},0\n", t.tanh()));
    }
    std::fs::write(dir.path().join("v.txt"), text).unwrap();
    let o = run_config(dir.path(), r#"{"scenario": "relind", "potential": {"file": "v.txt"}, "trials": 1}"#, &["--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("relind.restricted,") && l.contains(",1,1,pass")), "{csv}");
}

#[test]
fn transform_hypothesis_unmet_is_skipped_not_failed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"scenario": "appendix", "appendix": {"trials": 20, "eps": [0.6], "schedule_trials": 5, "vectors": 10}}"#;
    let o = run_config(dir.path(), cfg, &["--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let records: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    let rec = records.as_array().unwrap().iter().find(|r| r["check_name"] == "appendix.transform_continuity[eps=0.6]").unwrap();
    assert_eq!(rec["pass"], "skipped");
    assert!(stderr(&o).contains("skipped appendix.transform_continuity"));
}

#[test]
fn callias_csv_and_json_agree() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), r#"{"scenario": "callias", "potential": {"builtin": "tanh"}, "trials": 2}"#, &["--format", "csv,json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    let records = json.as_array().unwrap();
    assert_eq!(rows.len(), records.len());
    assert!(!dir.path().join("out/branches.dat").exists());
    let first = &records[0];
    assert_eq!(first["check_name"], "callias");
    assert_eq!((&first["lhs"], &first["rhs"]), (&serde_json::json!([1]), &serde_json::json!([1])));
    assert!(rows[0].starts_with("callias,") && rows[0].contains(",1,1,pass,"));
    let keys: Vec<&String> = first.as_object().unwrap().keys().collect();
    assert_eq!(keys.len(), 8);
    assert_eq!(first["inputs_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn sf_writes_branch_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"scenario": "sf", "potential": {"diag": ["tanh", "-linear", "2"]}, "trials": 1}"#;
    let o = run_config(dir.path(), cfg, &["--format", "gnuplot"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let dat = std::fs::read_to_string(dir.path().join("out/branches.dat")).unwrap();
    let mut lines = dat.lines();
    assert_eq!(lines.next(), Some("# t lambda_1 lambda_2 lambda_3"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 161);
    assert!(rows.iter().all(|r| r.len() == 4));
    assert_eq!(rows[0][0], -8.0);
}

#[test]
fn seed_flag_changes_digests_and_out_dir_env_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"scenario": "tower"}"#).unwrap();
    let run = |seed: &str, out: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_indexlab"))
            .args(["run", "--config", "c.json", "--format", "json", "--seed", seed, "--jobs", "2"])
            .env("INDEXLAB_OUT_DIR", out)
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read_to_string(dir.path().join(out).join("report.json")).unwrap()
    };
    assert_ne!(run("1", "a"), run("2", "b"));
    assert_eq!(run("1", "a"), run("1", "c"));
}
