use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_higgs-dt")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("higgs-dt-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn omega_rank_one_genus_two() {
    let o = run(&["omega", "--genus", "2", "--q", "2", "--points", "4,6", "--l", "2", "--rmax", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "r,d_mod_r,omega,agree\n1,0,18,true\n");
}

#[test]
fn twist_below_canonical_is_a_precondition_error() {
    let o = run(&["omega", "--genus", "1", "--l", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_fills_missing_flags() {
    let cfg = tmp("job.json");
    fs::write(&cfg, r#"{"genus": 0, "l": -1, "rmax": 2, "method": "residue"}"#).unwrap();
    let o = run(&["omega", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "r,d_mod_r,omega\n1,0,-v\n2,0,0\n2,1,0\n");
    let o = run(&["omega", "--config", cfg.to_str().unwrap(), "--l", "0", "--rmax", "1"]);
    assert_eq!(stdout(&o), "r,d_mod_r,omega\n1,0,v^2\n");
}

#[test]
fn oracle_table_matches() {
    let csv = tmp("oracle.csv");
    let o = run(&["oracle", "--q", "2", "--l", "-2", "--rmax", "2", "--dmax", "0", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(csv).unwrap();
    assert_eq!(text, "q,l,r,d,volume_num,volume_den,formula_side,match\n2,-2,1,0,1,1,1,true\n2,-2,2,0,1,6,1/6,true\n");
}

#[test]
fn hn_files_round_trip() {
    let input = tmp("qt.json");
    fs::write(
        &input,
        r#"{"n": 2, "genus": 1, "l": 1, "rmax": 2, "dmax": 2, "entries": [
            {"gamma": [[1, 0], [0, 0]], "value": "v"},
            {"gamma": [[0, 0], [1, 1]], "value": "a1 - 2"},
            {"gamma": [[1, 1], [1, 0]], "value": "1/(v^2 - 1)"}]}"#,
    )
    .unwrap();
    let factors = tmp("factors.json");
    let back = tmp("back.json");
    assert!(run(&["hn-factor", "--input", input.to_str().unwrap(), "--output", factors.to_str().unwrap()]).status.success());
    assert!(run(&["hn-expand", "--input", factors.to_str().unwrap(), "--output", back.to_str().unwrap()]).status.success());
    let a: serde_json::Value = serde_json::from_str(&fs::read_to_string(&back).unwrap()).unwrap();
    let entries = a["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    assert!(entries.iter().any(|e| e["value"] == "a1 - 2"));
}

#[test]
fn kac_json_report() {
    let json = tmp("kac.json");
    let o = run(&["kac", "--genus", "0", "--rmax", "1", "--dmax", "2", "--json", json.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "r,d,a_positive\n0,1,v^2 + 1\n0,2,v^2 + 1\n1,0,1\n1,1,1\n1,2,1\n");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v["truncation"]["dmax"], 2);
}
