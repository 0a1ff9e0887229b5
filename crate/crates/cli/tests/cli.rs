use std::process::Command;

use serde_json::Value;

fn rankmod(args: &[&str]) -> (Value, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_rankmod")).args(args).output().expect("binary runs");
    let code = out.status.code().expect("exit code");
    let stdout = String::from_utf8(out.stdout).unwrap();
    let v = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (v, code)
}

fn workspace_file(rel: &str) -> String {
    format!("{}/../../{rel}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn certify_split_builtin_and_json_fields() {
    let (v, code) = rankmod(&["certify-split", "F4", "--n", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["certificate"]["verdict"], true);
    for (f, n) in [("fields/F3.json", "3"), ("fields/F4.json", "4"), ("fields/F5.json", "5")] {
        let (v, code) = rankmod(&["certify-split", &workspace_file(f), "--n", n]);
        assert_eq!(code, 0, "{f}");
        assert_eq!(v["certificate"]["verdict"], true, "{f}");
    }
    let (v, code) = rankmod(&["certify-split", "-4", "--n", "2"]);
    assert_eq!(code, 1);
    assert_eq!(v["certificate"]["verdict"], false);
}

#[test]
fn descend_over_f4() {
    let (v, code) = rankmod(&["descend", "480a1", "--twists", "-4,41,73"]);
    assert_eq!(code, 0);
    assert_eq!(v["rank_interval"]["lower"], 6);
    assert_eq!(v["rank_interval"]["upper"], 6);
    // y² = x³ − x
    let (v, code) = rankmod(&["descend", "0,0,0,-1,0"]);
    assert_eq!(code, 0);
    assert_eq!(v["rank_interval"]["upper"], 0);
}

#[test]
fn euler_factor_power_test() {
    let (v, code) = rankmod(&["euler", "480a1", "F4", "--nth", "4", "--pmax", "100"]);
    assert_eq!(code, 0);
    assert_eq!(v["nth_power"]["passed"], true);
    let (v, code) = rankmod(&["euler", "480a1", "F4", "--nth", "8", "--pmax", "100"]);
    assert_eq!(code, 1);
    assert_eq!(v["nth_power"]["first_failure"], 3);
}

#[test]
fn lvalues() {
    let (v, code) = rankmod(&["lvalue", "19a3", "--twist-char", "7:2"]);
    assert_eq!(code, 0);
    assert!((v["report"]["re"].as_f64().unwrap() - 0.0976479217765).abs() < 1e-9);
    assert!((v["report"]["im"].as_f64().unwrap() + 1.53872734886).abs() < 1e-9);
    let (v, _) = rankmod(&["lvalue", "37a1", "--derivative"]);
    assert_eq!(v["report"]["verdict"], "nonzero");
    let (_, code) = rankmod(&["lvalue", "37a1", "--twist-char", "7"]);
    assert_eq!(code, 2);
}

#[test]
fn construct_field_with_avoid_file() {
    let dir = std::env::temp_dir().join(format!("rankmod-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let avoid = dir.join("avoid.txt");
    std::fs::write(&avoid, "# cubic character of conductor 7\n7:2\n").unwrap();
    let (v, code) = rankmod(&[
        "construct-field", "--order", "3", "--dim", "2", "--avoid", avoid.to_str().unwrap(), "--force-split", "2",
        "--bound", "2000",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["degree"], 9);
    let entries = v["certificate"]["entries"].as_array().unwrap();
    assert!(!entries.is_empty());
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn verify_exit_codes() {
    let (v, code) = rankmod(&["verify", "certify-split"]);
    assert_eq!((code, v["verdict"].as_str()), (0, Some("verified")));
    let (v, code) = rankmod(&["verify", "sha-mod-4"]);
    assert_eq!((code, v["verdict"].as_str()), (10, Some("verified-with-fixtures")));
    let (v, code) = rankmod(&["verify", "torsion"]);
    assert_eq!((code, v["verdict"].as_str()), (20, Some("out-of-scope-parts-skipped")));
    let (_, code) = rankmod(&["verify", "no-such-statement"]);
    assert_eq!(code, 2);
    let (v, _) = rankmod(&["verify", "--list"]);
    assert_eq!(v.as_array().unwrap().len(), 12);
}
