use std::process::Command;

use serde_json::Value;

fn klr(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_klr")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn mul_tau_squared() {
    let (code, out, _) = klr(&["mul", "--type", "A2", "--beta", "1,1", "tau(1)*tau(1)*e(1,2)"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "(x1+x2) e(1,2)");
}

#[test]
fn mul_empty_product_is_identity() {
    let (code, out, _) = klr(&["mul", "--type", "A2", "--beta", "1,1", ""]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "e(1,2) + e(2,1)");
}

#[test]
fn mul_over_fp() {
    let (code, out, _) = klr(&["mul", "--type", "A1", "--beta", "2", "--field", "F3", "x(1)*e(1,1)*x(1)"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "x1^2 e(1,1)");
    assert_eq!(klr(&["mul", "--type", "A1", "--beta", "2", "--field", "F9", "e(1,1)"]).0, 2);
}

#[test]
fn mul_malformed_reports_position() {
    let (code, _, err) = klr(&["mul", "--type", "A2", "--beta", "1,1", "tau(1)*("]);
    assert_eq!(code, 2);
    assert!(err.contains("parse error at"), "{}", err);
}

#[test]
fn mul_bad_weight_is_usage() {
    assert_eq!(klr(&["mul", "--type", "A2", "--beta", "1", "e(1,2)"]).0, 2);
}

#[test]
fn lambda_of_two_letters() {
    let (code, out, _) = klr(&["lambda", "--type", "A2", "1", "2"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["Lambda"], "1");
    assert_eq!(v["schema"], "klr-report/1");
}

#[test]
fn lambda_c_plus_with_letters() {
    for j in ["1", "2", "1+"] {
        let (code, out, _) = klr(&["lambda", "--type", "A2", "C+", j]);
        assert_eq!(code, 0, "{}", j);
        assert_eq!(json(&out)["Lambda"], "0", "{}", j);
    }
    let (code, out, _) = klr(&["lambda", "--type", "B2", "--i", "2", "C+", "1"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["Lambda"], "0");
}

#[test]
fn lambda_unknown_spec_is_usage() {
    assert_eq!(klr(&["lambda", "--type", "A2", "foo", "2"]).0, 2);
    assert_eq!(klr(&["lambda", "--type", "A2", "hd(1,", "2"]).0, 2);
    assert_eq!(klr(&["lambda", "--type", "A2", "1+", "1-"]).0, 2);
}

#[test]
fn lambda_undefined_is_exit_3() {
    // Hom(M∘N, N∘M) is not one-dimensional for M = N = <1>∘<2>
    let (code, _, err) = klr(&["lambda", "--type", "A2", "1,2", "1,2"]);
    assert_eq!(code, 3, "{}", err);
}

#[test]
fn verify_thj_a2() {
    let (code, out, _) = klr(&["verify", "thJ", "--type", "A2", "--ht", "4"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["suite"], "thJ");
}

#[test]
fn verify_lasw_b2() {
    let (code, out, _) = klr(&["verify", "lasw", "--type", "B2", "--i", "1"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["pass"], true);
}

#[test]
fn verify_all_a1_to_file() {
    let path = std::env::temp_dir().join("klr_all_a1.json");
    let p = path.to_str().unwrap();
    let (code, out, _) = klr(&["verify", "all", "--type", "A1", "--out", p]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let v = json(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(v["pass"], true);
    for s in ["relations", "appendixB", "rmatrix", "lasw", "desw", "thJ", "diei", "bos", "gen2"] {
        assert_eq!(v["data"][s]["pass"], true, "{}", s);
    }
}

#[test]
fn reports_are_deterministic() {
    let a = klr(&["verify", "rmatrix", "--type", "A2", "--seed", "5"]).1;
    let b = klr(&["verify", "rmatrix", "--type", "A2", "--seed", "5"]).1;
    assert_eq!(a, b);
}

#[test]
fn unknown_suite_and_bad_flags() {
    assert_eq!(klr(&["verify", "nope", "--type", "A2"]).0, 2);
    assert_eq!(klr(&["verify", "bos", "--type", "E9"]).0, 2);
    assert_eq!(klr(&["verify", "bos", "--type", "A2", "--i", "7"]).0, 2);
    assert_eq!(klr(&["verify", "bos", "--type", "A2", "--field", "F2"]).0, 2);
    assert_eq!(klr(&["frobnicate"]).0, 2);
}

#[test]
fn cartan_from_json_file() {
    let path = std::env::temp_dir().join("klr_b2.json");
    std::fs::write(&path, r#"{"index_set":["a","b"],"gcm":[[2,-1],[-2,2]],"symmetrizers":[2,1]}"#).unwrap();
    let (code, out, _) = klr(&["verify", "bos", "--cartan", path.to_str().unwrap(), "--i", "b"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["pass"], true);
}

#[test]
fn small_truncation_is_exit_4() {
    let (code, _, err) = klr(&["verify", "desw", "--type", "A2", "--trunc", "1"]);
    assert_eq!(code, 4);
    assert!(err.contains("hint: increase --trunc"), "{}", err);
}

#[test]
fn reflect_check_runs() {
    let (code, out, _) = klr(&["reflect-check", "--type", "A2"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["suite"], "reflect-check");
}
