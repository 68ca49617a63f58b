use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn bk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bkweights")).args(args).output().expect("binary runs")
}

fn bk_json(args: &[&str]) -> (i32, Value) {
    let mut a = args.to_vec();
    a.push("--json");
    let out = bk(&a);
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v)
}

fn weights_of(v: &Value) -> Vec<Vec<i64>> {
    serde_json::from_value(v["weights"].clone()).unwrap()
}

#[test]
fn identity_has_zero_weights() {
    let (code, v) = bk_json(&["weights", &fixture("identity_rank2.json")]);
    assert_eq!(code, 0);
    assert_eq!(weights_of(&v), vec![vec![0, 0]]);
    assert_eq!(v["agree"], Value::Bool(true));
}

#[test]
fn worked_example_weights_and_verdict() {
    let (code, v) = bk_json(&["weights", &fixture("worked_example.json")]);
    assert_eq!(code, 0);
    assert_eq!(weights_of(&v), vec![vec![0, 1, 2, 3, 5]]);
    let (code, v) = bk_json(&["sd-check", &fixture("worked_example.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["strongly_divisible"], Value::Bool(true));
}

#[test]
fn malformed_input_exits_2() {
    let dir = std::env::temp_dir().join(format!("bkweights-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"p\": 3,").unwrap();
    assert_eq!(bk(&["weights", bad.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&bad, "{\"p\": 3, \"f\": 1, \"coeff\": {\"p\": 3, \"m\": 1}, \"rank\": 0, \"frob\": [[]], \"extra\": 1}").unwrap();
    assert_eq!(bk(&["weights", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(bk(&["weights"]).status.code(), Some(2));
}

#[test]
fn truncated_input_exits_3() {
    let out = bk(&["weights", &fixture("non_sd_rank2.json"), "--precision", "2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn rank_one_sd_boundary() {
    let (code, v) = bk_json(&["sd-check", &fixture("rank_one_weight_p.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["strongly_divisible"], Value::Bool(true));
    assert!(v["certificate"].is_array());

    let (code, v) = bk_json(&["sd-check", &fixture("rank_one_weight_p_plus_1.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["strongly_divisible"], Value::Bool(false));
    assert_eq!(v["reason"], "weight out of range");

    let out = bk(&["sd-check", &fixture("rank_one_weight_p_plus_1.json")]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("reason: weight out of range"));
}

#[test]
fn non_sd_filtration_reason() {
    let (_, v) = bk_json(&["sd-check", &fixture("non_sd_rank2.json")]);
    assert_eq!(v["strongly_divisible"], Value::Bool(false));
    assert_eq!(v["reason"], "filtrations differ");
}

#[test]
fn snf_exponents() {
    let (code, v) = bk_json(&["snf", &fixture("smith_example.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["exponents"], serde_json::json!([0, 2]));
}

#[test]
fn induce_then_restrict() {
    let dir = std::env::temp_dir().join(format!("bkweights-ind-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = bk(&["induce", &fixture("two_embeddings_sd.json"), &fixture("extension.json")]);
    assert_eq!(out.status.code(), Some(0));
    let induced = dir.join("induced.json");
    std::fs::write(&induced, &out.stdout).unwrap();
    let (_, v) = bk_json(&["weights", induced.to_str().unwrap()]);
    assert_eq!(weights_of(&v), vec![vec![0, 1, 2, 3]]);

    let out = bk(&["restrict", induced.to_str().unwrap(), &fixture("extension.json")]);
    assert_eq!(out.status.code(), Some(0));
    let restricted = dir.join("restricted.json");
    std::fs::write(&restricted, &out.stdout).unwrap();
    let (_, v) = bk_json(&["weights", restricted.to_str().unwrap()]);
    assert_eq!(weights_of(&v), vec![vec![0, 1, 2, 3], vec![0, 1, 2, 3]]);
}

#[test]
fn rank_one_both_directions() {
    let (code, v) = bk_json(&["rank-one", &fixture("rank_one.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["character"]["exponent"], 2);
    assert_eq!(v["character"]["level"], 1);
    let (code, v) = bk_json(&["rank-one", &fixture("rank_one_weight_p.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["normal_form"]["exponents"], serde_json::json!([5]));
    // omega^-5 = omega^-1 on level one for p = 5
    assert_eq!(v["character"]["exponent"], 1);
}

#[test]
fn inert_commands() {
    let (code, v) = bk_json(&["inert", &fixture("cyclotomic_square.json"), "member", "-6,0"]);
    assert_eq!(code, 0);
    assert_eq!(v["member"], Value::Bool(false));
    let (_, v) = bk_json(&["inert", &fixture("cyclotomic_square.json"), "member", "[[-1,-1]]"]);
    assert_eq!(v["member"], Value::Bool(true));

    let (code, v) = bk_json(&["inert", &fixture("trivial_character.json"), "--box", "0,5", "enumerate"]);
    assert_eq!(code, 0);
    assert_eq!(v["tuples"], serde_json::json!([[[0]], [[4]]]));
}

#[test]
fn enumerate_then_member_round_trip() {
    for desc in ["cyclotomic_square.json", "level_two_character.json", "trivial_character.json"] {
        let (_, v) = bk_json(&["inert", &fixture(desc), "enumerate"]);
        let tuples: Vec<Vec<Vec<i64>>> = serde_json::from_value(v["tuples"].clone()).unwrap();
        assert!(!tuples.is_empty());
        for t in tuples {
            let arg = serde_json::to_string(&t).unwrap();
            let (_, m) = bk_json(&["inert", &fixture(desc), "member", &arg]);
            assert_eq!(m["member"], Value::Bool(true), "{desc} {arg}");
        }
    }
}

#[test]
fn verify_example_runs() {
    let (code, v) = bk_json(&["verify-example", "--p", "3", "--n", "2", "--x", "1"]);
    assert_eq!(code, 0);
    assert_eq!(weights_of(&v), vec![vec![0, 1, 1, 2, 3]]);
    assert_eq!(v["consistent"], Value::Bool(true));
    let (code, v) = bk_json(&["verify-example", "--input", &fixture("worked_example.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["sd_explicit"], Value::Bool(true));
    assert_eq!(bk(&["verify-example", "--p", "5", "--n", "9"]).status.code(), Some(2));
}

#[test]
fn selftest_is_reproducible() {
    let a = bk(&["selftest", "--seed", "5", "--trials", "10"]);
    let b = bk(&["selftest", "--seed", "5", "--trials", "10"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let (code, v) = bk_json(&["selftest", "--trials", "0"]);
    assert_eq!(code, 0);
    assert_eq!(v["failures"], 0);
    assert!(v["properties"].as_array().unwrap().iter().all(|p| p["checked"] == 0));
}
