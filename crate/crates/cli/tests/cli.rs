use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn twistfix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twistfix")).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("twistfix-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn keys_sorted(v: &Value) -> bool {
    match v {
        Value::Object(m) => {
            let keys: Vec<&String> = m.keys().collect();
            keys.windows(2).all(|w| w[0] < w[1]) && m.values().all(keys_sorted)
        }
        Value::Array(a) => a.iter().all(keys_sorted),
        _ => true,
    }
}

#[test]
fn cocycle_analyze_standard() {
    let out = twistfix(&["cocycle", "analyze", "--group", "Z4xZ4", "--matrix", "[[0,0],[1/4,0]]"]);
    assert!(out.status.success());
    let r = report(&out);
    assert_eq!(r["schema"], "twistfix/1");
    assert_eq!(r["valid"], true);
    assert_eq!(r["symmetrizer_order"], 1);
    assert_eq!(r["blocks"], serde_json::json!([4]));
    assert_eq!(r["antisymmetric_part"], serde_json::json!([["0", "-1/4"], ["1/4", "0"]]));
    assert!(keys_sorted(&r));
}

#[test]
fn cocycle_similarity_with_witness() {
    let out = twistfix(&[
        "cocycle", "similar", "--group", "Z2xZ2", "--a", "[[0,0],[1/2,0]]", "--b", "[[0,1/2],[0,0]]", "--search",
    ]);
    assert!(out.status.success());
    let r = report(&out);
    assert_eq!(r["similar"], true);
    assert!(r["witness"].is_array());
    let out = twistfix(&["cocycle", "similar", "--group", "Z2xZ2", "--a", "[[0,0],[1/2,0]]", "--b", "[[0,0],[0,0]]"]);
    assert_eq!(report(&out)["similar"], false);
}

#[test]
fn invalid_table_names_the_failing_identity() {
    let path = scratch("bad.json");
    std::fs::write(&path, r#"{"group":"Z2","table":["0","1/2","0","1/4"]}"#).unwrap();
    let out = twistfix(&["cocycle", "analyze", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cocycle_identity"));
    let r = report(&out);
    assert_eq!(r["valid"], false);
    assert!(r["failing_triple"].is_array());
}

#[test]
fn input_errors_exit_with_one() {
    let path = scratch("typo.json");
    std::fs::write(&path, r#"{"group":"Z2","tabel":[]}"#).unwrap();
    let out = twistfix(&["cocycle", "analyze", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
    assert_eq!(twistfix(&["proper", "analyze", "--preset", "nope"]).status.code(), Some(1));
    assert_eq!(twistfix(&["cocycle", "analyze", "--group", "Z0"]).status.code(), Some(1));
    assert_eq!(twistfix(&["deform", "product", "--n", "1", "--theta", "0.5"]).status.code(), Some(1));
    assert_eq!(twistfix(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(twistfix(&["--help"]).status.code(), Some(0));
}

#[test]
fn twisted_commands() {
    let out = twistfix(&["twisted", "decompose", "--group", "Z3xZ3", "--matrix", "[[0,0],[1/3,0]]"]);
    assert_eq!(report(&out)["blocks"], serde_json::json!([3]));
    let out = twistfix(&["twisted", "decompose", "--group", "Z2xZ2"]);
    assert_eq!(report(&out)["blocks"], serde_json::json!([1, 1, 1, 1]));
    let out = twistfix(&["twisted", "fixedpoints", "--group", "Z2xZ4", "--matrix", "[[0,1/2],[0,0]]"]);
    assert!(out.status.success());
    assert_eq!(report(&out)["dimension"], 1);
}

#[test]
fn proper_presets() {
    let out = twistfix(&["proper", "analyze", "--preset", "dual:Z2xZ2"]);
    assert!(out.status.success());
    let r = report(&out);
    assert_eq!(r["saturated"], true);
    assert_eq!(r["fix_blocks"], serde_json::json!([1]));
    assert_eq!(r["crossed_dim"], 16);
    assert!(keys_sorted(&r));
    let r = report(&twistfix(&["proper", "analyze", "--preset", "trivial:Z2"]));
    assert_eq!(r["saturated"], false);
    let r = report(&twistfix(&["proper", "analyze", "--preset", "induced"]));
    assert_eq!(r["fix_blocks"], serde_json::json!([1, 1]));
    let r = report(&twistfix(&["proper", "tensor", "--a", "swap", "--b", "swap"]));
    assert_eq!(r["passed"], true);
    let r = report(&twistfix(&["proper", "inflate"]));
    assert_eq!(r["fix_blocks"], serde_json::json!([1]));
}

#[test]
fn proper_action_file() {
    let path = scratch("swap.json");
    std::fs::write(
        &path,
        r#"{"group":"Z2","size":2,
            "basis":[[[1,0],[0,0]],[[0,0],[0,1]]],
            "unitaries":[[[1,0],[0,1]],[[0,1],[1,0]]]}"#,
    )
    .unwrap();
    let out = twistfix(&["proper", "analyze", "--action", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(&out)["saturated"], true);
}

#[test]
fn deform_product_writes_csv() {
    let csv = scratch("product.csv");
    let out = twistfix(&[
        "deform", "product", "--N", "32", "--theta", "0.5", "--f", "gaussian:2.0", "--g", "gaussian:2.5@1,0",
        "--oracle", "--out", csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["band_limited"], true);
    assert!(r["oracle_defect"].as_f64().unwrap() < 1e-4);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,re,im"));
    assert_eq!(lines.count(), 32 * 32);
}

#[test]
fn deform_zero_theta_is_pointwise() {
    let out = twistfix(&["deform", "product", "--N", "32", "--theta", "0", "--f", "gaussian:2.0", "--g", "wave:1,-1"]);
    assert!(out.status.success());
    assert_eq!(report(&out)["equals_pointwise"], true);
}

#[test]
fn deform_oracle_failure_exits_with_two() {
    let out = twistfix(&["deform", "product", "--N", "32", "--oracle", "--oracle-tol", "1e-14"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("oracle_agreement"));
}

#[test]
fn deform_check_passes() {
    let out = twistfix(&["deform", "check", "--N", "32", "--theta", "0.25"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert!(r["star"]["associativity"].as_f64().unwrap() < 1e-8);
}

#[test]
fn torus_subset_masks() {
    let out = twistfix(&["torus", "subset", "--mask", "disk:0.2", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["off_support_max"], 0.0);
    assert_eq!(r["saturated"], false);
    let bitmap = scratch("mask.txt");
    let rows: Vec<String> = (0..16)
        .map(|i| (0..16).map(|j| if (4..12).contains(&i) && j < 10 { '#' } else { '.' }).collect())
        .collect();
    std::fs::write(&bitmap, rows.join("\n")).unwrap();
    let out = twistfix(&["torus", "subset", "--mask", bitmap.to_str().unwrap(), "--bumps", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(&out)["grid"], 16);
}

#[test]
fn torus_bundle_reports_chern_numbers() {
    let out = twistfix(&["torus", "bundle", "--m=-2,0,3", "--grid", "64"]);
    assert!(out.status.success());
    let r = report(&out);
    let chern: Vec<i64> = r["bundles"].as_array().unwrap().iter().map(|b| b["chern_number"].as_i64().unwrap()).collect();
    assert_eq!(chern, vec![-2, 0, 3]);
    assert_eq!(r["distinguishes"], true);
}

#[test]
fn report_to_file_matches_stdout() {
    let path = scratch("report.json");
    let a = twistfix(&["proper", "analyze", "--preset", "swap", "--seed", "4"]);
    let b = twistfix(&["proper", "analyze", "--preset", "swap", "--seed", "4", "--out", path.to_str().unwrap()]);
    assert!(b.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
}
