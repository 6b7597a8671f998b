//! End-to-end tests of the command-line surface: subcommand output shapes
//! and the documented exit codes (0 success, 1 selftest failure, 2 malformed
//! input, 3 dimension/grade mismatch).

use std::io::Write;
use std::process::{Command, Output};

fn calibra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_calibra"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_temp(name: &str, contents: &str) -> std::path::PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("calibra-cli-test-{}-{name}", std::process::id()));
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    path
}

#[test]
fn forms_lists_the_octonionic_set() {
    let out = calibra(&["forms", "--algebra", "o", "--rank", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["g2_three", "g2_four", "spin7_four", "volume"] {
        assert!(text.contains(name), "missing {name} in: {text}");
    }
}

#[test]
fn forms_emits_single_form_json() {
    let out = calibra(&["forms", "--algebra", "c", "--rank", "2", "--name", "kahler"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["dim"], 4);
}

#[test]
fn decompose_reports_eigenvalues() {
    let out = calibra(&["decompose", "--algebra", "o", "--rank", "1", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let comps = v["components"].as_array().unwrap();
    let dims: Vec<u64> = comps.iter().map(|c| c["dimension"].as_u64().unwrap()).collect();
    assert!(dims.contains(&21) && dims.contains(&7));
}

#[test]
fn classify_real_axis_in_c3() {
    let plane = write_temp(
        "r3.json",
        r#"{"dim": 6, "frame": [[1,0,0,0,0,0],[0,0,1,0,0,0],[0,0,0,0,1,0]], "orientation": 1}"#,
    );
    let out = calibra(&["classify-subspace", "--input", plane.to_str().unwrap(), "--algebra", "c"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("special Lagrangian"));
    assert!(text.contains("phase 0.000"));
    let _ = std::fs::remove_file(plane);
}

#[test]
fn classify_associative_plane() {
    let plane = write_temp(
        "assoc.json",
        r#"{"dim": 7, "frame": [[1,0,0,0,0,0,0],[0,1,0,0,0,0,0],[0,0,1,0,0,0,0]]}"#,
    );
    let out = calibra(&["classify-subspace", "--input", plane.to_str().unwrap(), "--algebra", "o7"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("associative"));
    let _ = std::fs::remove_file(plane);
}

#[test]
fn malformed_input_exits_two() {
    let bad = write_temp("bad.json", "{not json");
    let out = calibra(&["classify-subspace", "--input", bad.to_str().unwrap(), "--algebra", "c"]);
    assert_eq!(out.status.code(), Some(2));
    let empty = write_temp("empty.json", r#"{"dim": 4, "frame": []}"#);
    let out = calibra(&["classify-subspace", "--input", empty.to_str().unwrap(), "--algebra", "c"]);
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_file(bad);
    let _ = std::fs::remove_file(empty);
}

#[test]
fn dimension_mismatch_exits_three() {
    let odd = write_temp(
        "odd.json",
        r#"{"dim": 5, "frame": [[1,0,0,0,0],[0,1,0,0,0]]}"#,
    );
    let out = calibra(&["classify-subspace", "--input", odd.to_str().unwrap(), "--algebra", "c"]);
    assert_eq!(out.status.code(), Some(3));
    let _ = std::fs::remove_file(odd);
}

#[test]
fn fourier_transforms_the_symplectic_exponential() {
    let form = write_temp(
        "expomega.json",
        r#"{"n": 2, "variables": ["x1","x2","y1","y2","y_1","y_2"],
            "terms": [{"indices": [], "coeff": [1,0]},
                      {"indices": [1,3], "coeff": [1,0]},
                      {"indices": [2,4], "coeff": [1,0]},
                      {"indices": [1,2,3,4], "coeff": [-1,0]}]}"#,
    );
    let out = calibra(&["fourier", "--input", form.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // expected: dx1∧dx2 + i dx1∧ŷ2 − i dx2∧ŷ1 − ŷ1∧ŷ2
    let terms = v["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 4);
    let find = |idx: &[u64]| -> [f64; 2] {
        terms
            .iter()
            .find(|t| {
                t["indices"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .map(|x| x.as_u64().unwrap())
                    .collect::<Vec<_>>()
                    == idx
            })
            .map(|t| {
                [
                    t["coeff"][0].as_f64().unwrap(),
                    t["coeff"][1].as_f64().unwrap(),
                ]
            })
            .unwrap()
    };
    assert_eq!(find(&[1, 2]), [1.0, 0.0]);
    assert_eq!(find(&[1, 6]), [0.0, 1.0]);
    assert_eq!(find(&[2, 5]), [0.0, -1.0]);
    assert_eq!(find(&[5, 6]), [-1.0, 0.0]);
    let _ = std::fs::remove_file(form);
}

#[test]
fn fourier_rejects_dual_symbols_with_exit_three() {
    let form = write_temp(
        "dual.json",
        r#"{"n": 1, "variables": ["x1","y1","y_1"],
            "terms": [{"indices": [2,3], "coeff": [0,1]}]}"#,
    );
    let out = calibra(&["fourier", "--input", form.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let _ = std::fs::remove_file(form);
}

#[test]
fn selftest_filter_runs_and_passes() {
    let out = calibra(&[
        "selftest",
        "--only",
        "stabilizer,chern",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 3);
    assert!(text.contains("stabilizer-dimensions,true"));
    assert!(text.contains("chern-sign,true"));
}

#[test]
fn selftest_text_embeds_conventions_and_seed() {
    let out = calibra(&["selftest", "--only", "stabilizer", "--seed", "99"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("seed=99"));
    assert!(text.contains("conventions:"));
}

#[test]
fn comass_of_a_volume_form() {
    let form = write_temp(
        "vol.json",
        r#"{"dim": 3, "terms": [{"indices": [1,2,3], "coeff": 1.0}]}"#,
    );
    let out = calibra(&[
        "comass", "--input", form.to_str().unwrap(), "--restarts", "4", "--seed", "5",
        "--format", "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let est = v["estimate"].as_f64().unwrap();
    assert!((est - 1.0).abs() < 1e-9);
    assert_eq!(v["seed"], 5);
    let _ = std::fs::remove_file(form);
}

#[test]
fn ym_check_of_the_constant_form() {
    let form = write_temp(
        "one.json",
        r#"{"dim": 4, "terms": [{"indices": [], "coeff": 1.0}]}"#,
    );
    let out = calibra(&[
        "ym-check", "--input", form.to_str().unwrap(), "--format", "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["scalar_calibrating"], true);
    assert_eq!(v["top_eigenvalue"].as_f64().unwrap().round(), 1.0);
    let _ = std::fs::remove_file(form);
}

#[test]
fn chern_pairing_of_asd_curvature() {
    let curv = write_temp(
        "asd.json",
        r#"{"dim": 4, "rank": 1,
            "terms": [{"form": {"dim": 4, "terms": [{"indices": [1,2], "coeff": 1.0},
                                                     {"indices": [3,4], "coeff": -1.0}]},
                        "coeff": [[[0.0, 1.0]]]}]}"#,
    );
    let phi = write_temp(
        "phi1.json",
        r#"{"dim": 4, "terms": [{"indices": [], "coeff": 1.0}]}"#,
    );
    let out = calibra(&[
        "chern", "--curvature", curv.to_str().unwrap(), "--phi", phi.to_str().unwrap(),
        "--format", "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["pairing"].as_f64().unwrap() < 0.0);
    let _ = std::fs::remove_file(curv);
    let _ = std::fs::remove_file(phi);
}

#[test]
fn output_file_option_writes_report() {
    let mut path = std::env::temp_dir();
    path.push(format!("calibra-out-{}.txt", std::process::id()));
    let out = calibra(&[
        "decompose", "--algebra", "c", "--rank", "2", "--output", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.contains("lambda_11_0"));
    let _ = std::fs::remove_file(path);
}
