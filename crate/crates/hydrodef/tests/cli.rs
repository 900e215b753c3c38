use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn hydrodef(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hydrodef"))
        .args(args)
        .env_remove("HYDRODEF_MAX_JET")
        .env_remove("HYDRODEF_MAX_DELTA")
        .output()
        .expect("binary runs")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = hydrodef(args);
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn ex(name: &str) -> String {
    example(name).display().to_string()
}

fn json(args: &[&str]) -> (i32, serde_json::Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let (code, out, err) = run(&all);
    assert!(err.is_empty(), "{}", err);
    (code, serde_json::from_str(&out).expect("valid json"))
}

fn temp_hop(src: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".hop").tempfile().unwrap();
    f.write_all(src.as_bytes()).unwrap();
    f
}

fn value<'a>(report: &'a serde_json::Value, name: &str, indices: &[u64]) -> &'a str {
    report["values"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["name"] == name && v["indices"].as_array().unwrap().iter().map(|i| i.as_u64().unwrap()).eq(indices.iter().copied()))
        .and_then(|v| v["value"].as_str())
        .unwrap_or_else(|| panic!("no value {} {:?}", name, indices))
}

#[test]
fn grinberg_passes_on_the_non_constant_form() {
    let (code, r) = json(&["check", "grinberg", &ex("p2_0.hop")]);
    assert_eq!(code, 0);
    assert_eq!(r["pass"], true);
    assert_eq!(r["check"], "grinberg");
    assert!(r["components"].as_array().unwrap().iter().all(|c| c["zero"] == true));
}

#[test]
fn constant_b_fails_with_residuals_printed() {
    let (code, out, _) = run(&["check", "jacobi", &ex("bad_const_b.hop")]);
    assert_eq!(code, 1);
    assert!(out.contains("FAIL") && out.contains("[p0,p0]"), "{}", out);
    let (code, r) = json(&["check", "grinberg", &ex("bad_const_b.hop")]);
    assert_eq!(code, 1);
    assert_eq!(r["pass"], false);
    assert_eq!(r["oracle_agrees"], true);
}

#[test]
fn zero_bivector_is_skew() {
    let (code, out, _) = run(&["check", "skew", &ex("empty.hop")]);
    assert_eq!(code, 0, "{}", out);
}

#[test]
fn deformation_file_checks() {
    assert_eq!(run(&["check", "jacobi", &ex("def1_p1.hop")]).0, 0);
    assert_eq!(run(&["check", "skew", &ex("def1_p1.hop")]).0, 0);
    let src = std::fs::read_to_string(example("def1_p1.hop")).unwrap().replace("func p(u2)", "func p(u1, u2)");
    let f = temp_hop(&src);
    let (code, r) = json(&["check", "jacobi", f.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    let bad: Vec<_> = r["components"].as_array().unwrap().iter().filter(|c| c["zero"] == false).collect();
    assert!(bad.iter().all(|c| c["coefficient"].as_str().unwrap().starts_with("[p0,p1]")));
}

#[test]
fn gas_dynamics_file_passes() {
    for kind in ["grinberg", "jacobi", "skew"] {
        assert_eq!(run(&["check", kind, &ex("gas_dynamics.hop")]).0, 0, "{}", kind);
    }
}

#[test]
fn count_reproduces_totals() {
    let (code, r) = json(&["count", "--n", "3", "--degree", "2"]);
    assert_eq!(code, 0);
    assert_eq!(value(&r, "coefficients", &[2]), "315");
    assert_eq!(value(&r, "cumulative", &[]), "432");
    let (_, r) = json(&["count", "--n", "2", "--degree", "2"]);
    assert_eq!(value(&r, "cumulative", &[]), "104");
    assert_eq!(value(&r, "free after skew-symmetry", &[1]), "12");
    assert_eq!(value(&r, "free after skew-symmetry", &[2]), "30");
    assert_eq!(run(&["count", "--n", "3", "--degree", "3"]).0, 2);
}

#[test]
fn catalog_verify_second_order_family() {
    let (code, r) = json(&["catalog", "verify", "--case", "DEF2_P2"]);
    assert_eq!(code, 0);
    let names: Vec<&str> = r["components"].as_array().unwrap().iter().map(|c| c["coefficient"].as_str().unwrap()).collect();
    assert!(names.contains(&"DEF2_P2: order 2"), "{:?}", names);
}

#[test]
fn catalog_unknown_case_is_a_usage_error() {
    let (code, _, err) = run(&["catalog", "verify", "--case", "NOPE"]);
    assert_eq!(code, 2);
    assert!(err.contains("NOPE"));
}

#[test]
fn catalog_list_names_entries() {
    let (code, out, _) = run(&["catalog", "list"]);
    assert_eq!(code, 0);
    for name in ["P1_0", "RANK2_COMPLEX_3", "DEF5_P1", "MIURA_REDUCTIONS"] {
        assert!(out.contains(name), "{}", name);
    }
}

#[test]
fn transform_reports_non_tensorial_part() {
    let (code, r) = json(&["transform", &ex("example1.map"), &ex("metricEx.hop")]);
    assert_eq!(code, 0);
    assert_eq!(value(&r, "non-tensorial", &[2, 1, 3]), "1/u3");
    assert_eq!(value(&r, "non-tensorial", &[1, 2, 3]), "-1/u3");
    assert_eq!(value(&r, "admissible", &[]), "true");
    assert_eq!(value(&r, "restricted", &[]), "false");
}

#[test]
fn lie_along_symmetry_vanishes() {
    assert_eq!(run(&["lie", &ex("symmetry_y.vf"), &ex("p1_0.hop")]).0, 0);
    let (code, r) = json(&["lie", &ex("symmetry_y.vf"), &ex("def1_p1.hop")]);
    assert_eq!(code, 1);
    assert_eq!(r["pass"], false);
}

#[test]
fn bracket_of_distinct_forms_is_nonzero() {
    assert_eq!(run(&["bracket", &ex("p2_0.hop"), &ex("p2_0.hop")]).0, 0);
    assert_eq!(run(&["bracket", &ex("p1_0.hop"), &ex("p2_0.hop")]).0, 1);
    let (code, _, err) = run(&["bracket", &ex("p1_0.hop"), &ex("gas_dynamics.hop")]);
    assert_eq!(code, 2);
    assert!(err.contains("dimension"));
}

#[test]
fn parse_errors_carry_line_and_column() {
    let f = temp_hop("n = 2\nmetric\ng[1][1] = 1 + * u2\n");
    let (code, _, err) = run(&["check", "grinberg", f.path().to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains(":3:15:"), "{}", err);
    let f = temp_hop("n = 2\nmetric\ng[2][1] = 1\n");
    let (code, _, err) = run(&["check", "grinberg", f.path().to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("ascending"), "{}", err);
    assert_eq!(run(&["check", "grinberg", "/nonexistent.hop"]).0, 2);
    assert_eq!(run(&["check", "sideways", &ex("p1_0.hop")]).0, 2);
    assert_eq!(run(&[]).0, 2);
}

#[test]
fn json_is_byte_stable_without_timing() {
    let args = ["check", "jacobi", &ex("bad_const_b.hop"), "--format", "json", "--no-timing", "--seed", "7"];
    let a = hydrodef(&args);
    let b = hydrodef(&args);
    assert_eq!(a.stdout, b.stdout);
    let r: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(r["seed"], 7);
    assert_eq!(r["elapsed_ms"], 0);
    for key in ["check", "case", "components", "pass", "seed", "elapsed_ms"] {
        assert!(r.get(key).is_some(), "{}", key);
    }
}

#[test]
fn caps_come_from_env_and_flags_override() {
    let path = ex("def1_p1.hop");
    let capped = Command::new(env!("CARGO_BIN_EXE_hydrodef")).args(["check", "skew", &path]).env("HYDRODEF_MAX_JET", "1").output().unwrap();
    assert_eq!(capped.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&capped.stderr).contains("cap"));
    let overridden = Command::new(env!("CARGO_BIN_EXE_hydrodef"))
        .args(["check", "skew", &path, "--max-jet", "6"])
        .env("HYDRODEF_MAX_JET", "1")
        .output()
        .unwrap();
    assert_eq!(overridden.status.code(), Some(0));
}

#[test]
fn gaussian_coefficients_need_complex_flag() {
    let f = temp_hop("n = 3\nmetric\ng[1][1] = 1\ng[2][2] = 1\n");
    let p = f.path().to_str().unwrap();
    assert_eq!(run(&["check", "grinberg", p]).0, 0);
    let f = temp_hop("n = 2\nmetric\ng[1][1] = i\n");
    let p = f.path().to_str().unwrap();
    assert_eq!(run(&["check", "grinberg", p]).0, 2);
    assert_eq!(run(&["check", "grinberg", p, "--complex"]).0, 0);
}
