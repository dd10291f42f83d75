use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cartan(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cartan"))
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .unwrap()
}

fn sample(command: &str, name: &str, extra: &[&str]) -> Output {
    let mut args = vec![command];
    args.extend_from_slice(extra);
    cartan(&args, &configs().join(name))
}

fn inline(command: &str, text: &str, extra: &[&str]) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, text).unwrap();
    let mut args = vec![command];
    args.extend_from_slice(extra);
    cartan(&args, &path)
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn sample_exit_statuses() {
    for (command, name, code) in [
        ("certify", "monge.toml", 0),
        ("certify", "graph_monge.toml", 0),
        ("certify", "involutive.toml", 1),
        ("certify", "malformed.toml", 2),
        ("connection", "sphere_abelian.toml", 0),
        ("connection", "torus_heisenberg.toml", 0),
        ("connection", "connection_custom.toml", 0),
        ("extend", "cext_table.toml", 0),
        ("extend", "cone_inside.toml", 0),
        ("extend", "cone_outside.toml", 1),
        ("extend", "cone_near_boundary.toml", 1),
        ("topology", "s2xs3.toml", 0),
        ("topology", "s5.toml", 1),
        ("topology", "m3.toml", 1),
        ("topology", "smale_sum.toml", 0),
    ] {
        let out = sample(command, name, &["--format", "json"]);
        assert_eq!(out.status.code(), Some(code), "{command} {name}: {}", stderr(&out));
    }
}

#[test]
fn monge_report_contents() {
    let v = json(&sample("certify", "monge.toml", &[]));
    assert_eq!(v["all_cartan"], true);
    let r = &v["report"];
    assert_eq!(r["point_count"], 3125);
    assert_eq!(r["counts"]["cartan"], 3125);
    assert!(r["points"].as_array().unwrap().iter().all(|p| p["det"].as_f64().unwrap().abs() == 2.0));
}

#[test]
fn involutive_report_names_the_growth() {
    let v = json(&sample("certify", "involutive.toml", &[]));
    let p = &v["report"]["points"][0];
    assert_eq!(p["status"], "NotCartan");
    assert_eq!(p["growth"], serde_json::json!([2, 2, 2]));
    assert_eq!(v["report"]["failures"].as_array().unwrap().len(), 32);
}

#[test]
fn malformed_expression_reports_its_location() {
    let out = sample("certify", "malformed.toml", &[]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("distribution.x[1]") && msg.contains("column 4"), "{msg}");
    assert!(out.stdout.is_empty());
}

#[test]
fn schema_errors_exit_with_config_status() {
    let grid = "[grid]\nlo = [0.0, 0.0]\nhi = [1.0, 1.0]\nsteps = [2, 2]\n";
    let cases = [
        // Unknown key.
        format!("[distribution]\nx = [\"1\", \"0\"]\ny = [\"0\", \"1\"]\ncolor = 3\n{grid}"),
        // Both declaration styles at once.
        format!("[distribution]\nx = [\"1\", \"0\"]\ny = [\"0\", \"1\"]\na = [\"0\", \"0\", \"0\"]\nb = [\"0\", \"0\", \"0\"]\n{grid}"),
        // Grid dimension differs from the chart.
        "[distribution]\nx = [\"1\", \"0\"]\ny = [\"0\", \"1\"]\n[grid]\nlo = [0.0]\nhi = [1.0]\nsteps = [2]\n".to_string(),
        // TOML syntax error.
        "[distribution\n".to_string(),
        // Missing section.
        "tol = 1e-9\n".to_string(),
        // Negative tolerance.
        format!("tol = -1.0\n[distribution]\nx = [\"1\", \"0\"]\ny = [\"0\", \"1\"]\n{grid}"),
    ];
    for text in &cases {
        let out = inline("certify", text, &[]);
        assert_eq!(out.status.code(), Some(2), "{text}\n{}", stderr(&out));
        assert!(!stderr(&out).is_empty());
    }
    let toml_err = stderr(&inline("certify", "[distribution\n", &[]));
    assert!(toml_err.contains("line 1"), "{toml_err}");
}

#[test]
fn connection_schema_errors() {
    let cases = [
        "[connection]\nbuiltin = \"sphere\"\n[criterion]\nlo = [0.0, 0.0]\nhi = [1.0, 1.0]\nsteps = [2, 2]\n",
        "[connection]\nbuiltin = \"torus_heisenberg\"\nalgebra = \"abelian\"\n[criterion]\nlo = [0.0, 0.0]\nhi = [1.0, 1.0]\nsteps = [2, 2]\n",
        "[connection]\nalgebra = \"abelian\"\na = [\"0\", \"0\", \"z\"]\nb = [\"x\", \"0\", \"0\"]\n[criterion]\nlo = [0.0, 0.0]\nhi = [1.0, 1.0]\nsteps = [2, 2]\n",
        "[connection]\nbuiltin = \"torus_heisenberg\"\n",
        "[connection]\nbuiltin = \"torus_heisenberg\"\n[suspension]\nmodel = \"abelian\"\n[suspension.grid]\nlo = [0.0, 0.0, 0.0, 0.0, 0.0]\nhi = [1.0, 1.0, 1.0, 1.0, 1.0]\nsteps = [2, 2, 2, 2, 2]\n",
        "[connection]\nstructure_constants = [[[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]], [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]], [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]]\na = [\"0\", \"0\", \"0\"]\nb = [\"x\", \"0\", \"0\"]\n[criterion]\nlo = [0.0, 0.0]\nhi = [1.0, 1.0]\nsteps = [2, 2]\n",
    ];
    for text in cases {
        let out = inline("connection", text, &[]);
        assert_eq!(out.status.code(), Some(2), "{text}\n{}", stderr(&out));
    }
}

#[test]
fn custom_structure_constants_run_the_criterion() {
    // so(3) given explicitly: [e1,e2] = e3 and cyclic.
    let mut c = [[[0.0f64; 3]; 3]; 3];
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        c[k][i][j] = 1.0;
        c[k][j][i] = -1.0;
    }
    let text = format!(
        "[connection]\nstructure_constants = {c:?}\na = [\"0\", \"0\", \"0\"]\nb = [\"x\", \"x^2/2\", \"x*y\"]\n[criterion]\nlo = [-0.5, -0.5]\nhi = [0.5, 0.5]\nsteps = [3, 3]\n"
    );
    let out = inline("connection", &text, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["algebra"], "custom");
    assert_eq!(v["criterion"]["points"].as_array().unwrap().len(), 9);
}

#[test]
fn evaluation_errors_exit_with_runtime_status() {
    let text = "[distribution]\nx = [\"1\", \"sqrt(x1)\", \"0\", \"0\", \"0\"]\ny = [\"0\", \"1\", \"x1\", \"0\", \"0\"]\n[grid]\nlo = [-1.0, 0.0, 0.0, 0.0, 0.0]\nhi = [1.0, 1.0, 1.0, 1.0, 1.0]\nsteps = [3, 2, 2, 1, 1]\n";
    let out = inline("certify", text, &[]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let v = json(&out);
    assert!(v["report"]["counts"]["error"].as_u64().unwrap() > 0);
    assert!(stderr(&out).contains("runtime error"));
}

#[test]
fn reports_are_byte_identical_across_threads() {
    for (command, name) in [
        ("certify", "monge.toml"),
        ("connection", "sphere_abelian.toml"),
        ("extend", "cext_table.toml"),
        ("topology", "s2xs3.toml"),
    ] {
        let one = sample(command, name, &["--threads", "1"]);
        let four = sample(command, name, &["--threads", "4"]);
        let again = sample(command, name, &["--threads", "4"]);
        assert!(!one.stdout.is_empty());
        assert_eq!(one.stdout, four.stdout, "{command} {name}");
        assert_eq!(four.stdout, again.stdout, "{command} {name}");
    }
}

#[test]
fn out_directory_and_formats() {
    let dir = tempfile::tempdir().unwrap();
    let both = dir.path().join("both");
    let out = sample("connection", "torus_heisenberg.toml", &["--out", both.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    for f in ["connection.json", "criterion.csv", "suspension.csv"] {
        assert!(both.join(f).is_file(), "{f}");
    }
    let csv = std::fs::read_to_string(both.join("criterion.csv")).unwrap();
    assert_eq!(csv.lines().count(), 33);
    assert!(csv.starts_with("index,x1,x2,holds,margin,relative_margin\n"));

    let json_only = dir.path().join("json");
    sample("certify", "involutive.toml", &["--out", json_only.to_str().unwrap(), "--format", "json"]);
    assert!(json_only.join("certify.json").is_file() && !json_only.join("certify.csv").exists());

    let csv_only = sample("extend", "cext_table.toml", &["--format", "csv"]);
    let text = String::from_utf8(csv_only.stdout).unwrap();
    assert!(text.starts_with("alpha,h,verdict,"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn tolerance_flag_resolves_the_boundary_case() {
    let coarse = sample("extend", "cone_near_boundary.toml", &[]);
    assert_eq!(json(&coarse)["verdict"]["status"], "Boundary");
    let fine = sample("extend", "cone_near_boundary.toml", &["--tol", "1e-9"]);
    assert_eq!(fine.status.code(), Some(0));
    let v = json(&fine);
    assert_eq!(v["verdict"]["status"], "Inside");
    assert_eq!(v["certificate_verified"], true);
    assert_eq!(sample("extend", "cone_inside.toml", &["--tol", "0"]).status.code(), Some(2));
}

#[test]
fn outside_cone_carries_a_separating_normal() {
    let v = json(&sample("extend", "cone_outside.toml", &[]));
    assert_eq!(v["verdict"]["status"], "Outside");
    assert_eq!(v["certificate_verified"], true);
    let n: Vec<f64> = v["verdict"]["normal"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(n[0] + n[1] - 0.5 * n[2] < 0.0);
}

#[test]
fn topology_reports() {
    let v = json(&sample("topology", "s5.toml", &[]));
    assert_eq!(v["decomposition"]["failed"], serde_json::json!(["Kervaire"]));
    assert_eq!(v["decomposition"]["kervaire"], 1);
    let v = json(&sample("topology", "smale_sum.toml", &[]));
    assert_eq!(v["smale"]["description"], "S^2xS^3 # M_3 # M_5");
    assert_eq!(v["rokhlin"]["all_pass"], true);
    let incomplete = inline("topology", "[manifold]\nopen = false\nspin = true\n", &[]);
    assert_eq!(incomplete.status.code(), Some(2));
    assert!(stderr(&incomplete).contains("half_p1"));
    let inconsistent = inline("topology", "[manifold]\nopen = false\nspin = true\nbetti = [1, 0, 0, 0, 1, 1]\nhalf_p1 = [12]\ne_squared = [12]\np1 = [24]\n", &[]);
    assert_eq!(inconsistent.status.code(), Some(2));
    assert_eq!(inline("topology", "[rokhlin]\np1 = [24]\n", &[]).status.code(), Some(1));
}

#[test]
fn missing_config_is_a_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_cartan")).arg("certify").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = sample("certify", "does_not_exist.toml", &[]);
    assert_eq!(out.status.code(), Some(2));
}
