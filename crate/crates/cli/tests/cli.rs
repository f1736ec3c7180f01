use std::process::{Command, Output};

fn rispace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rispace")).args(args).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn identify_lorentz_couple() {
    let o = rispace(&[
        "identify",
        "--couple",
        r#"{"x0":{"kind":"lorentz","p":1,"q":1},"x1":{"kind":"lorentz","p":2,"q":2}}"#,
        "--theta",
        "0.5",
        "--q",
        "1",
        "--alpha",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = stdout_json(&o);
    assert_eq!(v["case"], "intermediate");
    assert_eq!(v["space"]["kind"], "lorentz_zygmund");
    assert!((v["space"]["p"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-12);
    assert_eq!(v["space"]["q"], 1.0);
    assert_eq!(v["space"]["lambda"], 0.0);
}

#[test]
fn norm_of_unit_indicator() {
    let o = rispace(&["norm", "--function", "[[1, 1]]", "--space", r#"{"kind":"lebesgue","p":2}"#]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["norm"], 1.0);
}

#[test]
fn norm_reads_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.json");
    let s = dir.path().join("s.json");
    std::fs::write(&f, "[[3, 0.25]]").unwrap();
    std::fs::write(&s, r#"{"kind":"lorentz","p":2,"q":"inf"}"#).unwrap();
    let o = rispace(&["norm", "--function", f.to_str().unwrap(), "--space", s.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // sup_t t^{1/2} f_*(t) = 3 · 0.25^{1/2}
    assert!((stdout_json(&o)["norm"].as_f64().unwrap() - 1.5).abs() < 1e-12);
}

#[test]
fn solve_one_dimensional_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = rispace(&["solve", "--dim", "1", "--p", "3", "--f", "const:1", "--cells", "1024", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let want = 1.0 / (3.0 * 2f64.sqrt());
    let got = stdout_json(&o)["max_u"].as_f64().unwrap();
    assert!((got - want).abs() / want < 0.01, "{got}");
    for name in ["solution.json", "gradient.json", "summary.json"] {
        assert!(out.join(name).is_file(), "{name}");
    }
}

#[test]
fn kfunc_csv() {
    let o = rispace(&[
        "kfunc",
        "--function",
        "[[2, 0.5], [1, 0.5]]",
        "--couple",
        r#"{"x0":{"kind":"lebesgue","p":1},"x1":{"kind":"lebesgue","p":"inf"}}"#,
        "--t",
        "0.25,1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout), "t,k\n0.25,0.5\n1,1.5\n");
}

#[test]
fn malformed_config_names_the_field() {
    let o = rispace(&["holder", "--config", r#"{"kind":"holder","p":3,"grid":{"cells":"many"}}"#]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("grid.cells"), "{}", stderr(&o));
}

#[test]
fn exponent_relation_violation_is_a_usage_error() {
    let o = rispace(&["table", "--config", r#"{"kind":"table","p":1.5,"variant":"small_p","interp":{"k":1.1}}"#]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("interp.k"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(rispace(&["bogus"]).status.code(), Some(1));
    assert_eq!(rispace(&["identify", "--theta", "0.5"]).status.code(), Some(1));
    assert_eq!(rispace(&["--help"]).status.code(), Some(0));
}

#[test]
fn failed_check_exits_two() {
    let cfg = r#"{"kind":"table","p":3,"samples":4,"grid":{"cells":12},"interp":{"k":1.1},"tolerances":{"spread":1.0}}"#;
    let o = rispace(&["table", "--config", cfg]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = rispace(&[
        "verify",
        "equivalence",
        "--a",
        r#"{"kind":"lebesgue","p":1}"#,
        "--b",
        r#"{"kind":"lebesgue","p":2}"#,
        "--budget",
        "1.01",
        "--count",
        "50",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

fn mask_seconds(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn experiment_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"kind":"holder","p":3,"samples":6,"grid":{"cells":12,"refine":16}}"#;
    let mut payloads = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        let o = rispace(&["holder", "--config", cfg, "--seed", "5", "--out", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        payloads.push(mask_seconds(&std::fs::read_to_string(&path).unwrap()));
    }
    assert_eq!(payloads[0], payloads[1]);
    assert!(payloads[0].starts_with("experiment,config_hash,sample_id,norm_src,norm_tgt,ratio,pass"));
    let other = rispace(&["holder", "--config", cfg, "--seed", "6"]);
    assert_ne!(mask_seconds(&String::from_utf8_lossy(&other.stdout)), payloads[0]);
}

#[test]
fn json_output_mirrors_csv() {
    let cfg = r#"{"kind":"bounds","p":1.5,"samples":1,"scales":[1,10]}"#;
    let o = rispace(&["bounds", "--config", cfg, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = stdout_json(&o);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows[0]["experiment"], "bounds_homogeneity");
    assert!(rows.iter().any(|r| r["sample_id"] == "homogeneity" && r["pass"] == true));
}
