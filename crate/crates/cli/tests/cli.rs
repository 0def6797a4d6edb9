use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pseudotoric"))
}

#[test]
fn list_prints_every_scenario() {
    let out = bin().arg("list").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ["cp2_chekanov", "p1xp1_chekanov", "p1_power_n", "quadric4", "flag_f3", "quadric4_family", "flag_family"]
    {
        assert!(text.contains(id), "{id} missing");
    }
}

#[test]
fn cp2_run_writes_json_and_figure() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("cp2.json");
    let figure = dir.path().join("cp2.svg");
    let out = bin()
        .args(["run", "--scenario", "cp2_chekanov", "--format", "json", "--report"])
        .arg(&report)
        .arg("--figure")
        .arg(&figure)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["verdict"], "monotone");
    assert_eq!(v["bs_level"], 3);
    assert_eq!(v["maslov_degree"], 1);
    let svg = std::fs::read_to_string(&figure).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert_eq!(svg.matches(r#"class="branch-point""#).count(), 2);
}

#[test]
fn invalid_input_exits_with_two() {
    for args in [
        vec!["run", "--scenario", "cp3"],
        vec!["run", "--scenario", "p1_power_n", "--n", "1"],
        vec!["run", "--scenario", "quadric4", "--t", "0.01"],
        vec!["run", "--scenario", "quadric4", "--torus-kind", "standard_7"],
        vec!["family", "--scenario", "quadric4_family", "--t-grid", "0.5,2"],
        vec!["run", "--scenario", "cp2_chekanov", "--format", "xml"],
        vec!["bogus"],
    ] {
        let out = bin().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let report = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"scenario": "quadric4", "params": {{"torus_kind": "standard_2"}}, "tolerances": {{"bs": 1e-4}},
                "output": {{"report": {:?}, "format": "csv"}}}}"#,
            report.display().to_string()
        ),
    )
    .unwrap();
    let out = bin().arg("run").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&report).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("scenario,t,n,torus_kind,k,"));
    assert!(lines[1].contains(",monotone,"));
}

#[test]
fn screen_prints_the_middle_case_table() {
    let out = bin().args(["screen", "--scenario", "quadric4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[-1, -1, 1, 1]"));
    assert!(text.contains("[2, 2, 2, 2]"));
}

#[test]
fn diverging_certification_exits_with_one() {
    // the diagonal conic of the flag has area 4, so a Chekanov loop of area 1/2
    // exists where the expectation table records none
    let out = bin()
        .args(["run", "--scenario", "flag_f3", "--torus-kind", "chekanov_search", "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["expectation"]["matched"], false);
    assert!(String::from_utf8_lossy(&out.stderr).contains("diverged"));
}
