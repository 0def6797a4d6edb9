use pseudotoric::scenario::*;

fn spec(id: ScenarioId) -> ScenarioSpec {
    ScenarioSpec::new(id)
}

#[test]
fn json_round_trip_and_determinism() {
    let a = run_scenario(&spec(ScenarioId::Cp2Chekanov)).unwrap();
    let json = render_report(&a, Format::Json).unwrap();
    let back: CertificationReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, a);
    let b = run_scenario(&spec(ScenarioId::Cp2Chekanov)).unwrap();
    let strip = |r: &CertificationReport| render_report(&r.without_timings(), Format::Json).unwrap();
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(a.verdict, "monotone");
    assert!(a.expectation.matched, "{:?}", a.expectation);
}

#[test]
fn quadric_report_carries_substitution_warnings_and_figure() {
    let r = run_scenario(&spec(ScenarioId::Quadric4).with_kind(TorusKind::Standard(2))).unwrap();
    assert!(r.warnings.iter().any(|w| w.contains("z4*z5")));
    assert!(r.warnings.iter().any(|w| w.contains("|z4|^2-|z5|^2")));
    let svg = render_svg(&r).unwrap();
    assert_eq!(svg.matches(r#"class="branch-point""#).count(), 6);
    assert_eq!(svg.matches(r#"class="piece""#).count(), 4);
    assert_eq!(svg.matches(r#"class="deck-image""#).count(), 3);
    assert_eq!(svg.matches(r#"class="loop""#).count(), 1);
    assert_eq!(r.middle_case.as_ref().unwrap().limit_line_index, Some(2));
}

#[test]
fn single_point_family_matches_single_run() {
    let mut s = spec(ScenarioId::Quadric4Family);
    s.t_grid = vec![1.0];
    let fam = run_family(&s).unwrap();
    let single = run_scenario(&ScenarioSpec { id: ScenarioId::Quadric4, ..s.clone() }).unwrap();
    assert_eq!(fam.reports.len(), 1);
    assert_eq!(fam.reports[0].without_timings(), single.without_timings());
    assert!(fam.stability.stable);

    let csv = render_family(&fam, Format::Csv).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_COLUMNS.join(","));
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1].split(',').count(), CSV_COLUMNS.len());
}

#[test]
fn invalid_specs_are_rejected() {
    let mut s = spec(ScenarioId::P1PowerN);
    s.n = 1;
    assert!(run_scenario(&s).is_err());
    let mut s = spec(ScenarioId::Quadric4);
    s.t = 0.01;
    assert!(run_scenario(&s).is_err());
    assert!(spec(ScenarioId::Cp2Chekanov).with_kind(TorusKind::Standard(1)).validate().is_err());
    assert!(TorusKind::parse("standard_4").is_err());
    assert!(ScenarioId::parse("cp3").is_err());
    let mut s = spec(ScenarioId::FlagFamily);
    s.t_grid = vec![0.5, 0.0];
    assert!(run_family(&s).is_err());
    assert!(run_scenario(&spec(ScenarioId::FlagFamily)).is_err());
}

#[test]
fn config_file_applies_over_defaults() {
    let cfg = ConfigFile::parse(
        r#"{"scenario": "quadric4", "params": {"t": 0.5, "torus_kind": "standard_3", "center": 2},
            "tolerances": {"area": 1e-7}, "output": {"format": "csv"}}"#,
    )
    .unwrap();
    let mut s = spec(ScenarioId::parse(cfg.scenario.as_deref().unwrap()).unwrap());
    cfg.apply(&mut s).unwrap();
    assert_eq!(s.t, 0.5);
    assert_eq!(s.torus_kind, TorusKind::Standard(3));
    assert_eq!(s.center, 2);
    assert_eq!(s.tolerances.area, 1e-7);
    assert_eq!(s.tolerances.bs, 1e-4);
    assert!(s.validate().is_ok());
    assert!(ConfigFile::parse("{\"params\": 3}").is_err());
}

#[test]
fn expectation_table_covers_every_run_key() {
    let mut keys = vec![
        "cp2_chekanov".to_string(),
        "p1xp1_chekanov".into(),
        "flag_f3/chekanov_search".into(),
        "flag_f3/standard_1".into(),
    ];
    for n in 2..=4 {
        keys.push(format!("p1_power_{n}"));
    }
    keys.push("quadric4/chekanov".into());
    for k in 1..=3 {
        keys.push(format!("quadric4/standard_{k}"));
    }
    for k in keys {
        assert!(expectation_for(&k).is_some(), "{k}");
    }
}

#[test]
fn screen_table_for_cp2() {
    let rows = screen_scenario(&spec(ScenarioId::Cp2Chekanov)).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].rho, vec![1, 1, 1]);
    assert!(rows[0].middle);
    assert_eq!(rows[0].margin, 1);
}
