use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::certify::{
    basis_loops, bs_level, dist_to_z, intersection_index, is_bs_at, middle_case_check, monotonicity_certificate,
    period_vector,
};
use crate::error::{Error, Result};
use crate::model::{
    branch_clearance, branch_points, check_invariance, covering_degree, deck_orbit_disjoint, loop_with_disc_area,
    max_feasible_radius, piece_areas, section_on_manifold, section_residuals, standard_loop_with_disc_area, LoopSpec,
    SectionCurve, BRANCH_MARGIN,
};
use crate::poly::UniPoly;
use crate::quadrature::chain_area;
use crate::registry::Geometry;
use crate::symplectic::{poisson_bracket, MomentMap};
use crate::toric::{screen_relations, DivisorSet, ScreenRow, ToricRelation};
use crate::torus::{build_torus, lagrangian_residual};

use super::report::{
    BranchRow, CertificationReport, ExpectationCheck, FamilyReport, LoopInfo, MiddleCaseLine, Residuals, Stability,
};
use super::{expectation_for, Expectation, ScenarioId, ScenarioSpec, TorusKind};

const SEED: u64 = 0x5eed;
const BS_K_MAX: u32 = 12;
/// Generic base point of the pencil for the covering-degree count.
const GENERIC_BASE: [Complex64; 2] = [Complex64::new(1.0, 0.0), Complex64::new(0.3137, 0.2718)];

pub(crate) fn geometry_for(spec: &ScenarioSpec) -> Result<Geometry> {
    match spec.id {
        ScenarioId::Cp2Chekanov => Ok(Geometry::cp2()),
        ScenarioId::P1xp1Chekanov => Ok(Geometry::p1xp1()),
        ScenarioId::P1PowerN => Geometry::p1_power(spec.n),
        ScenarioId::Quadric4 | ScenarioId::Quadric4Family => Geometry::quadric(spec.t),
        ScenarioId::FlagF3 | ScenarioId::FlagFamily => Geometry::flag(spec.t),
    }
}

/// Branch points `p_1^+, p_2^+, p_3^+` of the conic over the three singular values.
fn quadric_center(i: usize) -> Complex64 {
    match i {
        1 => Complex64::new(0.0, 0.0),
        2 => Complex64::new(0.0, 1.0),
        _ => Complex64::new(1.0, 0.0),
    }
}

/// Scan along the meridian `arg s = π/n` through the middle of a covering
/// piece, equator first; keeps the point admitting the widest disc.
pub(crate) fn p1_power_center(section: &SectionCurve, n: usize) -> Complex64 {
    let arg = std::f64::consts::PI / n as f64;
    let mut best = (f64::NEG_INFINITY, Complex64::from_polar(1.0, arg));
    for j in 0..5 {
        let dphi = 0.05 * ((j + 1) / 2) as f64 * if j % 2 == 0 { 1.0 } else { -1.0 };
        let c = Complex64::from_polar((std::f64::consts::FRAC_PI_4 + 0.5 * dphi).tan(), arg);
        let r = max_feasible_radius(section, c, false);
        if r > best.0 + 1e-9 {
            best = (r, c);
        }
    }
    best.1
}

fn chekanov_center(g: &Geometry) -> Complex64 {
    g.chekanov_center.unwrap_or_else(|| p1_power_center(&g.section, g.section.covering_degree_d))
}

/// The line `[1 : 1 : i : i : u : u]` in the singular quadric `Q_0`.
fn quadric_limit_line() -> SectionCurve {
    let c = |z: Complex64| UniPoly::new(vec![z]);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let u = UniPoly::new(vec![Complex64::new(0.0, 0.0), one]);
    SectionCurve {
        name: "limit line".into(),
        dims: vec![5],
        coords: vec![c(one), c(one), c(i), c(i), u.clone(), u],
        covering_degree_d: 1,
        total_area_m: 1.0,
        branch_points: vec![],
        involutions: vec![],
        round_scale: 1.0,
    }
}

struct Stages<'a> {
    timings: &'a mut BTreeMap<String, f64>,
}

impl Stages<'_> {
    fn run<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> std::result::Result<T, String> {
        let start = Instant::now();
        let out = f();
        *self.timings.entry(name.to_string()).or_insert(0.0) += start.elapsed().as_secs_f64() * 1e3;
        out.map_err(|e| format!("{name}: {e}"))
    }
}

fn all_maps(g: &Geometry) -> Vec<MomentMap> {
    let mut maps: Vec<MomentMap> = Vec::new();
    for f in g.reduced_maps.iter().chain(&g.companions).chain(&g.fiber.generators).chain(&g.toric_maps) {
        if !maps.iter().any(|h| h.name == f.name) {
            maps.push(f.clone());
        }
    }
    maps
}

fn poisson_residual(g: &Geometry, samples: usize) -> Result<f64> {
    let m = &g.ambient;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let pts = (0..samples).map(|_| m.random_point(&mut rng)).collect::<Result<Vec<_>>>()?;
    let maps = all_maps(g);
    let vals = crate::par::map_slice(&pts, |p| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, f) in maps.iter().enumerate() {
            for h in &maps[i + 1..] {
                worst = worst.max(poisson_bracket(m, f, h, p)?.abs());
            }
        }
        Ok(worst)
    });
    vals.into_iter().try_fold(0.0f64, |a, v| Ok(a.max(v?)))
}

fn invariance_residual(g: &Geometry, samples: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for f in g.reduced_maps.iter().chain(&g.fiber.generators) {
        worst = worst.max(check_invariance(&g.ambient, &g.pencil, f, samples, SEED)?);
    }
    Ok(worst)
}

fn exceeds(errors: &mut Vec<String>, what: &str, value: f64, tol: f64) {
    if !(value < tol) {
        errors.push(format!("{what} residual {value:.3e} exceeds {tol:.1e}"));
    }
}

/// Outcome of the loop search: found, or the Chekanov search came back
/// infeasible (a certified answer for `chekanov_search`).
enum LoopOutcome {
    Found(LoopSpec, f64),
    Infeasible(f64),
}

fn find_loop(g: &Geometry, spec: &ScenarioSpec) -> Result<LoopOutcome> {
    let tol = spec.tolerances.area;
    let k = g.k() as f64;
    let (target, standard, center) = match spec.torus_kind {
        TorusKind::Chekanov | TorusKind::ChekanovSearch => (1.0 / k, false, chekanov_center(g)),
        TorusKind::Standard(j) if spec.id == ScenarioId::Quadric4 || spec.id == ScenarioId::Quadric4Family => {
            (j as f64 / 8.0 * g.section.total_area_m, true, quadric_center(spec.center))
        }
        TorusKind::Standard(_) => (1.0 / k, true, g.standard_center),
    };
    if let Some(lp) = &spec.loop_override {
        return Ok(LoopOutcome::Found(lp.clone(), target));
    }
    let found = if standard {
        standard_loop_with_disc_area(&g.ambient, &g.section, center, target, tol)
    } else {
        loop_with_disc_area(&g.ambient, &g.section, center, target, tol)
    };
    match found {
        Ok(lp) => Ok(LoopOutcome::Found(lp, target)),
        Err(Error::Infeasible { max_area, .. }) if spec.torus_kind == TorusKind::ChekanovSearch => {
            Ok(LoopOutcome::Infeasible(max_area))
        }
        Err(e) => Err(e),
    }
}

fn middle_case(
    g: &Geometry,
    spec: &ScenarioSpec,
    area: f64,
    chekanov: Option<(bool, Option<f64>)>,
) -> Result<MiddleCaseLine> {
    let section = &g.section;
    let rho =
        g.divisors.iter().map(|d| intersection_index(section, d).map(|x| x as i64)).collect::<Result<Vec<_>>>()?;
    let check = middle_case_check(&g.relation, &rho)?;
    let (constructible, max_area) = match chekanov {
        Some(c) => c,
        None => {
            match loop_with_disc_area(&g.ambient, section, chekanov_center(g), 1.0 / g.k() as f64, spec.tolerances.area)
            {
                Ok(_) => (true, None),
                Err(Error::Infeasible { max_area, .. }) => (false, Some(max_area)),
                Err(e) => return Err(e),
            }
        }
    };
    let limit = matches!(spec.id, ScenarioId::Quadric4 | ScenarioId::Quadric4Family)
        .then(|| intersection_index(&quadric_limit_line(), &g.d_plus))
        .transpose()?;
    Ok(MiddleCaseLine {
        lambda: g.relation.clone(),
        rho,
        check,
        index_boundary: intersection_index(section, &g.boundary_divisor)?,
        index_plus: intersection_index(section, &g.d_plus)?,
        km: (g.k() as f64 * area).round() as i64,
        chekanov_constructible: constructible,
        max_chekanov_area: max_area,
        limit_line_index: limit,
    })
}

fn pipeline(spec: &ScenarioSpec, g: &Geometry, r: &mut CertificationReport) -> std::result::Result<(), String> {
    let mut timings = BTreeMap::new();
    let out = pipeline_stages(spec, g, r, &mut Stages { timings: &mut timings });
    r.timings = timings;
    out
}

fn pipeline_stages(
    spec: &ScenarioSpec,
    g: &Geometry,
    r: &mut CertificationReport,
    st: &mut Stages,
) -> std::result::Result<(), String> {
    let tols = spec.tolerances;
    let m = &g.ambient;
    let section = &g.section;

    let sec_res =
        st.run("section", || Ok(section_on_manifold(m, section)?.max(section_residuals(section, &g.reduced_maps)?)))?;
    r.residuals.section = Some(sec_res);
    exceeds(&mut r.errors, "section", sec_res, tols.residual);

    r.covering_degree = Some(st.run("covering", || covering_degree(section, &g.pencil, GENERIC_BASE))?);
    r.branch_points = st
        .run("branch points", || branch_points(section, &g.pencil))?
        .into_iter()
        .map(|b| BranchRow { param: b.param, multiplicity: b.multiplicity, image: b.image.unit().coords })
        .collect();
    let pl = g.pieces;
    r.piece_areas = st.run("pieces", || piece_areas(m, section, pl.a, pl.b, pl.count, pl.offset, tols.area / 10.0))?;
    let area: f64 = r.piece_areas.iter().sum();
    r.section_area = Some(area);

    let poisson = st.run("poisson", || poisson_residual(g, spec.samples))?;
    r.residuals.poisson = Some(poisson);
    exceeds(&mut r.errors, "poisson", poisson, tols.residual);
    let inv = st.run("invariance", || invariance_residual(g, spec.samples))?;
    r.residuals.invariance = Some(inv);
    exceeds(&mut r.errors, "invariance", inv, tols.residual);

    let outcome = st.run("loop search", || find_loop(g, spec))?;
    let (lp, target) = match outcome {
        LoopOutcome::Infeasible(max_area) => {
            r.middle_case = Some(st.run("middle case", || middle_case(g, spec, area, Some((false, Some(max_area)))))?);
            r.verdict = "no-bs-can-loop".into();
            return Ok(());
        }
        LoopOutcome::Found(lp, target) => (lp, target),
    };
    let disc_area = st.run("loop search", || Ok(chain_area(m, &lp.disc_chain(section), tols.area / 10.0)?.value))?;
    let chekanov = !matches!(spec.torus_kind, TorusKind::Standard(_));
    let (clearance, deck_disjoint) = if chekanov {
        let d = deck_orbit_disjoint(&lp, section, BRANCH_MARGIN);
        if !d.disjoint {
            r.errors.push(format!("loop meets its deck orbit (distance {:.3e})", d.min_distance));
        }
        (d.min_distance, Some(d.disjoint))
    } else {
        (branch_clearance(&lp, section), None)
    };
    r.loop_info = Some(LoopInfo { spec: lp.clone(), target_area: target, disc_area, clearance, deck_disjoint });

    let mut shape = vec![spec.grid[0]];
    shape.extend(std::iter::repeat_n(spec.grid[1], g.fiber.generators.len()));
    let torus = st.run("torus", || build_torus(m, section, &g.fiber, &lp, &[0.0], &shape))?;
    let lag = st.run("lagrangian", || lagrangian_residual(m, &torus))?;
    r.residuals.lagrangian = Some(lag);
    exceeds(&mut r.errors, "lagrangian", lag, tols.residual);
    let first_return = torus.construction.first_return.iter().cloned().fold(0.0, f64::max);
    exceeds(&mut r.errors, "first-return", first_return, tols.residual);

    let pv = st.run("periods", || period_vector(m, &basis_loops(section, &g.fiber, &torus)?, tols.area / 10.0))?;
    r.residuals.period_recheck = Some(pv.recheck.iter().cloned().fold(0.0, f64::max));
    r.periods = pv.values.clone();
    r.raw_periods = pv.raw;
    r.bs_level = bs_level(&r.periods, BS_K_MAX, tols.bs).level;
    r.bs_canonical = Some(is_bs_at(&r.periods, g.k(), tols.bs));

    let cert = st.run("maslov", || {
        monotonicity_certificate(
            m,
            section,
            &g.fiber.generators,
            &g.volume_chart,
            &g.boundary_divisor,
            &lp,
            disc_area,
            &r.periods,
            tols.bs,
        )
    })?;
    r.residuals.winding = Some(cert.winding_residual);
    if cert.winding_residual > tols.winding {
        r.errors.push(format!("winding residual {:.3e} exceeds {:.1e}", cert.winding_residual, tols.winding));
    }
    r.maslov_degree = Some(cert.degree);
    r.expected_degree = Some(cert.expected);
    r.verdict = serde_json::to_value(cert.verdict).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    r.maslov = Some(cert);

    let found = chekanov.then_some((true, None));
    r.middle_case = Some(st.run("middle case", || middle_case(g, spec, area, found))?);
    Ok(())
}

fn empty_report(spec: &ScenarioSpec) -> CertificationReport {
    CertificationReport {
        scenario: spec.id.name().into(),
        spec: spec.clone(),
        k: 0,
        section_area: None,
        covering_degree: None,
        branch_points: vec![],
        piece_areas: vec![],
        loop_info: None,
        periods: vec![],
        raw_periods: vec![],
        bs_level: None,
        bs_canonical: None,
        maslov: None,
        maslov_degree: None,
        expected_degree: None,
        verdict: String::new(),
        residuals: Residuals::default(),
        middle_case: None,
        warnings: vec![],
        errors: vec![],
        expectation: ExpectationCheck::default(),
        timings: BTreeMap::new(),
    }
}

/// Build, residual checks, periods, Bohr-Sommerfeld level, Maslov
/// certificate and middle-case line. Only an invalid spec is an `Err`;
/// failures of later stages are recorded in the report with verdict `failed`.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<CertificationReport> {
    spec.validate()?;
    if spec.id.is_family() {
        return Err(Error::Invalid(format!("{} is a family; use run_family", spec.id.name())));
    }
    let mut r = empty_report(spec);
    let start = Instant::now();
    match geometry_for(spec) {
        Ok(g) => {
            r.k = g.k();
            r.warnings = g.warnings.clone();
            if let Err(e) = pipeline(spec, &g, &mut r) {
                r.errors.push(e);
            }
        }
        Err(e) => r.errors.push(format!("geometry: {e}")),
    }
    if !r.errors.is_empty() {
        r.verdict = "failed".into();
    }
    r.timings.insert("total".into(), start.elapsed().as_secs_f64() * 1e3);
    r.expectation = compare(&r, &spec.expectation_key());
    Ok(r)
}

fn compare(r: &CertificationReport, key: &str) -> ExpectationCheck {
    let Some(e) = expectation_for(key) else {
        return ExpectationCheck { key: key.into(), found: false, matched: r.errors.is_empty(), mismatches: vec![] };
    };
    let mut bad = Vec::new();
    check_against(r, &e, &mut bad);
    bad.extend(r.errors.iter().map(|e| format!("error: {e}")));
    ExpectationCheck { key: key.into(), found: true, matched: bad.is_empty(), mismatches: bad }
}

fn mismatch<T: PartialEq + std::fmt::Debug>(bad: &mut Vec<String>, what: &str, want: &Option<T>, got: Option<T>) {
    if let Some(w) = want {
        if got.as_ref() != Some(w) {
            bad.push(format!("{what}: expected {w:?}, got {got:?}"));
        }
    }
}

fn near(bad: &mut Vec<String>, what: &str, want: Option<f64>, got: Option<f64>, tol: f64) {
    if let Some(w) = want {
        if !got.map(|g| (g - w).abs() < tol).unwrap_or(false) {
            bad.push(format!("{what}: expected {w} ± {tol:.0e}, got {got:?}"));
        }
    }
}

fn check_against(r: &CertificationReport, e: &Expectation, bad: &mut Vec<String>) {
    near(bad, "section area", e.section_area, r.section_area, 1e-6);
    mismatch(bad, "covering degree", &e.covering_degree, r.covering_degree);
    mismatch(bad, "branch points", &e.branch_points, (!r.branch_points.is_empty()).then_some(r.branch_points.len()));
    if let Some(w) = e.piece_area {
        for (i, a) in r.piece_areas.iter().enumerate() {
            near(bad, &format!("piece {}", i + 1), Some(w), Some(*a), 1e-5);
        }
    }
    near(bad, "disc area", e.disc_area, r.loop_info.as_ref().map(|l| l.disc_area), 1e-5);
    if let Some(w) = &e.periods {
        let ok = w.len() == r.periods.len() && w.iter().zip(&r.periods).all(|(a, b)| dist_to_z(a - b) < 1e-5);
        if !ok {
            bad.push(format!("periods: expected {w:?} mod 1, got {:?}", r.periods));
        }
    }
    mismatch(bad, "BS level", &e.bs_level, r.bs_level);
    mismatch(bad, "BS at k", &e.bs_canonical, r.bs_canonical);
    mismatch(bad, "Maslov degree", &e.maslov_degree, r.maslov_degree);
    mismatch(bad, "verdict", &e.verdict, Some(r.verdict.clone()));
    let mc = r.middle_case.as_ref();
    mismatch(bad, "middle case", &e.middle, mc.map(|m| m.check.holds));
    mismatch(bad, "middle-case margin", &e.margin, mc.map(|m| m.check.margin));
    mismatch(bad, "limit line index", &e.limit_line_index, mc.and_then(|m| m.limit_line_index));
}

fn base_id(id: ScenarioId) -> ScenarioId {
    match id {
        ScenarioId::Quadric4Family => ScenarioId::Quadric4,
        ScenarioId::FlagFamily => ScenarioId::FlagF3,
        other => other,
    }
}

/// One report per `t`, each identical to the single run at that `t`, and a
/// stability summary over the grid.
pub fn run_family(spec: &ScenarioSpec) -> Result<FamilyReport> {
    spec.validate()?;
    if spec.t_grid.is_empty() {
        return Err(Error::Invalid("empty t-grid".into()));
    }
    let specs: Vec<ScenarioSpec> =
        spec.t_grid.iter().map(|&t| ScenarioSpec { id: base_id(spec.id), t, ..spec.clone() }).collect();
    let reports = crate::par::map_slice(&specs, run_scenario).into_iter().collect::<Result<Vec<_>>>()?;
    let stability = stability(&reports);
    Ok(FamilyReport { scenario: spec.id.name().into(), t_grid: spec.t_grid.clone(), reports, stability })
}

fn stability(reports: &[CertificationReport]) -> Stability {
    let mut violations = Vec::new();
    let first = &reports[0];
    let mut degree_constant = true;
    let mut bs_level_constant = true;
    let mut spread: f64 = 0.0;
    for r in reports {
        if r.failed() {
            violations.push(format!("t = {}: run failed", r.spec.t));
        }
        if r.maslov_degree.is_none() || r.maslov_degree != first.maslov_degree {
            degree_constant = false;
            violations.push(format!(
                "t = {}: degree {:?} vs {:?} at t = {}",
                r.spec.t, r.maslov_degree, first.maslov_degree, first.spec.t
            ));
        }
        if r.bs_level != first.bs_level {
            bs_level_constant = false;
            violations.push(format!("t = {}: BS level {:?} vs {:?}", r.spec.t, r.bs_level, first.bs_level));
        }
        if r.periods.len() != first.periods.len() {
            spread = f64::INFINITY;
        } else {
            for (a, b) in r.periods.iter().zip(&first.periods) {
                spread = spread.max(dist_to_z(a - b));
            }
        }
    }
    if !(spread < 1e-4) {
        violations.push(format!("periods move by {spread:.3e} across the grid"));
    }
    let stable = violations.is_empty();
    Stability { degree_constant, bs_level_constant, period_spread: spread, stable, violations }
}

/// Middle-case table for the relation of a scenario and its reverse.
pub fn screen_scenario(spec: &ScenarioSpec) -> Result<Vec<ScreenRow>> {
    spec.validate()?;
    let g = geometry_for(spec)?;
    let toric = !g.toric_maps.is_empty();
    let maps = if toric { &g.toric_maps } else { &g.fiber.generators };
    let d = DivisorSet::new(g.divisor_names.clone(), g.divisors.clone(), maps, &g.section.dims, toric)?;
    let rel = ToricRelation::new(g.relation.clone());
    let rev = ToricRelation::new(g.relation.iter().map(|x| -x).collect());
    screen_relations(&d, &[rel, rev], &g.section)
}
