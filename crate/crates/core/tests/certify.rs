use num_complex::Complex64;
use pseudotoric::certify::*;
use pseudotoric::model::*;
use pseudotoric::registry::Geometry;
use pseudotoric::torus::build_torus;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn certificate(g: &Geometry, lp: &LoopSpec, area: f64, periods: &[f64]) -> MaslovReport {
    monotonicity_certificate(
        &g.ambient,
        &g.section,
        &g.fiber.generators,
        &g.volume_chart,
        &g.boundary_divisor,
        lp,
        area,
        periods,
        1e-4,
    )
    .unwrap()
}

#[test]
fn cp2_chekanov_and_clifford() {
    let g = Geometry::cp2();
    let lp = loop_with_disc_area(&g.ambient, &g.section, g.chekanov_center.unwrap(), 1.0 / 3.0, 1e-7).unwrap();
    let t = build_torus(&g.ambient, &g.section, &g.fiber, &lp, &[0.0], &[64, 8]).unwrap();
    let loops = basis_loops(&g.section, &g.fiber, &t).unwrap();
    let pv = period_vector(&g.ambient, &loops, 1e-7).unwrap();
    assert!((pv.values[0] - 1.0 / 3.0).abs() < 1e-5);
    assert!(dist_to_z(pv.values[1]) < 1e-5);
    let r = certificate(&g, &lp, 1.0 / 3.0, &pv.values);
    assert_eq!(r.degree, 1);
    assert_eq!(r.verdict, Verdict::Monotone);

    let cl = LoopSpec::circle(c(0.0, 0.0), 1.0 / 2f64.sqrt());
    let r = certificate(&g, &cl, 1.0 / 3.0, &[1.0 / 3.0, 0.0]);
    assert_eq!(r.degree, 1);
}

#[test]
fn quadric_degrees() {
    let g = Geometry::quadric(1.0).unwrap();
    // degree 2 for every standard loop; k·a = k only matches at k = 2
    for k in 1..=3 {
        let a = k as f64 / 4.0;
        let lp = standard_loop_with_disc_area(&g.ambient, &g.section, g.standard_center, a, 1e-7).unwrap();
        let t = build_torus(&g.ambient, &g.section, &g.fiber, &lp, &[0.0], &[64, 8, 8, 8]).unwrap();
        assert!(pseudotoric::torus::lagrangian_residual(&g.ambient, &t).unwrap() < 1e-6);
        let pv = period_vector(&g.ambient, &basis_loops(&g.section, &g.fiber, &t).unwrap(), 1e-7).unwrap();
        assert!(dist_to_z(pv.values[0] - a) < 1e-5);
        assert!(is_bs_at(&pv.values, 4, 1e-4));
        let r = certificate(&g, &lp, a, &pv.values);
        assert_eq!(r.degree, 2);
        let want = if k == 2 { Verdict::Monotone } else { Verdict::NonMonotone };
        assert_eq!(r.verdict, want, "k = {k}");
    }
    let lp = loop_with_disc_area(&g.ambient, &g.section, g.chekanov_center.unwrap(), 0.25, 1e-7).unwrap();
    let r = certificate(&g, &lp, 0.25, &[0.25, 0.0, 0.0, 0.0]);
    assert_eq!(r.degree, 1);
}

#[test]
fn bs_level_examples() {
    assert_eq!(bs_level(&[1.0 / 3.0, 0.0], 12, 1e-4).level, Some(3));
    assert_eq!(bs_level(&[0.5, 0.0, 0.0], 12, 1e-4).level, Some(2));
    // brute force over every admissible level
    let p = [0.353, 0.0];
    let fits = (1..=64).any(|k: u32| {
        p.iter().all(|x| {
            let y = k as f64 * x;
            (y - y.round()).abs() < 1e-4
        })
    });
    assert!(!fits);
    assert_eq!(bs_level(&p, 64, 1e-4).level, None);
}

fn toric_frame(g: &Geometry, p: &pseudotoric::geometry::ProductPoint) -> Vec<pseudotoric::geometry::TangentVector> {
    g.toric_maps.iter().map(|f| pseudotoric::symplectic::hamiltonian_field(&g.ambient, f, p).unwrap()).collect()
}

fn cp2_form(g: &Geometry) -> MeromorphicVolumeForm {
    MeromorphicVolumeForm::new(&g.ambient, g.volume_chart.clone(), g.boundary_divisor.clone())
}

#[test]
fn volume_form_is_alternating() {
    let g = Geometry::cp2();
    let omega = cp2_form(&g);
    let p = pseudotoric::geometry::ProductPoint::from_flat(&g.section.dims, &g.section.eval(c(0.4, 0.3))).unwrap();
    let frame = toric_frame(&g, &p);
    let v = volume_form_value(&omega, &frame).unwrap();
    assert!(v.norm() > 1e-3);
    let swapped = volume_form_value(&omega, &[frame[1].clone(), frame[0].clone()]).unwrap();
    assert!((v + swapped).norm() < 1e-12 * v.norm());
    let repeated = volume_form_value(&omega, &[frame[0].clone(), frame[0].clone()]).unwrap();
    assert!(repeated.norm() < 1e-12 * v.norm());
}

#[test]
fn toric_frame_along_a_fiber_circle_does_not_wind() {
    let g = Geometry::cp2();
    let omega = cp2_form(&g);
    let p = pseudotoric::geometry::ProductPoint::from_flat(&g.section.dims, &g.section.eval(c(0.4, 0.3))).unwrap();
    let f1 = &g.reduced_maps[0];
    let mut moduli = Vec::new();
    let w = maslov_degree(&omega, |theta| Ok(toric_frame(&g, &f1.circle_action(&p, theta / std::f64::consts::TAU))))
        .unwrap();
    assert_eq!(w.degree(), 0);
    for i in 0..16 {
        let q = f1.circle_action(&p, i as f64 / 16.0);
        moduli.push(volume_form_value(&omega, &toric_frame(&g, &q)).unwrap().norm());
    }
    assert!(moduli.iter().all(|m| (m - moduli[0]).abs() < 1e-9 * moduli[0]));
}

#[test]
fn intersection_indices() {
    let g = Geometry::cp2();
    assert_eq!(intersection_index(&g.section, &g.boundary_divisor).unwrap(), 3);
    assert_eq!(intersection_index(&g.section, &g.d_plus).unwrap(), 2);
    // the diagonal conic has bidegree (2, 2), so a (2, 2) divisor meets it 8 times
    let g = Geometry::flag(1.0).unwrap();
    let n = intersection_index(&g.section, &g.boundary_divisor).unwrap();
    assert_eq!(n, argument_principle_count(&g, 50.0));
    assert_eq!(n, 8);
}

/// Zeros of `D_b ∘ Σ` on the whole sphere by the argument principle: inside
/// `|s| = r` directly, and near infinity through `w⁸ D(Σ(1/w))`, which is
/// regular at `w = 0` for a (2, 2) divisor on a conic.
fn argument_principle_count(g: &Geometry, r: f64) -> usize {
    let winding = |f: &dyn Fn(Complex64) -> Complex64, rad: f64| {
        let m = 20000;
        let at = |i: usize| f(Complex64::from_polar(rad, std::f64::consts::TAU * i as f64 / m as f64));
        let mut prev = at(0);
        let mut total = 0.0;
        for i in 1..=m {
            let cur = at(i % m);
            total += (cur / prev).arg();
            prev = cur;
        }
        (total / std::f64::consts::TAU).round() as i64
    };
    let inner = winding(&|s| g.boundary_divisor.eval(&g.section.eval(s)), r);
    let outer = winding(&|w| g.boundary_divisor.eval(&g.section.eval(1.0 / w)) * w.powi(8), 1.0 / r);
    (inner + outer) as usize
}

#[test]
fn middle_case_examples() {
    let m = middle_case_check(&[1, 1, -2], &[1, 1, 1]).unwrap();
    assert!(m.holds);
    assert_eq!(m.margin, 1);
    let g = Geometry::quadric(1.0).unwrap();
    let rho: Vec<i64> = g.divisors.iter().map(|d| intersection_index(&g.section, d).unwrap() as i64).collect();
    let m = middle_case_check(&g.relation, &rho).unwrap();
    assert!(m.holds);
    assert_eq!(m.margin, 4);
    assert!(middle_case_check(&[1, -1], &[1]).is_err());
    assert!(middle_case_check(&[1, -1], &[1, -1]).is_err());
}
