use num_complex::Complex64;
use pseudotoric::geometry::ProductPoint;
use pseudotoric::model::*;
use pseudotoric::quadrature::{chain_area, Chain};
use pseudotoric::registry::Geometry;
use pseudotoric::torus::{build_torus, lagrangian_residual};
use pseudotoric::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn all() -> Vec<Geometry> {
    vec![
        Geometry::cp2(),
        Geometry::p1xp1(),
        Geometry::p1_power(3).unwrap(),
        Geometry::quadric(1.0).unwrap(),
        Geometry::flag(1.0).unwrap(),
    ]
}

#[test]
fn pencil_values() {
    let g = Geometry::cp2();
    let p = ProductPoint::single(vec![c(1.0, 0.0); 3]).unwrap();
    let v = pencil_value(&g.pencil, &p).unwrap();
    assert!(v.distance(&pseudotoric::HomogeneousPoint::from_real(&[1.0, 1.0]).unwrap()) < 1e-12);
    let base = ProductPoint::single(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
    assert_eq!(pencil_value(&g.pencil, &base), Err(Error::OnBaseSet));

    let q = Geometry::quadric(1.0).unwrap();
    let p = ProductPoint::single([1.0, -1.0, 1.0, 1.0, 0.0, 0.0].iter().map(|&x| c(x, 0.0)).collect()).unwrap();
    let v = pencil_value(&q.pencil, &p).unwrap();
    assert!(v.distance(&pseudotoric::HomogeneousPoint::from_real(&[-1.0, 1.0, 0.0]).unwrap()) < 1e-12);
    assert!(base_constraint_residual(&q.pencil, &v) < 1e-10);
}

#[test]
fn sections_lie_on_manifold_and_zero_level() {
    for g in all() {
        assert!(section_on_manifold(&g.ambient, &g.section).unwrap() < 1e-12, "{}", g.id);
        assert!(section_residuals(&g.section, &g.reduced_maps).unwrap() < 1e-10, "{}", g.id);
    }
}

#[test]
fn invariance_of_pencil() {
    for g in all() {
        for f in g.reduced_maps.iter().chain(&g.fiber.generators) {
            let r = check_invariance(&g.ambient, &g.pencil, f, 10, 7).unwrap();
            assert!(r < 1e-6, "{} {}: {r}", g.id, f.name);
        }
    }
    let g = Geometry::cp2();
    assert!(check_invariance(&g.ambient, &g.pencil, &g.companions[0], 10, 7).unwrap() > 1e-2);
}

#[test]
fn covering_degrees_and_branch_points() {
    let bases = [[c(1.0, 0.0), c(0.3, 0.2)], [c(0.7, -1.0), c(1.0, 0.0)], [c(2.0, 0.5), c(-1.0, 0.1)]];
    for g in all() {
        for q in bases {
            assert_eq!(covering_degree(&g.section, &g.pencil, q).unwrap(), g.section.covering_degree_d, "{}", g.id);
        }
        let bp = branch_points(&g.section, &g.pencil).unwrap();
        assert_eq!(bp.len(), g.section.branch_points.len(), "{}: {bp:?}", g.id);
        for b in &bp {
            assert!(
                g.section.branch_points.iter().any(|r| g.section.chordal(*r, b.param) < 1e-6),
                "{}: {:?}",
                g.id,
                b.param
            );
        }
    }
}

#[test]
fn deck_maps_preserve_pencil() {
    for g in all() {
        for tau in &g.section.involutions {
            for k in 0..20 {
                let s = c(0.3 + 0.1 * k as f64, -0.7 + 0.05 * k as f64);
                let a = pencil_value(&g.pencil, &g.section.point(Some(s)).unwrap()).unwrap();
                let b = pencil_value(&g.pencil, &g.section.point(tau.apply(Some(s))).unwrap()).unwrap();
                assert!(a.distance(&b) < 1e-9, "{} {s} {:?} {:?} {:?}", g.id, tau, a, b);
            }
        }
    }
}

#[test]
fn section_areas() {
    for g in all() {
        let p = &g.pieces;
        let areas = piece_areas(&g.ambient, &g.section, p.a, p.b, p.count, p.offset, 1e-7).unwrap();
        let total: f64 = areas.iter().sum();
        assert!((total - g.section.total_area_m).abs() < 1e-6, "{}: {areas:?}", g.id);
        for a in &areas {
            assert!((a - total / p.count as f64).abs() < 1e-6, "{}: {areas:?}", g.id);
        }
    }
}

#[test]
fn chekanov_loop_cp2() {
    let g = Geometry::cp2();
    let center = g.chekanov_center.unwrap();
    let lp = loop_with_disc_area(&g.ambient, &g.section, center, 1.0 / 3.0, 1e-6).unwrap();
    let a = chain_area(&g.ambient, &lp.disc_chain(&g.section), 1e-8).unwrap().value;
    assert!((a - 1.0 / 3.0).abs() < 2e-6);
    assert!(deck_orbit_disjoint(&lp, &g.section, BRANCH_MARGIN).disjoint);
    let bad = LoopSpec::circle(c(0.0, 0.0), 1.0);
    assert!(!deck_orbit_disjoint(&bad, &g.section, BRANCH_MARGIN).disjoint);
    let rev = chain_area(&g.ambient, &lp.reversed().disc_chain(&g.section), 1e-8).unwrap().value;
    assert!((rev + a).abs() < 1e-7);
}

#[test]
fn loop_search_reports_infeasible_targets() {
    let g = Geometry::cp2();
    match loop_with_disc_area(&g.ambient, &g.section, g.chekanov_center.unwrap(), 0.6, 1e-6) {
        Err(Error::Infeasible { max_area, .. }) => assert!(max_area < 0.5 + 1e-3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn half_conic_has_unit_area() {
    // fiber conic z0 z1 = λ z2² through [1 : λ t² : t], cut along |z0| = |z1|
    let g = Geometry::cp2();
    let lambda = c(0.5, 0.8);
    let r = lambda.norm().powf(-0.5);
    let ch = Chain::polar_disc(&[2], r, move |t: Complex64| {
        (vec![c(1.0, 0.0), lambda * t * t, t], vec![c(0.0, 0.0), lambda * t * 2.0, c(1.0, 0.0)])
    });
    let a = chain_area(&g.ambient, &ch, 1e-9).unwrap().value;
    assert!((a - 1.0).abs() < 1e-8, "{a}");
}

#[test]
fn torus_is_lagrangian_and_detects_perturbation() {
    let g = Geometry::cp2();
    let lp = loop_with_disc_area(&g.ambient, &g.section, g.chekanov_center.unwrap(), 1.0 / 3.0, 1e-6).unwrap();
    let t = build_torus(&g.ambient, &g.section, &g.fiber, &lp, &[0.0], &[64, 8]).unwrap();
    let r = lagrangian_residual(&g.ambient, &t).unwrap();
    assert!(r < 1e-6, "{r}");
    let mut bad = t.clone();
    let i = bad.index(&[5, 3]);
    let mut z = bad.points[i].flat();
    z[2] += c(0.05, 0.0);
    bad.points[i] = g.ambient.point(&z).unwrap();
    assert!(lagrangian_residual(&g.ambient, &bad).unwrap() > 1e-3);
}
