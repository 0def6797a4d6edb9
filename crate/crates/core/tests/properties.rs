use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pseudotoric::certify::*;
use pseudotoric::geometry::{tangent_basis, Chart, TangentVector};
use pseudotoric::model::{check_invariance, LoopSpec};
use pseudotoric::quadrature::{area_at_level, Chain};
use pseudotoric::registry::Geometry;
use pseudotoric::symplectic::{flow, poisson_bracket, MomentMap};
use pseudotoric::AmbientSpace;

fn geometries() -> Vec<Geometry> {
    vec![
        Geometry::cp2(),
        Geometry::p1xp1(),
        Geometry::p1_power(3).unwrap(),
        Geometry::quadric(0.5).unwrap(),
        Geometry::flag(0.5).unwrap(),
    ]
}

fn commuting_maps(g: &Geometry) -> Vec<MomentMap> {
    let mut maps: Vec<MomentMap> = Vec::new();
    for f in g.reduced_maps.iter().chain(&g.companions).chain(&g.fiber.generators).chain(&g.toric_maps) {
        if !maps.iter().any(|h| h.name == f.name) {
            maps.push(f.clone());
        }
    }
    maps
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn declared_maps_poisson_commute(seed in any::<u64>(), gi in 0usize..5) {
        let g = &geometries()[gi];
        let p = g.ambient.random_point(&mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let maps = commuting_maps(g);
        for (i, f) in maps.iter().enumerate() {
            for h in &maps[i + 1..] {
                let b = poisson_bracket(&g.ambient, f, h, &p).unwrap();
                prop_assert!(b.abs() < 1e-6, "{{{}, {}}} = {b:e} on {}", f.name, h.name, g.id);
            }
        }
    }

    #[test]
    fn reduced_maps_preserve_the_pencil(seed in any::<u64>(), gi in 0usize..5) {
        let g = &geometries()[gi];
        for f in g.reduced_maps.iter().chain(&g.fiber.generators) {
            let r = check_invariance(&g.ambient, &g.pencil, f, 1, seed).unwrap();
            prop_assert!(r < 1e-6, "{} on {}: {r:e}", f.name, g.id);
        }
    }

    // The signed error of a single chain crosses zero at isolated radii, so the
    // rate is measured on the worst case over a narrow band of discs.
    #[test]
    fn quadrature_error_drops_eightfold_per_refinement(r0 in 0.5f64..8.0) {
        let line = |w: Complex64| (vec![Complex64::new(1.0, 0.0), w], vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let mut errs = [0.0f64; 5];
        for j in 0..9 {
            let r = r0 * (1.0 + 0.05 * j as f64);
            let ch = Chain::polar_disc(&[1], r, line);
            let exact = r * r / (1.0 + r * r);
            for (l, e) in errs.iter_mut().enumerate() {
                *e = e.max((area_at_level(&ch, l as u32) - exact).abs());
            }
        }
        for w in errs.windows(2) {
            if w[1] > 1e-12 {
                prop_assert!(w[0] / w[1] >= 8.0, "errors {errs:?}");
            }
        }
    }

    #[test]
    fn disc_area_is_additive_over_sectors(r in 0.1f64..3.0, split in 0.1f64..0.9) {
        let tau = std::f64::consts::TAU;
        let line = |w: Complex64| (vec![Complex64::new(1.0, 0.0), w], vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let sector = |a: f64, b: f64| {
            Chain::holomorphic(
                &[1],
                move |u, v| {
                    let e = Complex64::from_polar(1.0, tau * (a + (b - a) * v));
                    (e * (r * u), e * r, e * Complex64::new(0.0, tau * (b - a) * r * u))
                },
                line,
            )
        };
        let whole = area_at_level(&Chain::polar_disc(&[1], r, line), 4);
        let parts = area_at_level(&sector(0.0, split), 4) + area_at_level(&sector(split, 1.0), 4);
        prop_assert!((whole - parts).abs() < 1e-10);
    }

    #[test]
    fn flowing_forward_then_back_returns(seed in any::<u64>(), t in -0.6f64..0.6) {
        let g = Geometry::flag(0.7).unwrap();
        let p = g.ambient.random_point(&mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        for f in &g.fiber.generators {
            let (q, _) = flow(&g.ambient, f, &p, t).unwrap();
            let (back, _) = flow(&g.ambient, f, &q, -t).unwrap();
            prop_assert!(back.distance(&p) < 1e-7);
            prop_assert!((f.eval(&q) - f.eval(&p)).abs() < 1e-8);
        }
    }

    #[test]
    fn volume_form_is_chart_independent(seed in any::<u64>(), gi in 0usize..5) {
        let g = &geometries()[gi];
        let m: &AmbientSpace = &g.ambient;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = m.random_point(&mut rng).unwrap();
        let basis = tangent_basis(m, &p).unwrap();
        let frame: Vec<TangentVector> = basis.into_iter().map(|b| TangentVector { base: p.clone(), components: b }).collect();
        let values: Vec<Complex64> = [0usize, 1]
            .iter()
            .map(|&c| {
                let chart = Chart(vec![c; m.factor_dims.len()]);
                volume_form_value(&MeromorphicVolumeForm::new(m, chart, g.boundary_divisor.clone()), &frame).unwrap()
            })
            .collect();
        // the toric form d log t changes by a unimodular matrix, so only the sign may flip
        prop_assert!((values[0].norm() - values[1].norm()).abs() < 1e-8 * values[0].norm(), "{values:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bs_level_matches_lcm_of_denominators(fracs in prop::collection::vec((0u64..12, 1u64..=12), 1..5)) {
        let values: Vec<f64> = fracs.iter().map(|&(a, b)| reduce_mod1((a % b) as f64 / b as f64)).collect();
        let lcm = fracs.iter().fold(1u64, |l, &(a, b)| {
            let d = b / gcd(a % b, b);
            l / gcd(l, d) * d
        });
        let want = (lcm <= 64).then_some(lcm as u32);
        prop_assert_eq!(bs_level(&values, 64, 1e-9).level, want);
    }
}

#[test]
fn maslov_degree_flips_under_orientation_reversal() {
    let cases: Vec<(Geometry, LoopSpec)> = vec![
        (Geometry::cp2(), LoopSpec::circle(Complex64::new(2f64.sqrt(), 0.0), std::f64::consts::FRAC_1_SQRT_2)),
        (Geometry::cp2(), LoopSpec::circle(Complex64::new(0.0, 0.0), std::f64::consts::FRAC_1_SQRT_2)),
        (Geometry::p1xp1(), LoopSpec::circle(Complex64::new(1.0, 0.0), 0.5774)),
        (
            Geometry::p1_power(3).unwrap(),
            LoopSpec::circle(Complex64::from_polar(1.0, std::f64::consts::PI / 3.0), 0.4472),
        ),
        (Geometry::quadric(1.0).unwrap(), LoopSpec::circle(pseudotoric::registry::octahedral_face_center(), 0.378)),
        (Geometry::quadric(1.0).unwrap(), LoopSpec::circle(Complex64::new(0.0, 0.0), 0.5774)),
        (Geometry::quadric(0.5).unwrap(), LoopSpec::circle(Complex64::new(0.0, 1.0), 0.7746)),
        (Geometry::flag(1.0).unwrap(), LoopSpec::circle(Complex64::new(0.0, 0.0), 0.378)),
    ];
    for (g, lp) in cases {
        let omega = MeromorphicVolumeForm::new(&g.ambient, g.volume_chart.clone(), g.boundary_divisor.clone());
        let fwd = maslov_degree(&omega, section_frame(&g.ambient, &g.section, &g.fiber.generators, &lp)).unwrap();
        let rev_lp = lp.reversed();
        let rev = maslov_degree(&omega, section_frame(&g.ambient, &g.section, &g.fiber.generators, &rev_lp)).unwrap();
        assert_eq!(fwd.degree(), -rev.degree(), "{} {lp:?}", g.id);
        assert!(fwd.residual() < 1e-3 && rev.residual() < 1e-3);
    }
}
