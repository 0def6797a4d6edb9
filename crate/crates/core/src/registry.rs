//! Built-in pseudotoric structures: ambient manifold, pencil, section curve,
//! moment maps, divisors and loop centres.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{AmbientSpace, Chart};
use crate::model::{Mobius, PencilMap, SectionCurve};
use crate::poly::{MultiPoly, UniPoly};
use crate::symplectic::MomentMap;
use crate::torus::FiberAction;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub const T_MIN: f64 = 0.05;

/// Meridians bounding the covering pieces: rays of `s ↦ (s - a)/(s - b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PieceLayout {
    pub a: Complex64,
    pub b: Option<Complex64>,
    pub count: usize,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub id: String,
    pub ambient: AmbientSpace,
    pub pencil: PencilMap,
    pub section: SectionCurve,
    /// Reduced moment maps as declared for the structure.
    pub reduced_maps: Vec<MomentMap>,
    /// Complete toric set, empty for the non-toric structures.
    pub toric_maps: Vec<MomentMap>,
    /// Extra maps expected to commute with the reduced ones.
    pub companions: Vec<MomentMap>,
    pub fiber: FiberAction,
    pub boundary_divisor: MultiPoly,
    pub divisor_names: Vec<String>,
    pub divisors: Vec<MultiPoly>,
    pub relation: Vec<i64>,
    pub d_plus: MultiPoly,
    pub d_minus: MultiPoly,
    pub volume_chart: Chart,
    pub chekanov_center: Option<Complex64>,
    /// Branch point used as the centre of standard loops.
    pub standard_center: Complex64,
    pub pieces: PieceLayout,
    pub warnings: Vec<String>,
}

fn unipoly(c: &[Complex64]) -> UniPoly {
    UniPoly::new(c.to_vec())
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn ratio(name: &str, triples: &[(f64, usize, usize)]) -> MomentMap {
    MomentMap::from_triples(name, triples)
}

fn var(nvars: usize, v: usize) -> MultiPoly {
    MultiPoly::monomial(nvars, &[v])
}

/// Conic `(1 - s², i(1 + s²), 2s/√t)` with `a² + b² + t c² = 0`.
fn conic(t: f64) -> [UniPoly; 3] {
    [unipoly(&[ONE, ZERO, -ONE]), unipoly(&[I, ZERO, I]), unipoly(&[ZERO, re(2.0 / t.sqrt())])]
}

fn klein_group() -> Vec<Mobius> {
    vec![Mobius::new(-ONE, ZERO, ZERO, ONE), Mobius::new(ZERO, -ONE, ONE, ZERO), Mobius::new(ZERO, ONE, ONE, ZERO)]
}

fn singular_triple(t: f64) -> Vec<Vec<Complex64>> {
    vec![vec![ONE, -ONE, ZERO], vec![re(t), ZERO, -ONE], vec![ZERO, re(t), -ONE]]
}

/// Face centre of the branch octahedron `{0, ∞, ±1, ±i}` between `0`, `1`, `i`.
pub fn octahedral_face_center() -> Complex64 {
    Complex64::new(1.0, 1.0) / (3f64.sqrt() + 1.0)
}

impl Geometry {
    pub fn by_name(name: &str, n: usize, t: f64) -> Result<Geometry> {
        match name {
            "cp2" => Ok(Geometry::cp2()),
            "p1xp1" => Ok(Geometry::p1xp1()),
            "p1_power" => Geometry::p1_power(n),
            "quadric" => Geometry::quadric(t),
            "flag" => Geometry::flag(t),
            other => Err(Error::Invalid(format!("unknown geometry {other}"))),
        }
    }

    pub fn k(&self) -> u32 {
        self.ambient.monotonicity_k
    }

    pub fn cp2() -> Geometry {
        let nv = 3;
        let ambient = AmbientSpace::new("CP2", vec![2], vec![], 3).unwrap();
        let z = |v| var(nv, v);
        let pencil = PencilMap {
            components: vec![MultiPoly::monomial(nv, &[0, 1]), MultiPoly::monomial(nv, &[2, 2])],
            base_constraint: None,
            base_set: vec![vec![z(0), z(2)], vec![z(1), z(2)]],
            singular_values: vec![vec![ONE, ZERO], vec![ZERO, ONE]],
        };
        let section = SectionCurve {
            name: "line z0 = z1".into(),
            dims: vec![2],
            coords: vec![unipoly(&[ONE]), unipoly(&[ONE]), unipoly(&[ZERO, ONE])],
            covering_degree_d: 2,
            total_area_m: 1.0,
            branch_points: vec![Some(ZERO), None],
            involutions: vec![Mobius::new(-ONE, ZERO, ZERO, ONE)],
            round_scale: 2f64.sqrt(),
        };
        let f1 = ratio("f1", &[(1.0, 0, 0), (-1.0, 0, 1)]);
        let f2 = ratio("f2", &[(1.0, 0, 2)]);
        Geometry {
            id: "cp2".into(),
            ambient,
            pencil,
            section,
            reduced_maps: vec![f1.clone()],
            toric_maps: vec![ratio("ft1", &[(1.0, 0, 0)]), ratio("ft2", &[(1.0, 0, 1)])],
            companions: vec![f2],
            fiber: FiberAction { generators: vec![f1], numeric: false, steps_per_unit: 256 },
            boundary_divisor: MultiPoly::monomial(nv, &[0, 1, 2]),
            divisor_names: vec!["z0".into(), "z1".into(), "z2".into()],
            divisors: vec![z(0), z(1), z(2)],
            relation: vec![1, 1, -2],
            d_plus: MultiPoly::monomial(nv, &[0, 1]),
            d_minus: MultiPoly::monomial(nv, &[2, 2]),
            volume_chart: Chart(vec![0]),
            chekanov_center: Some(re(2f64.sqrt())),
            standard_center: ZERO,
            pieces: PieceLayout { a: ZERO, b: None, count: 2, offset: 0.0 },
            warnings: vec![],
        }
    }

    pub fn p1xp1() -> Geometry {
        let nv = 4;
        let ambient = AmbientSpace::new("CP1xCP1", vec![1, 1], vec![], 2).unwrap();
        let z = |v| var(nv, v);
        let pencil = PencilMap {
            components: vec![MultiPoly::monomial(nv, &[0, 2]), MultiPoly::monomial(nv, &[1, 3])],
            base_constraint: None,
            base_set: vec![vec![z(0), z(3)], vec![z(1), z(2)]],
            singular_values: vec![vec![ONE, ZERO], vec![ZERO, ONE]],
        };
        let diag = vec![unipoly(&[ONE]), unipoly(&[ZERO, ONE]), unipoly(&[ONE]), unipoly(&[ZERO, ONE])];
        let section = SectionCurve {
            name: "diagonal".into(),
            dims: vec![1, 1],
            coords: diag,
            covering_degree_d: 2,
            total_area_m: 2.0,
            branch_points: vec![Some(ZERO), None],
            involutions: vec![Mobius::new(-ONE, ZERO, ZERO, ONE)],
            round_scale: 1.0,
        };
        let fx = ratio("ftx", &[(1.0, 0, 0)]);
        let fy = ratio("fty", &[(1.0, 1, 2)]);
        let f1 = MomentMap::combine("f1", &[(1.0, &fx), (-1.0, &fy)]);
        let f2 = MomentMap::combine("f2", &[(1.0, &fx), (1.0, &fy)]);
        Geometry {
            id: "p1xp1".into(),
            ambient,
            pencil,
            section,
            reduced_maps: vec![f1.clone()],
            toric_maps: vec![fx, fy],
            companions: vec![f2],
            fiber: FiberAction { generators: vec![f1], numeric: false, steps_per_unit: 256 },
            boundary_divisor: MultiPoly::monomial(nv, &[0, 1, 2, 3]),
            divisor_names: vec!["x0".into(), "y0".into(), "x1".into(), "y1".into()],
            divisors: vec![z(0), z(2), z(1), z(3)],
            relation: vec![1, 1, -1, -1],
            d_plus: MultiPoly::monomial(nv, &[0, 2]),
            d_minus: MultiPoly::monomial(nv, &[1, 3]),
            volume_chart: Chart(vec![0, 0]),
            chekanov_center: Some(ONE),
            standard_center: ZERO,
            pieces: PieceLayout { a: ZERO, b: None, count: 2, offset: 0.0 },
            warnings: vec![],
        }
    }

    /// `(CP¹)ⁿ` with factor `i` in coordinates `[x_i : y_i]`.
    pub fn p1_power(n: usize) -> Result<Geometry> {
        if n < 2 {
            return Err(Error::Invalid(format!("n = {n} must be at least 2")));
        }
        let nv = 2 * n;
        let ambient = AmbientSpace::new(&format!("(CP1)^{n}"), vec![1; n], vec![], 2)?;
        let xs: Vec<usize> = (0..n).map(|i| 2 * i).collect();
        let ys: Vec<usize> = (0..n).map(|i| 2 * i + 1).collect();
        let mut base_set = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    base_set.push(vec![var(nv, xs[i]), var(nv, ys[j])]);
                }
            }
        }
        let pencil = PencilMap {
            components: vec![MultiPoly::monomial(nv, &xs), MultiPoly::monomial(nv, &ys)],
            base_constraint: None,
            base_set,
            singular_values: vec![vec![ONE, ZERO], vec![ZERO, ONE]],
        };
        let coords = (0..n).flat_map(|_| [unipoly(&[ONE]), unipoly(&[ZERO, ONE])]).collect();
        let section = SectionCurve {
            name: "diagonal".into(),
            dims: vec![1; n],
            coords,
            covering_degree_d: n,
            total_area_m: n as f64,
            branch_points: vec![Some(ZERO), None],
            involutions: (1..n).map(|j| Mobius::rotation(2.0 * PI * j as f64 / n as f64)).collect(),
            round_scale: 1.0,
        };
        let toric: Vec<MomentMap> = (0..n).map(|i| ratio(&format!("ft{}", i + 1), &[(1.0, i, xs[i])])).collect();
        let reduced: Vec<MomentMap> = (0..n - 1)
            .map(|i| MomentMap::combine(&format!("f{}", i + 1), &[(1.0, &toric[i]), (-1.0, &toric[i + 1])]))
            .collect();
        let mut divisors = Vec::new();
        let mut names = Vec::new();
        let mut relation = Vec::new();
        for i in 0..n {
            divisors.push(var(nv, xs[i]));
            names.push(format!("x{}", i + 1));
            relation.push(1);
        }
        for i in 0..n {
            divisors.push(var(nv, ys[i]));
            names.push(format!("y{}", i + 1));
            relation.push(-1);
        }
        Ok(Geometry {
            id: format!("p1_power_{n}"),
            ambient,
            pencil,
            section,
            reduced_maps: reduced.clone(),
            toric_maps: toric,
            companions: vec![],
            fiber: FiberAction { generators: reduced, numeric: false, steps_per_unit: 256 },
            boundary_divisor: MultiPoly::monomial(nv, &(0..nv).collect::<Vec<_>>()),
            divisor_names: names,
            divisors,
            relation,
            d_plus: MultiPoly::monomial(nv, &xs),
            d_minus: MultiPoly::monomial(nv, &ys),
            volume_chart: Chart(vec![0; n]),
            chekanov_center: None,
            standard_center: ZERO,
            pieces: PieceLayout { a: ZERO, b: None, count: n, offset: 0.0 },
            warnings: vec![],
        })
    }

    /// `Q_t = {z0 z1 + z2 z3 + t z4 z5 = 0}` in `CP⁵`.
    pub fn quadric(t: f64) -> Result<Geometry> {
        check_t(t)?;
        let nv = 6;
        let q =
            MultiPoly::from_terms(nv, &[(1.0, &[(0, 1), (1, 1)]), (1.0, &[(2, 1), (3, 1)]), (t, &[(4, 1), (5, 1)])]);
        let ambient = AmbientSpace::new(&format!("Q4_t={t}"), vec![5], vec![q], 4)?;
        let mut base_set = Vec::new();
        for a in [0, 1] {
            for b in [2, 3] {
                for c in [4, 5] {
                    base_set.push(vec![var(nv, a), var(nv, b), var(nv, c)]);
                }
            }
        }
        let pencil = PencilMap {
            components: vec![
                MultiPoly::monomial(nv, &[0, 1]),
                MultiPoly::monomial(nv, &[2, 3]),
                MultiPoly::monomial(nv, &[4, 5]),
            ],
            base_constraint: Some(vec![ONE, ONE, re(t)]),
            base_set,
            singular_values: singular_triple(t),
        };
        let [a, b, c] = conic(t);
        let section = SectionCurve {
            name: "conic Q ∩ {z0=z1, z2=z3, z4=z5}".into(),
            dims: vec![5],
            coords: vec![a.clone(), a, b.clone(), b, c.clone(), c],
            covering_degree_d: 4,
            total_area_m: 2.0,
            branch_points: vec![Some(ZERO), None, Some(ONE), Some(-ONE), Some(I), Some(-I)],
            involutions: klein_group(),
            round_scale: 1.0,
        };
        let g: Vec<MomentMap> =
            (0..3).map(|j| ratio(&format!("g{}", j + 1), &[(1.0, 0, 2 * j), (-1.0, 0, 2 * j + 1)])).collect();
        let cyc = [(1.0, 0.0, -1.0), (-1.0, 1.0, 0.0), (0.0, -1.0, 1.0)];
        let f: Vec<MomentMap> = cyc
            .iter()
            .enumerate()
            .map(|(i, &(x, y, w))| MomentMap::combine(&format!("f{}", i + 1), &[(x, &g[0]), (y, &g[1]), (w, &g[2])]))
            .collect();
        Ok(Geometry {
            id: "quadric4".into(),
            ambient,
            pencil,
            section,
            reduced_maps: f,
            toric_maps: vec![],
            companions: g.clone(),
            fiber: FiberAction { generators: g, numeric: false, steps_per_unit: 256 },
            boundary_divisor: MultiPoly::monomial(nv, &[0, 1, 4, 5]),
            divisor_names: vec!["z0".into(), "z1".into(), "z4".into(), "z5".into()],
            divisors: vec![var(nv, 0), var(nv, 1), var(nv, 4), var(nv, 5)],
            relation: vec![-1, -1, 1, 1],
            d_plus: MultiPoly::monomial(nv, &[4, 5]),
            d_minus: MultiPoly::monomial(nv, &[0, 1]),
            volume_chart: Chart(vec![0]),
            chekanov_center: Some(octahedral_face_center()),
            standard_center: ZERO,
            pieces: PieceLayout { a: ONE, b: Some(-ONE), count: 4, offset: 0.0 },
            warnings: vec![
                "pencil component w2 taken as z4*z5 (printed z3*z4 is inconsistent with the quadric and with w0+w1+w2=0)".into(),
                "third moment-map numerator taken as |z4|^2-|z5|^2 (printed |z3|^2-|z4|^2)".into(),
                "the cyclic moment maps have rank 2; the fiber torus uses the pair rotations g1, g2, g3".into(),
                "standard loops cut k/8 of the section area (k=1,2,3); the alternative list 1/8, 1/4, 3/4 disagrees at k=3".into(),
            ],
        })
    }

    /// `U_t = {x0 y0 + x1 y1 + t x2 y2 = 0}` in `CP² × CP²`.
    pub fn flag(t: f64) -> Result<Geometry> {
        check_t(t)?;
        let nv = 6;
        let u =
            MultiPoly::from_terms(nv, &[(1.0, &[(0, 1), (3, 1)]), (1.0, &[(1, 1), (4, 1)]), (t, &[(2, 1), (5, 1)])]);
        let ambient = AmbientSpace::new(&format!("F3_t={t}"), vec![2, 2], vec![u], 2)?;
        let mut base_set = Vec::new();
        for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)] {
            if i < j {
                base_set.push(vec![var(nv, i), var(nv, j), var(nv, 3 + k)]);
                base_set.push(vec![var(nv, k), var(nv, 3 + i), var(nv, 3 + j)]);
            }
        }
        let pencil = PencilMap {
            components: vec![
                MultiPoly::monomial(nv, &[0, 3]),
                MultiPoly::monomial(nv, &[1, 4]),
                MultiPoly::monomial(nv, &[2, 5]),
            ],
            base_constraint: Some(vec![ONE, ONE, re(t)]),
            base_set,
            singular_values: singular_triple(t),
        };
        let [a, b, c] = conic(t);
        let section = SectionCurve {
            name: "diagonal conic".into(),
            dims: vec![2, 2],
            coords: vec![a.clone(), b.clone(), c.clone(), a, b, c],
            covering_degree_d: 4,
            total_area_m: 4.0,
            branch_points: vec![Some(ZERO), None, Some(ONE), Some(-ONE), Some(I), Some(-I)],
            involutions: klein_group(),
            round_scale: 1.0,
        };
        let f1 = ratio("f1", &[(1.0, 0, 0), (-1.0, 0, 2), (-1.0, 1, 3), (1.0, 1, 5)]);
        let f2 = ratio("f2", &[(1.0, 0, 0), (-1.0, 0, 1), (-1.0, 1, 3), (1.0, 1, 4)]);
        let g1 = MomentMap::combine("g1", &[(1.0 / 3.0, &f1), (1.0 / 3.0, &f2)]);
        let g2 = MomentMap::combine("g2", &[(1.0 / 3.0, &f1), (-2.0 / 3.0, &f2)]);
        Ok(Geometry {
            id: "flag_f3".into(),
            ambient,
            pencil,
            section,
            reduced_maps: vec![f1, f2],
            toric_maps: vec![],
            companions: vec![g1.clone(), g2.clone()],
            fiber: FiberAction { generators: vec![g1, g2], numeric: true, steps_per_unit: 512 },
            boundary_divisor: MultiPoly::monomial(nv, &[0, 3, 2, 5]),
            divisor_names: vec!["x0".into(), "y0".into(), "x1".into(), "y1".into()],
            divisors: vec![var(nv, 0), var(nv, 3), var(nv, 1), var(nv, 4)],
            relation: vec![1, 1, -1, -1],
            d_plus: MultiPoly::monomial(nv, &[0, 3]),
            d_minus: MultiPoly::monomial(nv, &[1, 4]),
            volume_chart: Chart(vec![0, 0]),
            chekanov_center: Some(octahedral_face_center()),
            standard_center: ZERO,
            pieces: PieceLayout { a: ONE, b: Some(-ONE), count: 4, offset: 0.0 },
            warnings: vec![
                "the f1, f2 action has index 3 in the fiber torus; fiber circles use g1 = (f1+f2)/3 and g2 = (f1-2f2)/3".into(),
                "the diagonal conic has bidegree (2,2), so its area is 4 and D_b meets it 8 times".into(),
            ],
        })
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(T_MIN..=1.0).contains(&t) {
        return Err(Error::Invalid(format!("deformation parameter t = {t} outside [{T_MIN}, 1]")));
    }
    Ok(())
}
