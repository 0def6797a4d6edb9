//! Moment maps, Hamiltonian vector fields, Poisson brackets and flows.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{symplectic_value, tangent_basis, unit_factors, AmbientSpace, ProductPoint, TangentVector};
use crate::linalg::{hdot, norm, solve_real};

/// One summand `coef · |z_var|² / |z_factor|²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTerm {
    pub coef: f64,
    pub factor: usize,
    /// Global coordinate index.
    pub var: usize,
}

/// A closed-form moment map: a real combination of coordinate ratios
/// `|z_j|² / |z_factor|²` plus a constant. Such maps generate linear torus
/// actions, which also gives their exact flows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentMap {
    pub name: String,
    pub terms: Vec<MomentTerm>,
    pub constant: f64,
}

impl MomentMap {
    pub fn new(name: &str, terms: Vec<MomentTerm>) -> Self {
        MomentMap { name: name.to_string(), terms, constant: 0.0 }
    }

    /// `Σ coef · |z_var|²/|z_factor|²` from `(coef, factor, var)` triples.
    pub fn from_triples(name: &str, triples: &[(f64, usize, usize)]) -> Self {
        Self::new(name, triples.iter().map(|&(coef, factor, var)| MomentTerm { coef, factor, var }).collect())
    }

    pub fn constant(name: &str, c: f64) -> Self {
        MomentMap { name: name.to_string(), terms: Vec::new(), constant: c }
    }

    pub fn eval_flat(&self, z: &[Complex64], dims: &[usize]) -> f64 {
        let groups = crate::geometry::groups_of(dims);
        let norms: Vec<f64> = groups.iter().map(|g| z[g.clone()].iter().map(|x| x.norm_sqr()).sum()).collect();
        self.constant + self.terms.iter().map(|t| t.coef * z[t.var].norm_sqr() / norms[t.factor]).sum::<f64>()
    }

    pub fn eval(&self, p: &ProductPoint) -> f64 {
        let dims: Vec<usize> = p.factors.iter().map(|f| f.dim()).collect();
        self.eval_flat(&p.flat(), &dims)
    }

    /// Real linear combination `Σ c_i f_i`.
    pub fn combine(name: &str, parts: &[(f64, &MomentMap)]) -> MomentMap {
        let mut terms = Vec::new();
        let mut constant = 0.0;
        for (c, m) in parts {
            constant += c * m.constant;
            terms.extend(m.terms.iter().map(|t| MomentTerm { coef: c * t.coef, ..t.clone() }));
        }
        MomentMap { name: name.to_string(), terms, constant }
    }

    /// Angular velocities of the generated action: the flow for time `t`
    /// multiplies `z_j` by `exp(2πi w_j t)`.
    pub fn weights(&self, nvars: usize) -> Vec<f64> {
        let mut w = vec![0.0; nvars];
        for t in &self.terms {
            w[t.var] -= t.coef;
        }
        w
    }

    /// Exact flow of the linear circle action.
    pub fn circle_action(&self, p: &ProductPoint, t: f64) -> ProductPoint {
        let z = p.flat();
        let w = self.weights(z.len());
        let rotated: Vec<Complex64> =
            z.iter().zip(&w).map(|(zj, wj)| zj * Complex64::from_polar(1.0, TAU * wj * t)).collect();
        let dims: Vec<usize> = p.factors.iter().map(|f| f.dim()).collect();
        ProductPoint::from_flat(&dims, &rotated).expect("rotation keeps the point nonzero")
    }
}

pub const FD_STEP: f64 = 1e-5;

fn shifted(p: &ProductPoint, u: &TangentVector, h: f64) -> Result<Vec<Complex64>> {
    let v = u.components_at(p)?;
    Ok(p.flat().iter().zip(&v).map(|(z, d)| z + d * h).collect())
}

/// Central difference along `u` with one Richardson level.
pub fn differential(f: &MomentMap, p: &ProductPoint, u: &TangentVector) -> Result<f64> {
    let dims: Vec<usize> = p.factors.iter().map(|f| f.dim()).collect();
    let central = |h: f64| -> Result<f64> {
        Ok((f.eval_flat(&shifted(p, u, h)?, &dims) - f.eval_flat(&shifted(p, u, -h)?, &dims)) / (2.0 * h))
    };
    let d1 = central(FD_STEP)?;
    let d2 = central(FD_STEP / 2.0)?;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Closed-form `df(u)` for ratio moment maps: the derivative of
/// `|z_j|²/|z_F|²` along `v` is `2Re(z̄_j v_j)/|z_F|² - 2|z_j|² Re⟨z_F, v_F⟩/|z_F|⁴`.
pub fn differential_exact(f: &MomentMap, p: &ProductPoint, u: &TangentVector) -> Result<f64> {
    let v = u.components_at(p)?;
    let dims: Vec<usize> = p.factors.iter().map(|f| f.dim()).collect();
    Ok(exact_dfdv(f, &p.flat(), &v, &crate::geometry::groups_of(&dims)))
}

fn exact_dfdv(f: &MomentMap, z: &[Complex64], v: &[Complex64], groups: &[std::ops::Range<usize>]) -> f64 {
    let norms: Vec<f64> = groups.iter().map(|g| z[g.clone()].iter().map(|x| x.norm_sqr()).sum()).collect();
    let radial: Vec<f64> = groups.iter().map(|g| 2.0 * hdot(&z[g.clone()], &v[g.clone()]).re).collect();
    f.terms
        .iter()
        .map(|t| {
            let n = norms[t.factor];
            let zj = z[t.var];
            t.coef * (2.0 * (zj.conj() * v[t.var]).re / n - zj.norm_sqr() * radial[t.factor] / (n * n))
        })
        .sum()
}

/// Five-point stencil, an independent fourth-order estimate.
pub fn differential_stencil4(f: &MomentMap, p: &ProductPoint, u: &TangentVector, h: f64) -> Result<f64> {
    let dims: Vec<usize> = p.factors.iter().map(|f| f.dim()).collect();
    let e = |s: f64| -> Result<f64> { Ok(f.eval_flat(&shifted(p, u, s)?, &dims)) };
    Ok((-e(2.0 * h)? + 8.0 * e(h)? - 8.0 * e(-h)? + e(-2.0 * h)?) / (12.0 * h))
}

/// The vector field `X` with `ω(X, ·) = df` on the tangent space of `M`.
pub fn hamiltonian_field(m: &AmbientSpace, f: &MomentMap, p: &ProductPoint) -> Result<TangentVector> {
    m.check(p)?;
    let basis = tangent_basis(m, p)?;
    let i = Complex64::new(0.0, 1.0);
    let real: Vec<Vec<Complex64>> =
        basis.iter().flat_map(|b| [b.clone(), b.iter().map(|x| x * i).collect::<Vec<_>>()]).collect();
    let n = real.len();
    let mut a = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];
    let z = p.flat();
    let groups = m.groups();
    for l in 0..n {
        rhs[l] = exact_dfdv(f, &z, &real[l], &groups);
        for k in 0..n {
            a[l * n + k] = hdot(&real[k], &real[l]).im / std::f64::consts::PI;
        }
    }
    let c = solve_real(a, rhs, n).ok_or(Error::SingularSystem)?;
    let mut comps = vec![Complex64::new(0.0, 0.0); p.flat().len()];
    for (ck, bk) in c.iter().zip(&real) {
        for (o, x) in comps.iter_mut().zip(bk) {
            *o += x * ck;
        }
    }
    Ok(TangentVector { base: p.clone(), components: comps })
}

pub fn poisson_bracket(m: &AmbientSpace, f: &MomentMap, g: &MomentMap, p: &ProductPoint) -> Result<f64> {
    let xf = hamiltonian_field(m, f, p)?;
    let xg = hamiltonian_field(m, g, p)?;
    symplectic_value(m, &xf, &xg)
}

/// Homogeneous velocity at an arbitrary representative (degree-one scaling
/// per factor, phase respected).
fn field_raw(m: &AmbientSpace, f: &MomentMap, z: &[Complex64]) -> Result<Vec<Complex64>> {
    let groups = m.groups();
    let p = m.point(&unit_factors(z, &groups))?;
    let x = hamiltonian_field(m, f, &p)?;
    let mut v = x.components;
    for g in &groups {
        let n = norm(&z[g.clone()]);
        for j in g.clone() {
            v[j] *= n;
        }
    }
    Ok(v)
}

/// Classic RK4 with renormalisation and Newton projection after each step.
pub fn flow_steps(m: &AmbientSpace, f: &MomentMap, p: &ProductPoint, t: f64, steps: usize) -> Result<ProductPoint> {
    if t == 0.0 || steps == 0 {
        return Ok(p.clone());
    }
    let dt = t / steps as f64;
    let mut z = p.flat();
    let axpy = |z: &[Complex64], k: &[Complex64], h: f64| -> Vec<Complex64> {
        z.iter().zip(k).map(|(a, b)| a + b * h).collect()
    };
    for _ in 0..steps {
        let k1 = field_raw(m, f, &z)?;
        let k2 = field_raw(m, f, &axpy(&z, &k1, dt / 2.0))?;
        let k3 = field_raw(m, f, &axpy(&z, &k2, dt / 2.0))?;
        let k4 = field_raw(m, f, &axpy(&z, &k3, dt))?;
        for j in 0..z.len() {
            z[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (dt / 6.0);
        }
        z = m.project(&z)?.flat();
    }
    let q = m.point(&z)?;
    let r = m.residual(&q);
    if r > 1e-8 {
        return Err(Error::ProjectionFailure { residual: r });
    }
    Ok(q)
}

pub const DEFAULT_STEPS_PER_UNIT: usize = 256;

/// Starts from 256 steps per unit time and doubles until the endpoint moves
/// by less than `1e-7`. Returns the endpoint and the step count used.
pub fn flow(m: &AmbientSpace, f: &MomentMap, p: &ProductPoint, t: f64) -> Result<(ProductPoint, usize)> {
    let mut steps = ((DEFAULT_STEPS_PER_UNIT as f64) * t.abs()).ceil().max(16.0) as usize;
    let mut prev = flow_steps(m, f, p, t, steps)?;
    loop {
        let next = flow_steps(m, f, p, t, 2 * steps)?;
        steps *= 2;
        if next.distance(&prev) < 1e-7 || steps >= 1 << 16 {
            return Ok((next, steps));
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{apply_complex_structure, constraint_tangency};
    use crate::poly::MultiPoly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cp2() -> (AmbientSpace, MomentMap, MomentMap) {
        let m = AmbientSpace::new("CP2", vec![2], vec![], 3).unwrap();
        let f1 = MomentMap::from_triples("f1", &[(1.0, 0, 0), (-1.0, 0, 1)]);
        let f2 = MomentMap::from_triples("f2", &[(1.0, 0, 2)]);
        (m, f1, f2)
    }

    fn pt(v: &[f64]) -> ProductPoint {
        ProductPoint::single(v.iter().map(|&x| Complex64::new(x, 0.0)).collect()).unwrap()
    }

    #[test]
    fn constant_map_has_zero_differential() {
        let (m, _, _) = cp2();
        let p = pt(&[1.0, 2.0, 0.5]);
        let b = tangent_basis(&m, &p).unwrap();
        let u = TangentVector { base: p.clone(), components: b[0].clone() };
        assert_eq!(differential(&MomentMap::constant("c", 2.0), &p, &u).unwrap(), 0.0);
    }

    #[test]
    fn richardson_agrees_with_five_point_stencil() {
        let (m, f1, f2) = cp2();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let p = m.random_point(&mut rng).unwrap();
            for b in tangent_basis(&m, &p).unwrap() {
                let u = TangentVector { base: p.clone(), components: b };
                for f in [&f1, &f2] {
                    let a = differential(f, &p, &u).unwrap();
                    let s = differential_stencil4(f, &p, &u, 1e-3).unwrap();
                    assert!((a - s).abs() < 1e-8, "{a} vs {s}");
                    let e = differential_exact(f, &p, &u).unwrap();
                    assert!((a - e).abs() < 1e-8, "{a} vs exact {e}");
                }
            }
        }
    }

    #[test]
    fn gradient_direction_is_positive() {
        let (m, f1, _) = cp2();
        let p = pt(&[1.0, 1.0, 0.0]);
        let x = hamiltonian_field(&m, &f1, &p).unwrap();
        // I X_f is the gradient since ω(IX, Iv) = ω(X, v)
        let grad = apply_complex_structure(&x);
        assert!(differential(&f1, &p, &grad).unwrap() > 0.0);
    }

    #[test]
    fn field_annihilates_own_differential() {
        let (m, f1, f2) = cp2();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let p = m.random_point(&mut rng).unwrap();
            for f in [&f1, &f2] {
                let x = hamiltonian_field(&m, f, &p).unwrap();
                assert!(differential(f, &p, &x).unwrap().abs() < 1e-8);
            }
            assert!(poisson_bracket(&m, &f1, &f2, &p).unwrap().abs() < 1e-8);
            assert!(poisson_bracket(&m, &f1, &f1, &p).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn flow_matches_exact_circle_action() {
        let (m, f1, _) = cp2();
        let p = pt(&[1.0, 1.0, 1.0]);
        assert_eq!(flow_steps(&m, &f1, &p, 0.0, 10).unwrap(), p);
        for &t in &[0.1, 0.37, 1.0] {
            let (q, _) = flow(&m, &f1, &p, t).unwrap();
            let exact = f1.circle_action(&p, t);
            assert!(q.distance(&exact) < 1e-6, "t={t}: {}", q.distance(&exact));
            assert!((f1.eval(&q) - f1.eval(&p)).abs() < 1e-7);
        }
        // there and back
        let (q, _) = flow(&m, &f1, &p, 0.3).unwrap();
        let (r, _) = flow(&m, &f1, &q, -0.3).unwrap();
        assert!(r.distance(&p) < 1e-6);
    }

    #[test]
    fn quadric_field_is_tangent() {
        let q =
            MultiPoly::from_terms(6, &[(1.0, &[(0, 1), (1, 1)]), (1.0, &[(2, 1), (3, 1)]), (1.0, &[(4, 1), (5, 1)])]);
        let m = AmbientSpace::new("Q", vec![5], vec![q], 4).unwrap();
        let g1 = MomentMap::from_triples("g1", &[(1.0, 0, 0), (-1.0, 0, 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let p = m.random_point(&mut rng).unwrap();
            let x = hamiltonian_field(&m, &g1, &p).unwrap();
            assert!(constraint_tangency(&m, &x) < 1e-8);
            let (r, _) = flow(&m, &g1, &p, 0.25).unwrap();
            assert!(m.residual(&r) < 1e-8);
            assert!(r.distance(&g1.circle_action(&p, 0.25)) < 1e-6);
        }
    }
}
