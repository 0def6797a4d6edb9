//! Points, charts and tangent vectors on products of complex projective
//! spaces, optionally cut out by multi-homogeneous constraints, with the
//! Fubini-Study form normalised so that a projective line has area 1.
//!
//! Tangent vectors are stored as horizontal lifts: at the unit-norm
//! representative `z` of each factor, a tangent vector is a complex vector
//! `v` with `⟨z, v⟩ = 0`. In this picture the normalised form is
//! `ω(u, v) = Im⟨u, v⟩ / π`, summed over factors.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{hdot, norm, solve_complex};
use crate::poly::MultiPoly;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomogeneousPoint {
    pub coords: Vec<Complex64>,
}

impl HomogeneousPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if norm(&coords) == 0.0 || coords.iter().any(|z| !z.is_finite()) {
            return Err(Error::ZeroPoint);
        }
        Ok(HomogeneousPoint { coords })
    }

    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// Unit norm, phase kept.
    pub fn unit(&self) -> HomogeneousPoint {
        let n = norm(&self.coords);
        HomogeneousPoint { coords: self.coords.iter().map(|z| z / n).collect() }
    }

    /// Unit norm with the first nonzero coordinate real and positive.
    pub fn normalize(&self) -> HomogeneousPoint {
        let u = self.unit();
        let lead = u.coords.iter().find(|z| z.norm() > 1e-14).copied().unwrap_or(Complex64::new(1.0, 0.0));
        let phase = lead.conj() / lead.norm();
        HomogeneousPoint { coords: u.coords.iter().map(|z| z * phase).collect() }
    }

    /// Fubini-Study chordal distance `sqrt(1 - |⟨u, v⟩|²)` of unit lifts,
    /// evaluated through the Lagrange identity to avoid cancellation.
    pub fn distance(&self, other: &HomogeneousPoint) -> f64 {
        let a = self.unit().coords;
        let b = other.unit().coords;
        let mut s = 0.0;
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                s += (a[i] * b[j] - a[j] * b[i]).norm_sqr();
            }
        }
        s.sqrt()
    }
}

impl PartialEq for HomogeneousPoint {
    fn eq(&self, other: &Self) -> bool {
        self.coords.len() == other.coords.len() && self.distance(other) < 1e-7
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductPoint {
    pub factors: Vec<HomogeneousPoint>,
}

impl ProductPoint {
    /// Stores unit-norm representatives, keeping each factor's phase.
    pub fn new(factors: Vec<HomogeneousPoint>) -> Self {
        ProductPoint { factors: factors.iter().map(|f| f.unit()).collect() }
    }

    pub fn single(coords: Vec<Complex64>) -> Result<Self> {
        Ok(Self::new(vec![HomogeneousPoint::new(coords)?]))
    }

    pub fn from_flat(dims: &[usize], flat: &[Complex64]) -> Result<Self> {
        let mut factors = Vec::with_capacity(dims.len());
        let mut off = 0;
        for &d in dims {
            factors.push(HomogeneousPoint::new(flat[off..off + d + 1].to_vec())?);
            off += d + 1;
        }
        if off != flat.len() {
            return Err(Error::ShapeMismatch(format!("{} coordinates for dims {:?}", flat.len(), dims)));
        }
        Ok(Self::new(factors))
    }

    pub fn flat(&self) -> Vec<Complex64> {
        self.factors.iter().flat_map(|f| f.coords.iter().copied()).collect()
    }

    pub fn normalize(&self) -> ProductPoint {
        ProductPoint { factors: self.factors.iter().map(|f| f.normalize()).collect() }
    }

    pub fn distance(&self, other: &ProductPoint) -> f64 {
        self.factors.iter().zip(&other.factors).map(|(a, b)| a.distance(b).powi(2)).sum::<f64>().sqrt()
    }
}

/// Product of projective spaces with optional hypersurface constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbientSpace {
    pub name: String,
    pub factor_dims: Vec<usize>,
    pub constraints: Vec<MultiPoly>,
    pub monotonicity_k: u32,
}

impl AmbientSpace {
    pub fn new(name: &str, factor_dims: Vec<usize>, constraints: Vec<MultiPoly>, monotonicity_k: u32) -> Result<Self> {
        let m = AmbientSpace { name: name.to_string(), factor_dims, constraints, monotonicity_k };
        if m.factor_dims.contains(&0) || monotonicity_k == 0 {
            return Err(Error::Invalid("factor dimensions and k must be positive".into()));
        }
        for c in &m.constraints {
            if c.nvars != m.nvars() || c.multidegree(&m.groups()).is_none() {
                return Err(Error::Invalid("constraint is not multi-homogeneous".into()));
            }
        }
        Ok(m)
    }

    pub fn nvars(&self) -> usize {
        self.factor_dims.iter().map(|d| d + 1).sum()
    }

    /// Complex dimension.
    pub fn dim(&self) -> usize {
        self.factor_dims.iter().sum::<usize>() - self.constraints.len()
    }

    pub fn groups(&self) -> Vec<Range<usize>> {
        groups_of(&self.factor_dims)
    }

    pub fn check(&self, p: &ProductPoint) -> Result<()> {
        let ok = p.factors.len() == self.factor_dims.len()
            && p.factors.iter().zip(&self.factor_dims).all(|(f, &d)| f.dim() == d);
        if ok {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!("point does not fit {}", self.name)))
        }
    }

    pub fn point(&self, flat: &[Complex64]) -> Result<ProductPoint> {
        ProductPoint::from_flat(&self.factor_dims, flat)
    }

    /// Max constraint modulus at the unit representative.
    pub fn residual(&self, p: &ProductPoint) -> f64 {
        let z = p.flat();
        self.constraints.iter().map(|c| c.eval(&z).norm()).fold(0.0, f64::max)
    }

    /// Newton projection (minimum-norm steps) onto the constraint set,
    /// renormalising factors after each step.
    pub fn project(&self, flat: &[Complex64]) -> Result<ProductPoint> {
        let groups = self.groups();
        let mut z = unit_factors(flat, &groups);
        if self.constraints.is_empty() {
            return self.point(&z);
        }
        let r = self.constraints.len();
        let mut residual = f64::INFINITY;
        for _ in 0..10 {
            let vals: Vec<Complex64> = self.constraints.iter().map(|c| c.eval(&z)).collect();
            residual = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if residual < 1e-14 {
                return self.point(&z);
            }
            let jac: Vec<Vec<Complex64>> = self.constraints.iter().map(|c| c.gradient(&z)).collect();
            // (J J*) y = vals, step = -J* y
            let mut a = vec![ZERO; r * r];
            for i in 0..r {
                for j in 0..r {
                    a[i * r + j] = jac[i].iter().zip(&jac[j]).map(|(x, y)| x * y.conj()).sum();
                }
            }
            let y = solve_complex(a, vals, r).ok_or(Error::ProjectionFailure { residual })?;
            for (k, zk) in z.iter_mut().enumerate() {
                let s: Complex64 = (0..r).map(|i| jac[i][k].conj() * y[i]).sum();
                *zk -= s;
            }
            z = unit_factors(&z, &groups);
        }
        let vals = self.constraints.iter().map(|c| c.eval(&z).norm()).fold(0.0, f64::max);
        if vals < 1e-12 {
            return self.point(&z);
        }
        Err(Error::ProjectionFailure { residual: residual.min(vals) })
    }

    /// Complex Gaussian point pushed onto the constraints.
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Result<ProductPoint> {
        let flat: Vec<Complex64> = (0..self.nvars()).map(|_| complex_gaussian(rng)).collect();
        self.project(&flat)
    }
}

pub fn groups_of(dims: &[usize]) -> Vec<Range<usize>> {
    let mut off = 0;
    dims.iter()
        .map(|&d| {
            let r = off..off + d + 1;
            off += d + 1;
            r
        })
        .collect()
}

pub fn unit_factors(flat: &[Complex64], groups: &[Range<usize>]) -> Vec<Complex64> {
    let mut z = flat.to_vec();
    for g in groups {
        let n = norm(&z[g.clone()]);
        for x in &mut z[g.clone()] {
            *x /= n;
        }
    }
    z
}

pub fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    Complex64::from_polar((-2.0 * u1.ln()).sqrt(), 2.0 * PI * u2)
}

/// Per-factor choice of the affine chart coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chart(pub Vec<usize>);

impl Chart {
    /// The coordinate of largest modulus in every factor.
    pub fn largest(p: &ProductPoint) -> Chart {
        Chart(
            p.factors
                .iter()
                .map(|f| {
                    (0..f.coords.len()).max_by(|&a, &b| f.coords[a].norm().total_cmp(&f.coords[b].norm())).unwrap()
                })
                .collect(),
        )
    }
}

/// Affine coordinates `z_i / z_chart` of every factor, concatenated.
pub fn chart_coords(p: &ProductPoint, chart: &Chart) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for (fi, (f, &c)) in p.factors.iter().zip(&chart.0).enumerate() {
        let zc = f.coords[c];
        if zc.norm() < 1e-14 * norm(&f.coords) {
            return Err(Error::ChartUndefined { factor: fi, index: c });
        }
        out.extend(f.coords.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, z)| z / zc));
    }
    Ok(out)
}

/// Chart components of the homogeneous velocity `v` at representative `z`
/// (any scaling, any vertical part).
pub fn chart_velocity(
    z: &[Complex64],
    v: &[Complex64],
    groups: &[Range<usize>],
    chart: &Chart,
) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for (fi, (g, &c)) in groups.iter().zip(&chart.0).enumerate() {
        let zc = z[g.start + c];
        if zc.norm() < 1e-14 * norm(&z[g.clone()]) {
            return Err(Error::ChartUndefined { factor: fi, index: c });
        }
        let vc = v[g.start + c];
        for j in g.clone() {
            if j != g.start + c {
                out.push((v[j] * zc - z[j] * vc) / (zc * zc));
            }
        }
    }
    Ok(out)
}

/// Normalised symplectic form on two homogeneous velocities `a`, `b` at an
/// arbitrary (non-normalised) representative `z`.
pub fn omega_raw(z: &[Complex64], a: &[Complex64], b: &[Complex64], groups: &[Range<usize>]) -> f64 {
    let mut total = 0.0;
    for g in groups {
        let zf = &z[g.clone()];
        let n2: f64 = zf.iter().map(|x| x.norm_sqr()).sum();
        let za = hdot(zf, &a[g.clone()]);
        let zb = hdot(zf, &b[g.clone()]);
        // ⟨h(a), h(b)⟩ with h(x) = (x - ⟨z,x⟩ z/|z|²)/|z|
        let ab = hdot(&a[g.clone()], &b[g.clone()]);
        let inner = (ab - za.conj() * zb / n2) / n2;
        total += inner.im;
    }
    total / PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub base: ProductPoint,
    /// Horizontal lift at the stored unit representative of `base`.
    pub components: Vec<Complex64>,
}

impl TangentVector {
    /// Horizontal part of an arbitrary homogeneous velocity at `base`.
    pub fn horizontal(base: &ProductPoint, raw: &[Complex64]) -> TangentVector {
        let groups: Vec<Range<usize>> = base
            .factors
            .iter()
            .scan(0, |off, f| {
                let g = *off..*off + f.coords.len();
                *off = g.end;
                Some(g)
            })
            .collect();
        TangentVector { base: base.clone(), components: horizontal_components(&base.flat(), &groups, raw) }
    }

    pub fn from_chart(base: &ProductPoint, chart: &Chart, comps: &[Complex64]) -> Result<TangentVector> {
        let z = base.flat();
        let mut raw = vec![ZERO; z.len()];
        let mut k = 0;
        let mut off = 0;
        for (fi, (f, &c)) in base.factors.iter().zip(&chart.0).enumerate() {
            let zc = f.coords[c];
            if zc.norm() < 1e-14 {
                return Err(Error::ChartUndefined { factor: fi, index: c });
            }
            for j in 0..f.coords.len() {
                if j != c {
                    raw[off + j] = comps[k] * zc;
                    k += 1;
                }
            }
            off += f.coords.len();
        }
        Ok(Self::horizontal(base, &raw))
    }

    pub fn chart_components(&self, chart: &Chart) -> Result<Vec<Complex64>> {
        let groups = groups_of(&self.base.factors.iter().map(|f| f.dim()).collect::<Vec<_>>());
        chart_velocity(&self.base.flat(), &self.components, &groups, chart)
    }

    /// Components re-expressed at another representative of the same point.
    pub fn components_at(&self, base: &ProductPoint) -> Result<Vec<Complex64>> {
        if self.base.factors.len() != base.factors.len() {
            return Err(Error::BaseMismatch);
        }
        let mut out = Vec::with_capacity(self.components.len());
        let mut off = 0;
        for (a, b) in self.base.factors.iter().zip(&base.factors) {
            if a.coords.len() != b.coords.len() || a.distance(b) > 1e-7 {
                return Err(Error::BaseMismatch);
            }
            let ov = hdot(&a.coords, &b.coords);
            let phase = ov / ov.norm();
            out.extend(self.components[off..off + a.coords.len()].iter().map(|v| v * phase));
            off += a.coords.len();
        }
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> TangentVector {
        TangentVector { base: self.base.clone(), components: self.components.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &TangentVector) -> Result<TangentVector> {
        let o = other.components_at(&self.base)?;
        Ok(TangentVector {
            base: self.base.clone(),
            components: self.components.iter().zip(&o).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn norm(&self) -> f64 {
        norm(&self.components)
    }
}

pub fn normalize(p: &HomogeneousPoint) -> Result<HomogeneousPoint> {
    HomogeneousPoint::new(p.coords.clone()).map(|q| q.normalize())
}

pub fn symplectic_value(m: &AmbientSpace, u: &TangentVector, v: &TangentVector) -> Result<f64> {
    m.check(&u.base)?;
    let vb = v.components_at(&u.base)?;
    Ok(hdot(&u.components, &vb).im / PI)
}

pub fn apply_complex_structure(u: &TangentVector) -> TangentVector {
    TangentVector { base: u.base.clone(), components: u.components.iter().map(|v| v * I).collect() }
}

/// Max `|dP(v)| / |∇P|` over the constraints.
pub fn constraint_tangency(m: &AmbientSpace, u: &TangentVector) -> f64 {
    let z = u.base.flat();
    m.constraints
        .iter()
        .map(|c| {
            let g = c.gradient(&z);
            let d: Complex64 = g.iter().zip(&u.components).map(|(a, b)| a * b).sum();
            d.norm() / norm(&g).max(1e-300)
        })
        .fold(0.0, f64::max)
}

pub fn on_manifold(m: &AmbientSpace, p: &ProductPoint, tol: f64) -> (bool, f64) {
    let r = m.residual(p);
    (r < tol, r)
}

/// Complex orthonormal basis of the (constraint-restricted) tangent space,
/// as horizontal lifts.
pub fn tangent_basis(m: &AmbientSpace, p: &ProductPoint) -> Result<Vec<Vec<Complex64>>> {
    let z = p.flat();
    let groups = m.groups();
    let n = z.len();
    let mut candidates: Vec<Vec<Complex64>> = Vec::new();
    for c in &m.constraints {
        let g: Vec<Complex64> = c.gradient(&z).iter().map(|x| x.conj()).collect();
        candidates.push(horizontal_components(&z, &groups, &g));
    }
    let nc = candidates.len();
    for j in 0..n {
        let mut e = vec![ZERO; n];
        e[j] = Complex64::new(1.0, 0.0);
        candidates.push(horizontal_components(&z, &groups, &e));
    }
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut normals = 0;
    for (idx, mut v) in candidates.into_iter().enumerate() {
        for _ in 0..2 {
            for b in &basis {
                let c = hdot(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let nv = norm(&v);
        if nv > 1e-6 {
            basis.push(v.iter().map(|x| x / nv).collect());
            if idx < nc {
                normals += 1;
            }
        }
    }
    if normals != nc || basis.len() - normals != m.dim() {
        return Err(Error::Invalid(format!(
            "tangent space of {} has dimension {} at this point, expected {}",
            m.name,
            basis.len() - normals,
            m.dim()
        )));
    }
    Ok(basis.split_off(normals))
}

/// Removes from `raw` its component along each unit factor of `z`.
pub fn horizontal_components(z: &[Complex64], groups: &[Range<usize>], raw: &[Complex64]) -> Vec<Complex64> {
    let mut v = raw.to_vec();
    for g in groups {
        let c = hdot(&z[g.clone()], &v[g.clone()]);
        for j in g.clone() {
            v[j] -= c * z[j];
        }
    }
    v
}

/// Orthogonal projection of a homogeneous velocity onto `T_p M`.
pub fn project_tangent(m: &AmbientSpace, p: &ProductPoint, raw: &[Complex64]) -> Result<TangentVector> {
    let basis = tangent_basis(m, p)?;
    let mut out = vec![ZERO; raw.len()];
    for b in &basis {
        let c = hdot(b, raw);
        for (o, x) in out.iter_mut().zip(b) {
            *o += c * x;
        }
    }
    Ok(TangentVector { base: p.clone(), components: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn quadric() -> AmbientSpace {
        let q =
            MultiPoly::from_terms(6, &[(1.0, &[(0, 1), (1, 1)]), (1.0, &[(2, 1), (3, 1)]), (1.0, &[(4, 1), (5, 1)])]);
        AmbientSpace::new("Q", vec![5], vec![q], 4).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let p = normalize(&HomogeneousPoint::from_real(&[2.0, 0.0]).unwrap()).unwrap();
        assert!((p.coords[0] - c(1.0, 0.0)).norm() < 1e-15 && p.coords[1].norm() == 0.0);
        let p = normalize(&HomogeneousPoint::new(vec![c(0.0, 0.0), c(0.0, 3.0)]).unwrap()).unwrap();
        assert!((p.coords[1] - c(1.0, 0.0)).norm() < 1e-15);
        let p = normalize(&HomogeneousPoint::from_real(&[1.0, 1.0]).unwrap()).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((p.coords[0] - c(h, 0.0)).norm() < 1e-15 && (p.coords[1] - c(h, 0.0)).norm() < 1e-15);
        assert_eq!(HomogeneousPoint::from_real(&[0.0, 0.0]).unwrap_err(), Error::ZeroPoint);
    }

    #[test]
    fn chart_examples() {
        let p = ProductPoint::single(vec![c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        let t = chart_coords(&p, &Chart(vec![0])).unwrap();
        assert!((t[0] - c(2.0, 0.0)).norm() < 1e-14);
        let p = ProductPoint::single(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(chart_coords(&p, &Chart(vec![0])), Err(Error::ChartUndefined { .. })));
        let p = ProductPoint::single(vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let t = chart_coords(&p, &Chart(vec![0])).unwrap();
        assert!((t[0] - c(1.0, 0.0)).norm() < 1e-14 && t[1].norm() < 1e-14);
    }

    #[test]
    fn quadric_membership() {
        let q = quadric();
        let on =
            |v: &[f64]| on_manifold(&q, &ProductPoint::single(v.iter().map(|&x| c(x, 0.0)).collect()).unwrap(), 1e-12);
        assert!(on(&[1.0, -1.0, 1.0, 1.0, 0.0, 0.0]).0);
        assert!(on(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).0);
        assert!(!on(&[1.0, 1.0, 1.0, 1.0, 0.0, 0.0]).0);
    }

    #[test]
    fn complex_structure_and_tamedness() {
        let q = quadric();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let p = q.random_point(&mut rng).unwrap();
            let basis = tangent_basis(&q, &p).unwrap();
            assert_eq!(basis.len(), 4);
            let u = TangentVector { base: p.clone(), components: basis[0].clone() };
            let iu = apply_complex_structure(&u);
            assert!(constraint_tangency(&q, &iu) < 1e-8);
            assert!(symplectic_value(&q, &u, &iu).unwrap() > 0.0);
            let iiu = apply_complex_structure(&iu);
            assert!(iiu.add(&u).unwrap().norm() < 1e-15);
            assert_eq!(symplectic_value(&q, &u, &u).unwrap(), 0.0);
        }
    }

    #[test]
    fn chart_round_trip_of_tangent() {
        let m = AmbientSpace::new("P2", vec![2], vec![], 3).unwrap();
        let p = ProductPoint::single(vec![c(1.0, 0.5), c(-0.3, 2.0), c(0.7, 0.1)]).unwrap();
        let comps = vec![c(0.3, -1.0), c(2.0, 0.5)];
        let v = TangentVector::from_chart(&p, &Chart(vec![0]), &comps).unwrap();
        let back = v.chart_components(&Chart(vec![0])).unwrap();
        for (a, b) in comps.iter().zip(&back) {
            assert!((a - b).norm() < 1e-13);
        }
        let _ = m;
    }
}
