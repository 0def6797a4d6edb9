//! Periods, Bohr-Sommerfeld levels, Maslov winding degrees and divisor
//! intersection counts.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{chart_velocity, groups_of, AmbientSpace, Chart, ProductPoint, TangentVector};
use crate::linalg::{det_complex, solve_complex};
use crate::model::{LoopSpec, SectionCurve};
use crate::poly::MultiPoly;
use crate::quadrature::{chain_area_with, Chain, QuadratureOptions};
use crate::symplectic::{hamiltonian_field, MomentMap};
use crate::torus::{FiberAction, TorusSample};
use crate::winding::{winding, Winding};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A loop on a torus with a 2-chain bounding it. The loop is the edge
/// `u = boundary_u` of the chain, traversed by `v`.
#[derive(Debug, Clone)]
pub struct BasisLoop {
    pub name: String,
    pub chain: Chain,
    pub boundary_u: f64,
    /// Loop points at `v = j / len`.
    pub samples: Vec<ProductPoint>,
}

impl BasisLoop {
    /// Largest distance between the chain edge and the loop samples.
    pub fn boundary_mismatch(&self) -> Result<f64> {
        let n = self.samples.len();
        let mut worst: f64 = 0.0;
        for (j, p) in self.samples.iter().enumerate() {
            let q = ProductPoint::from_flat(&self.chain.dims, &self.chain.point(self.boundary_u, j as f64 / n as f64))?;
            worst = worst.max(q.distance(p));
        }
        Ok(worst)
    }
}

fn shifted_weights(g: &MomentMap, dims: &[usize], upper: bool) -> Result<Vec<u32>> {
    let groups = groups_of(dims);
    let w = g.weights(groups.last().map(|r| r.end).unwrap_or(0));
    let mut out = vec![0u32; w.len()];
    for r in &groups {
        let ws = &w[r.clone()];
        let pivot = if upper {
            ws.iter().cloned().fold(f64::MIN, f64::max)
        } else {
            ws.iter().cloned().fold(f64::MAX, f64::min)
        };
        for j in r.clone() {
            let e = if upper { pivot - w[j] } else { w[j] - pivot };
            if (e - e.round()).abs() > 1e-9 {
                return Err(Error::Invalid(format!("{} has non-integral relative weights", g.name)));
            }
            out[j] = e.round() as u32;
        }
    }
    Ok(out)
}

/// Holomorphic disc swept by the complexified circle action of `g` from
/// `p` down to a fixed point. With `upper`, the disc closes at the
/// opposite fixed point instead.
pub fn orbit_chain(g: &MomentMap, p: &ProductPoint, upper: bool) -> Result<Chain> {
    let dims: Vec<usize> = p.factors.iter().map(|f| f.dim()).collect();
    let e = shifted_weights(g, &dims, upper)?;
    let z = p.flat();
    let sign = if upper { -1.0 } else { 1.0 };
    Ok(Chain::from_jet(&dims, move |u, v| {
        let phase = Complex64::from_polar(1.0, sign * TAU * v);
        let lam = phase * (1.0 - u);
        let dlu = -phase;
        let dlv = lam * Complex64::new(0.0, sign * TAU);
        let mut pt = Vec::with_capacity(z.len());
        let mut du = Vec::with_capacity(z.len());
        let mut dv = Vec::with_capacity(z.len());
        for (zj, &ej) in z.iter().zip(&e) {
            pt.push(zj * lam.powu(ej));
            let d = if ej == 0 { ZERO } else { zj * lam.powu(ej - 1) * ej as f64 };
            du.push(d * dlu);
            dv.push(d * dlv);
        }
        (pt, du, dv)
    }))
}

/// The section loop with its disc on `Σ`, then one fiber circle per
/// generator with its orbit disc, all through the grid point at index 0.
pub fn basis_loops(section: &SectionCurve, action: &FiberAction, t: &TorusSample) -> Result<Vec<BasisLoop>> {
    let shape = t.shape().to_vec();
    let lp = &t.construction.loop_spec;
    let mut out = vec![BasisLoop {
        name: "section loop".into(),
        chain: lp.disc_chain(section),
        boundary_u: 1.0,
        samples: (0..shape[0])
            .map(|i| {
                let mut idx = vec![0; shape.len()];
                idx[0] = i;
                t.at(&idx).clone()
            })
            .collect(),
    }];
    let base = t.at(&vec![0; shape.len()]).clone();
    for (j, g) in action.generators.iter().enumerate() {
        let samples = (0..shape[j + 1])
            .map(|m| {
                let mut idx = vec![0; shape.len()];
                idx[j + 1] = m;
                t.at(&idx).clone()
            })
            .collect();
        out.push(BasisLoop {
            name: format!("fiber circle {}", g.name),
            chain: orbit_chain(g, &base, false)?,
            boundary_u: 0.0,
            samples,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodVector {
    /// Periods reduced to `[0, 1)`.
    pub values: Vec<f64>,
    /// Signed areas of the bounding chains.
    pub raw: Vec<f64>,
    pub bounding_chains: Vec<String>,
    /// Change of each area when re-integrated at twice the resolution.
    pub recheck: Vec<f64>,
}

pub fn reduce_mod1(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if 1.0 - r < 1e-9 {
        0.0
    } else {
        r
    }
}

/// Distance from `x` to the nearest integer.
pub fn dist_to_z(x: f64) -> f64 {
    (x - x.round()).abs()
}

pub fn period_vector(m: &AmbientSpace, loops: &[BasisLoop], tol: f64) -> Result<PeriodVector> {
    let mut pv = PeriodVector { values: vec![], raw: vec![], bounding_chains: vec![], recheck: vec![] };
    for l in loops {
        let mis = l.boundary_mismatch()?;
        if mis > 1e-8 {
            return Err(Error::Invalid(format!("chain for {} misses its loop by {mis:.2e}", l.name)));
        }
        let a = chain_area_with(m, &l.chain, QuadratureOptions { tol, ..Default::default() })?;
        let b = chain_area_with(m, &l.chain, QuadratureOptions { tol, min_level: a.level + 1, max_level: 12 })?;
        pv.raw.push(a.value);
        pv.values.push(reduce_mod1(a.value));
        pv.bounding_chains.push(l.name.clone());
        pv.recheck.push((b.value - a.value).abs());
    }
    Ok(pv)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BSReport {
    /// `None` when no level up to `k_max` fits.
    pub level: Option<u32>,
    pub k_max: u32,
    pub tolerance: f64,
}

pub fn bs_level(values: &[f64], k_max: u32, tol: f64) -> BSReport {
    let level = (1..=k_max).find(|&k| values.iter().all(|p| dist_to_z(k as f64 * p) < tol));
    BSReport { level, k_max, tolerance: tol }
}

/// Whether every `k · p_i` is within `tol` of an integer.
pub fn is_bs_at(values: &[f64], k: u32, tol: f64) -> bool {
    values.iter().all(|p| dist_to_z(k as f64 * p) < tol)
}

/// `Res(dt / (P · D))`: the meromorphic top form on `M` with poles along `D`,
/// in an affine chart of the ambient product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeromorphicVolumeForm {
    pub dims: Vec<usize>,
    pub chart: Chart,
    pub pole_divisor: MultiPoly,
    pub constraints: Vec<MultiPoly>,
}

impl MeromorphicVolumeForm {
    pub fn new(m: &AmbientSpace, chart: Chart, pole_divisor: MultiPoly) -> Self {
        MeromorphicVolumeForm { dims: m.factor_dims.clone(), chart, pole_divisor, constraints: m.constraints.clone() }
    }

    /// Affine representative: each factor scaled so its chart coordinate is 1.
    fn affine_rep(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        let groups = groups_of(&self.dims);
        let mut y = z.to_vec();
        for (fi, (g, &c)) in groups.iter().zip(&self.chart.0).enumerate() {
            let zc = z[g.start + c];
            let n = z[g.clone()].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if zc.norm() < 1e-10 * n {
                return Err(Error::ChartUndefined { factor: fi, index: c });
            }
            for x in &mut y[g.clone()] {
                *x /= zc;
            }
        }
        Ok(y)
    }

    fn affine_indices(&self) -> Vec<usize> {
        groups_of(&self.dims)
            .iter()
            .zip(&self.chart.0)
            .flat_map(|(g, &c)| g.clone().filter(move |&j| j != g.start + c))
            .collect()
    }

    /// Determinant of `[w_1..w_r, v_1..v_n]` in chart coordinates, where the
    /// `w_i` are dual to the constraint differentials, before dividing by `D`.
    pub fn raw_determinant(&self, p: &ProductPoint, frame: &[Vec<Complex64>]) -> Result<Complex64> {
        let z = p.flat();
        let y = self.affine_rep(&z)?;
        let idx = self.affine_indices();
        let n_aff = idx.len();
        let r = self.constraints.len();
        if frame.len() + r != n_aff {
            return Err(Error::ShapeMismatch(format!("frame of {} vectors for dimension {}", frame.len(), n_aff - r)));
        }
        let groups = groups_of(&self.dims);
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n_aff);
        if r > 0 {
            let grads: Vec<Vec<Complex64>> = self
                .constraints
                .iter()
                .map(|c| {
                    let g = c.gradient(&y);
                    idx.iter().map(|&j| g[j]).collect()
                })
                .collect();
            // w = G^* (G G^*)^{-1}
            let mut gg = vec![ZERO; r * r];
            for a in 0..r {
                for b in 0..r {
                    gg[a * r + b] = grads[a].iter().zip(&grads[b]).map(|(x, y)| x * y.conj()).sum();
                }
            }
            for k in 0..r {
                let mut e = vec![ZERO; r];
                e[k] = Complex64::new(1.0, 0.0);
                let y = solve_complex(gg.clone(), e, r).ok_or(Error::SingularSystem)?;
                cols.push((0..n_aff).map(|j| (0..r).map(|a| grads[a][j].conj() * y[a]).sum()).collect());
            }
        }
        for v in frame {
            cols.push(chart_velocity(&z, v, &groups, &self.chart)?);
        }
        let mut a = vec![ZERO; n_aff * n_aff];
        for (c, col) in cols.iter().enumerate() {
            for (row, x) in col.iter().enumerate() {
                a[row * n_aff + c] = *x;
            }
        }
        Ok(det_complex(a, n_aff))
    }

    /// Divisor value at the affine representative.
    pub fn pole_value(&self, p: &ProductPoint) -> Result<Complex64> {
        let y = self.affine_rep(&p.flat())?;
        Ok(self.pole_divisor.eval(&y))
    }
}

/// `Ω(v_1, …, v_n)`; alternating and multilinear in the frame.
pub fn volume_form_value(omega: &MeromorphicVolumeForm, frame: &[TangentVector]) -> Result<Complex64> {
    let p = frame.first().ok_or_else(|| Error::ShapeMismatch("empty frame".into()))?.base.clone();
    let comps: Vec<Vec<Complex64>> = frame.iter().map(|v| v.components_at(&p)).collect::<Result<_>>()?;
    let d = omega.pole_value(&p)?;
    let z = p.flat();
    let y = omega.affine_rep(&z)?;
    let scale = y.iter().map(|x| x.norm()).fold(1.0, f64::max);
    let deg: u32 = omega.pole_divisor.terms.first().map(|t| t.exponents.iter().sum()).unwrap_or(0);
    if d.norm() < 1e-10 * scale.powi(deg as i32) {
        return Err(Error::OnPoleLocus);
    }
    Ok(omega.raw_determinant(&p, &comps)? / d)
}

/// Winding of `θ ↦ Ω(frame(θ))` over `θ ∈ [0, 2π)`.
pub fn maslov_degree<F>(omega: &MeromorphicVolumeForm, frame: F) -> Result<Winding>
where
    F: Fn(f64) -> Result<Vec<TangentVector>> + Sync + Send,
{
    winding(|theta| volume_form_value(omega, &frame(theta)?), 1e-8)
}

/// Frame `(X_{h_1}, …, X_{h_{n-1}}, γ̃')` along a loop on the section.
pub fn section_frame<'a>(
    m: &'a AmbientSpace,
    section: &'a SectionCurve,
    generators: &'a [MomentMap],
    lp: &'a LoopSpec,
) -> impl Fn(f64) -> Result<Vec<TangentVector>> + Sync + Send + 'a {
    move |theta| {
        let (s, ds) = lp.param(section, theta);
        let z = section.eval(s);
        let p = ProductPoint::from_flat(&section.dims, &z)?;
        let mut raw: Vec<Complex64> = section.derivative(s).into_iter().map(|d| d * ds).collect();
        for g in groups_of(&section.dims) {
            let n = z[g.clone()].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            for j in g {
                raw[j] /= n;
            }
        }
        let mut frame = generators.iter().map(|h| hamiltonian_field(m, h, &p)).collect::<Result<Vec<_>>>()?;
        frame.push(TangentVector::horizontal(&p, &raw));
        Ok(frame)
    }
}

/// Zeros of `D ∘ Σ` inside the loop, with multiplicity.
pub fn enclosed_divisor_count(section: &SectionCurve, d: &MultiPoly, lp: &LoopSpec) -> Result<usize> {
    let pb = d.compose(&section.coords);
    let formal = divisor_formal_degree(section, d);
    let deg = pb.degree(1e-12).ok_or(Error::IdenticallyZero)?;
    let scale = pb.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut low = 0;
    while pb.coeffs[low].norm() <= 1e-12 * scale {
        low += 1;
    }
    let mut count = if lp.encloses(section, Some(ZERO)) { low } else { 0 };
    let rest = crate::poly::UniPoly::new(pb.coeffs[low..=deg].to_vec());
    count += rest.roots(1e-12).into_iter().filter(|r| lp.encloses(section, Some(*r))).count();
    if lp.encloses(section, None) {
        count += formal - deg;
    }
    Ok(count)
}

fn divisor_formal_degree(section: &SectionCurve, d: &MultiPoly) -> usize {
    let md = d.multidegree(&groups_of(&section.dims)).unwrap_or_default();
    md.iter().zip(section.factor_degrees()).map(|(&a, b)| a as usize * b).sum()
}

/// Zero count of `D ∘ Σ` over the whole parameter sphere.
pub fn intersection_index(section: &SectionCurve, d: &MultiPoly) -> Result<usize> {
    let pb = d.compose(&section.coords);
    pb.count_projective_roots(divisor_formal_degree(section, d), 1e-12)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Monotone,
    NonMonotone,
    NotBsCan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaslovReport {
    pub degree: i64,
    pub winding: i64,
    pub enclosed_divisor: usize,
    pub expected: f64,
    pub verdict: Verdict,
    pub winding_residual: f64,
}

/// Degree of the section loop against `k · a`, given the periods.
#[allow(clippy::too_many_arguments)]
pub fn monotonicity_certificate(
    m: &AmbientSpace,
    section: &SectionCurve,
    generators: &[MomentMap],
    chart: &Chart,
    boundary_divisor: &MultiPoly,
    lp: &LoopSpec,
    area: f64,
    periods: &[f64],
    tol: f64,
) -> Result<MaslovReport> {
    let k = m.monotonicity_k;
    let omega = MeromorphicVolumeForm::new(m, chart.clone(), boundary_divisor.clone());
    let w = maslov_degree(&omega, section_frame(m, section, generators, lp))?;
    let enclosed = enclosed_divisor_count(section, boundary_divisor, lp)?;
    let sign = lp.orientation as i64;
    let degree = w.degree() + sign * enclosed as i64;
    let expected = k as f64 * area;
    let verdict = if !is_bs_at(periods, k, tol) {
        Verdict::NotBsCan
    } else if degree as f64 == expected.round() && dist_to_z(expected) < tol {
        Verdict::Monotone
    } else {
        Verdict::NonMonotone
    };
    Ok(MaslovReport {
        degree,
        winding: w.degree(),
        enclosed_divisor: enclosed,
        expected,
        verdict,
        winding_residual: w.residual(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiddleCase {
    pub holds: bool,
    pub total: i64,
    pub positive: i64,
    pub margin: i64,
}

/// `Σ ρ_i > Σ_{λ_i > 0} λ_i ρ_i`.
pub fn middle_case_check(lambda: &[i64], rho: &[i64]) -> Result<MiddleCase> {
    if lambda.len() != rho.len() {
        return Err(Error::LengthMismatch(lambda.len(), rho.len()));
    }
    if rho.iter().any(|&r| r < 0) {
        return Err(Error::Invalid("negative intersection count".into()));
    }
    let total: i64 = rho.iter().sum();
    let positive: i64 = lambda.iter().zip(rho).filter(|(l, _)| **l > 0).map(|(l, r)| l * r).sum();
    Ok(MiddleCase { holds: total > positive, total, positive, margin: total - positive })
}
