//! Pencil maps, section curves with their deck transformations, and loops
//! on sections.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{AmbientSpace, HomogeneousPoint, ProductPoint};
use crate::poly::{MultiPoly, UniPoly};
use crate::quadrature::{chain_area, Chain};
use crate::symplectic::{hamiltonian_field, MomentMap};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `Ψ = [w_0 : w_1 : …]`. The target line is parametrised by `(w_0, w_1)`;
/// when more components are present they are tied together by
/// `base_constraint · w = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PencilMap {
    pub components: Vec<MultiPoly>,
    pub base_constraint: Option<Vec<Complex64>>,
    /// Each entry is a polynomial system whose zero set is part of the base set.
    pub base_set: Vec<Vec<MultiPoly>>,
    /// Points of the target (in `w` coordinates) with degenerate fibers.
    pub singular_values: Vec<Vec<Complex64>>,
}

pub const BASE_SET_THRESHOLD: f64 = 1e-12;

impl PencilMap {
    pub fn w(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.components.iter().map(|c| c.eval(z)).collect()
    }

    /// Affine coordinate on the target line in the better of its two charts,
    /// together with the chart used (`false`: `w_1/w_0`, `true`: `w_0/w_1`).
    pub fn affine(&self, z: &[Complex64]) -> Result<(Complex64, bool)> {
        let w = self.w(z);
        if w[0].norm().max(w[1].norm()) < BASE_SET_THRESHOLD {
            return Err(Error::OnBaseSet);
        }
        Ok(if w[0].norm() >= w[1].norm() { (w[1] / w[0], false) } else { (w[0] / w[1], true) })
    }

    pub fn base_coords(w: &[Complex64]) -> [Complex64; 2] {
        [w[0], w[1]]
    }

    /// Univariate pullbacks of `(w_0, w_1)` along a section, with the formal
    /// degree of the pulled-back forms.
    pub fn pullback(&self, section: &SectionCurve) -> (UniPoly, UniPoly, usize) {
        let p = pad(self.components[0].compose(&section.coords), 0);
        let q = pad(self.components[1].compose(&section.coords), 0);
        let groups = crate::geometry::groups_of(&section.dims);
        let md = self.components[0].multidegree(&groups).unwrap_or_default();
        let formal: usize = md.iter().zip(section.factor_degrees()).map(|(&a, b)| a as usize * b).sum();
        (pad(p, formal), pad(q, formal), formal)
    }
}

fn pad(mut p: UniPoly, len: usize) -> UniPoly {
    while p.coeffs.len() < len + 1 {
        p.coeffs.push(ZERO);
    }
    p
}

/// Normalised `[w_0 : w_1 : …]` at `p`.
pub fn pencil_value(psi: &PencilMap, p: &ProductPoint) -> Result<HomogeneousPoint> {
    let w = psi.w(&p.flat());
    if w.iter().all(|x| x.norm() < BASE_SET_THRESHOLD) {
        return Err(Error::OnBaseSet);
    }
    Ok(HomogeneousPoint::new(w)?.normalize())
}

/// Residual `|c · w|` of the linear relation on the target, at a point.
pub fn base_constraint_residual(psi: &PencilMap, v: &HomogeneousPoint) -> f64 {
    match &psi.base_constraint {
        None => 0.0,
        Some(c) => {
            let u = v.unit();
            c.iter().zip(&u.coords).map(|(a, b)| a * b).sum::<Complex64>().norm()
        }
    }
}

/// Largest spherical speed of `Ψ` along `X_f` over `samples` random points of `M`.
pub fn check_invariance(m: &AmbientSpace, psi: &PencilMap, f: &MomentMap, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(samples);
    while pts.len() < samples {
        let p = m.random_point(&mut rng)?;
        if psi.affine(&p.flat()).is_ok() {
            pts.push(p);
        }
    }
    let vals = crate::par::map_slice(&pts, |p| -> Result<f64> {
        let x = hamiltonian_field(m, f, p)?;
        let z = p.flat();
        let (zeta, chart) = psi.affine(&z)?;
        let at = |h: f64| -> Result<Complex64> {
            let y: Vec<Complex64> = z.iter().zip(&x.components).map(|(a, b)| a + b * h).collect();
            let w = psi.w(&y);
            Ok(if chart { w[0] / w[1] } else { w[1] / w[0] })
        };
        let d = |h: f64| -> Result<Complex64> { Ok((at(h)? - at(-h)?) / (2.0 * h)) };
        let h = 1e-5;
        let deriv = (d(h / 2.0)? * 4.0 - d(h)?) / 3.0;
        Ok(deriv.norm() / (1.0 + zeta.norm_sqr()))
    });
    let mut worst: f64 = 0.0;
    for v in vals {
        worst = worst.max(v?);
    }
    Ok(worst)
}

/// `s ↦ (a s + b)/(c s + d)` on the parameter sphere; `None` is `s = ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mobius {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mobius { a, b, c, d }
    }

    pub fn rotation(angle: f64) -> Self {
        Mobius::new(Complex64::from_polar(1.0, angle), ZERO, ZERO, Complex64::new(1.0, 0.0))
    }

    pub fn apply(&self, s: Option<Complex64>) -> Option<Complex64> {
        match s {
            None => (self.c.norm() > 0.0).then(|| self.a / self.c),
            Some(s) => {
                let den = self.c * s + self.d;
                (den.norm() > 1e-300).then(|| (self.a * s + self.b) / den)
            }
        }
    }
}

/// Rational curve `s ↦ [coords(s)]` on `M`, with the covering data of `Ψ`
/// restricted to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionCurve {
    pub name: String,
    pub dims: Vec<usize>,
    /// One polynomial in `s` per homogeneous coordinate.
    pub coords: Vec<UniPoly>,
    pub covering_degree_d: usize,
    pub total_area_m: f64,
    /// Registry branch parameters (`None` is `s = ∞`).
    pub branch_points: Vec<Option<Complex64>>,
    pub involutions: Vec<Mobius>,
    /// `s / round_scale` is a coordinate in which the deck maps act by
    /// rotations of the round sphere.
    pub round_scale: f64,
}

impl SectionCurve {
    pub fn factor_degrees(&self) -> Vec<usize> {
        crate::geometry::groups_of(&self.dims)
            .iter()
            .map(|g| self.coords[g.clone()].iter().map(|p| p.degree(0.0).unwrap_or(0)).max().unwrap_or(0))
            .collect()
    }

    pub fn eval(&self, s: Complex64) -> Vec<Complex64> {
        self.coords.iter().map(|p| p.eval(s)).collect()
    }

    pub fn derivative(&self, s: Complex64) -> Vec<Complex64> {
        self.coords.iter().map(|p| p.derivative().eval(s)).collect()
    }

    /// Homogeneous coordinates at a projective parameter.
    pub fn eval_proj(&self, s: Option<Complex64>) -> Vec<Complex64> {
        match s {
            Some(s) => self.eval(s),
            None => {
                let degs = self.factor_degrees();
                let groups = crate::geometry::groups_of(&self.dims);
                let mut out = vec![ZERO; self.coords.len()];
                for (g, d) in groups.iter().zip(degs) {
                    for j in g.clone() {
                        out[j] = self.coords[j].coeffs.get(d).copied().unwrap_or(ZERO);
                    }
                }
                out
            }
        }
    }

    pub fn point(&self, s: Option<Complex64>) -> Result<ProductPoint> {
        ProductPoint::from_flat(&self.dims, &self.eval_proj(s))
    }

    pub fn to_round(&self, s: Option<Complex64>) -> Option<Complex64> {
        s.map(|s| s / self.round_scale)
    }

    /// Chordal distance on the unit-diameter-two round sphere.
    pub fn chordal(&self, a: Option<Complex64>, b: Option<Complex64>) -> f64 {
        match (self.to_round(a), self.to_round(b)) {
            (None, None) => 0.0,
            (Some(u), None) | (None, Some(u)) => 2.0 / (1.0 + u.norm_sqr()).sqrt(),
            (Some(u), Some(v)) => 2.0 * (u - v).norm() / ((1.0 + u.norm_sqr()) * (1.0 + v.norm_sqr())).sqrt(),
        }
    }

    /// 256 parameters spread over the sphere.
    pub fn sample_grid(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(256);
        for i in 0..16 {
            let theta = PI * (i as f64 + 0.5) / 16.0;
            for j in 0..16 {
                out.push(Complex64::from_polar((theta / 2.0).tan() * self.round_scale, TAU * j as f64 / 16.0));
            }
        }
        out
    }
}

/// Largest `|f ∘ Σ|` over the sample grid.
pub fn section_residuals(section: &SectionCurve, maps: &[MomentMap]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in section.sample_grid() {
        let p = section.point(Some(s))?;
        for f in maps {
            worst = worst.max(f.eval(&p).abs());
        }
    }
    Ok(worst)
}

/// Largest constraint residual of the section over the sample grid.
pub fn section_on_manifold(m: &AmbientSpace, section: &SectionCurve) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in section.sample_grid() {
        worst = worst.max(m.residual(&section.point(Some(s))?));
    }
    Ok(worst)
}

/// Number of parameters mapped to the base point `q = [q_0 : q_1]`.
pub fn covering_degree(section: &SectionCurve, psi: &PencilMap, q: [Complex64; 2]) -> Result<usize> {
    let (p0, p1, formal) = psi.pullback(section);
    let eq = p0.scale(q[1]).add(&p1.scale(-q[0]));
    eq.count_projective_roots(formal, 1e-12)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub param: Option<Complex64>,
    pub multiplicity: usize,
    pub image: HomogeneousPoint,
}

/// Critical points of `Ψ ∘ Σ`: zeros of the Wronskian `P'Q - PQ'`, with the
/// deficit of its degree accounting for `s = ∞`.
pub fn branch_points(section: &SectionCurve, psi: &PencilMap) -> Result<Vec<BranchPoint>> {
    let (p, q, formal) = psi.pullback(section);
    let w = p.derivative().mul(&q).add(&p.mul(&q.derivative()).scale(Complex64::new(-1.0, 0.0)));
    let w_formal = 2 * formal - 2;
    let deg = w.degree(1e-12).ok_or(Error::IdenticallyZero)?;
    let scale = w.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut params: Vec<(Option<Complex64>, usize)> = Vec::new();
    let mut low = 0;
    while w.coeffs[low].norm() <= 1e-12 * scale {
        low += 1;
    }
    if low > 0 {
        params.push((Some(ZERO), low));
    }
    let rest = UniPoly::new(w.coeffs[low..=deg].to_vec());
    for r in rest.roots(1e-12) {
        match params.iter_mut().find(|(s, _)| s.map(|s| (s - r).norm() < 1e-5 * (1.0 + r.norm())).unwrap_or(false)) {
            Some(entry) => entry.1 += 1,
            None => params.push((Some(r), 1)),
        }
    }
    if w_formal > deg {
        params.push((None, w_formal - deg));
    }
    params
        .into_iter()
        .map(|(s, mult)| {
            let image = pencil_value(psi, &section.point(s)?)?;
            Ok(BranchPoint { param: s, multiplicity: mult, image })
        })
        .collect()
}

/// A loop on a section: in the isometric chart `ξ ↦ (ξ + c)/(1 - c̄ξ)`
/// centred at `center` (round coordinates), `ξ(θ) = r e^{iθ}(1 + Σ c_k e^{ikθ})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopSpec {
    pub center: Complex64,
    pub radius: f64,
    #[serde(default)]
    pub fourier_perturbation: Vec<Complex64>,
    pub orientation: i8,
}

impl LoopSpec {
    pub fn circle(center: Complex64, radius: f64) -> Self {
        LoopSpec { center, radius, fourier_perturbation: Vec::new(), orientation: 1 }
    }

    pub fn reversed(&self) -> Self {
        LoopSpec { orientation: -self.orientation, ..self.clone() }
    }

    fn shape(&self, theta: f64) -> (Complex64, Complex64) {
        let e = Complex64::from_polar(1.0, theta);
        let mut f = Complex64::new(1.0, 0.0);
        let mut df = ZERO;
        for (k, c) in self.fourier_perturbation.iter().enumerate() {
            let k = (k + 1) as f64;
            let ek = Complex64::from_polar(1.0, k * theta);
            f += c * ek;
            df += c * ek * Complex64::new(0.0, k);
        }
        (e * f * self.radius, (e * Complex64::new(0.0, 1.0) * f + e * df) * self.radius)
    }

    /// Chart point `ξ` and `dξ/dθ` at angle `θ ∈ [0, 2π)`.
    pub fn xi(&self, theta: f64) -> (Complex64, Complex64) {
        let o = self.orientation as f64;
        let (x, dx) = self.shape(o * theta);
        (x, dx * o)
    }

    /// Section parameter `s` and `ds/dξ` at chart point `ξ`.
    pub fn chart_to_param(&self, section: &SectionCurve, xi: Complex64) -> (Complex64, Complex64) {
        let c = self.center / section.round_scale;
        let den = Complex64::new(1.0, 0.0) - c.conj() * xi;
        let u = (xi + c) / den;
        let du = (1.0 + c.norm_sqr()) / (den * den);
        (u * section.round_scale, du * section.round_scale)
    }

    pub fn param_to_chart(&self, section: &SectionCurve, s: Option<Complex64>) -> Option<Complex64> {
        let c = self.center / section.round_scale;
        match s {
            None => (c.norm() > 0.0).then(|| -1.0 / c.conj()),
            Some(s) => {
                let u = s / section.round_scale;
                let den = Complex64::new(1.0, 0.0) + c.conj() * u;
                (den.norm() > 1e-300).then(|| (u - c) / den)
            }
        }
    }

    /// Section parameter and `ds/dθ`.
    pub fn param(&self, section: &SectionCurve, theta: f64) -> (Complex64, Complex64) {
        let (x, dx) = self.xi(theta);
        let (s, ds) = self.chart_to_param(section, x);
        (s, ds * dx)
    }

    pub fn samples(&self, section: &SectionCurve, n: usize) -> Vec<Complex64> {
        (0..n).map(|i| self.param(section, TAU * i as f64 / n as f64).0).collect()
    }

    /// Whether a parameter lies strictly inside the loop.
    pub fn encloses(&self, section: &SectionCurve, s: Option<Complex64>) -> bool {
        match self.param_to_chart(section, s) {
            None => false,
            Some(x) => {
                let theta = x.arg();
                let (edge, _) = self.shape(theta);
                x.norm() < edge.norm()
            }
        }
    }

    /// The disc bounded by the loop, as a chain on `M`; boundary at `u = 1`.
    pub fn disc_chain(&self, section: &SectionCurve) -> Chain {
        let lp = self.clone();
        let lp2 = self.clone();
        let sec2 = section.clone();
        Chain::holomorphic(
            &section.dims,
            move |u, v| {
                let (x, dx) = lp.xi(TAU * v);
                (x * u, x, dx * (TAU * u))
            },
            move |xi| {
                let (s, ds) = lp2.chart_to_param(&sec2, xi);
                let d = sec2.derivative(s).into_iter().map(|z| z * ds).collect();
                (sec2.eval(s), d)
            },
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disjointness {
    pub disjoint: bool,
    pub min_distance: f64,
}

pub const BRANCH_MARGIN: f64 = 1e-3;
const LOOP_SAMPLES: usize = 512;

/// Minimum chordal distance between the loop and each of its deck images,
/// and between the loop and the branch points.
pub fn deck_orbit_disjoint(lp: &LoopSpec, section: &SectionCurve, tol: f64) -> Disjointness {
    let pts = lp.samples(section, LOOP_SAMPLES);
    let mut min_d = f64::INFINITY;
    for b in &section.branch_points {
        for s in &pts {
            min_d = min_d.min(section.chordal(Some(*s), *b));
        }
    }
    for tau in &section.involutions {
        let img: Vec<Option<Complex64>> = pts.iter().map(|s| tau.apply(Some(*s))).collect();
        let d = crate::par::map_slice(&pts, |s| {
            img.iter().map(|t| section.chordal(Some(*s), *t)).fold(f64::INFINITY, f64::min)
        });
        min_d = d.into_iter().fold(min_d, f64::min);
    }
    // crossing curves can keep sampled points up to one sample spacing apart
    let spacing = pts
        .iter()
        .zip(pts.iter().cycle().skip(1))
        .map(|(a, b)| section.chordal(Some(*a), Some(*b)))
        .fold(0.0, f64::max);
    Disjointness { disjoint: min_d > tol.max(spacing), min_distance: min_d }
}

/// Minimum chordal distance from the loop to the branch points, ignoring
/// the branch point at the centre.
pub fn branch_clearance(lp: &LoopSpec, section: &SectionCurve) -> f64 {
    let pts = lp.samples(section, LOOP_SAMPLES);
    let mut min_d = f64::INFINITY;
    for b in &section.branch_points {
        if section.chordal(*b, Some(lp.center)) < 1e-12 {
            continue;
        }
        for s in &pts {
            min_d = min_d.min(section.chordal(Some(*s), *b));
        }
    }
    min_d
}

/// Largest admissible radius at a centre, by bisection on deck disjointness
/// (Chekanov loops) or on branch clearance alone (standard loops, which
/// encircle the branch point at their centre).
pub fn max_feasible_radius(section: &SectionCurve, center: Complex64, standard: bool) -> f64 {
    let ok = |r: f64| {
        let lp = LoopSpec::circle(center, r);
        if standard {
            branch_clearance(&lp, section) > BRANCH_MARGIN
        } else {
            deck_orbit_disjoint(&lp, section, BRANCH_MARGIN).disjoint
        }
    };
    // radius 1 in the isometric chart is a great circle; larger discs are
    // more than a hemisphere and never fit inside a covering piece
    let (mut lo, mut hi) = (0.0, 1.0);
    if ok(hi) {
        return hi;
    }
    if !ok(1e-6) {
        return 0.0;
    }
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Circle at `center` bounding a disc of area `target` (within `tol`) whose
/// deck images stay disjoint from it.
pub fn loop_with_disc_area(
    m: &AmbientSpace,
    section: &SectionCurve,
    center: Complex64,
    target: f64,
    tol: f64,
) -> Result<LoopSpec> {
    search_loop(m, section, center, target, tol, false)
}

/// Circle around the branch point `center` bounding a disc of area `target`
/// and no other branch point.
pub fn standard_loop_with_disc_area(
    m: &AmbientSpace,
    section: &SectionCurve,
    center: Complex64,
    target: f64,
    tol: f64,
) -> Result<LoopSpec> {
    search_loop(m, section, center, target, tol, true)
}

fn search_loop(
    m: &AmbientSpace,
    section: &SectionCurve,
    center: Complex64,
    target: f64,
    tol: f64,
    standard: bool,
) -> Result<LoopSpec> {
    if !(target > 0.0 && target < section.total_area_m) {
        return Err(Error::Invalid(format!("target area {target} outside (0, {})", section.total_area_m)));
    }
    let area = |r: f64| -> Result<f64> {
        Ok(chain_area(m, &LoopSpec::circle(center, r).disc_chain(section), tol / 10.0)?.value)
    };
    let r_max = max_feasible_radius(section, center, standard);
    let a_max = if r_max > 0.0 { area(r_max)? } else { 0.0 };
    if a_max < target {
        return Err(Error::Infeasible { max_area: a_max, target });
    }
    // Illinois variant of regula falsi on r
    let (mut lo, mut hi) = (0.0, r_max);
    let (mut flo, mut fhi) = (-target, a_max - target);
    let mut side = 0i8;
    for _ in 0..100 {
        let r = if fhi - flo != 0.0 { hi - fhi * (hi - lo) / (fhi - flo) } else { 0.5 * (lo + hi) };
        let fr = area(r)? - target;
        if fr.abs() < tol / 4.0 {
            return Ok(LoopSpec::circle(center, r));
        }
        if fr > 0.0 {
            hi = r;
            fhi = fr;
            if side == 1 {
                flo /= 2.0;
            }
            side = 1;
        } else {
            lo = r;
            flo = fr;
            if side == -1 {
                fhi /= 2.0;
            }
            side = -1;
        }
    }
    Err(Error::NonConvergent { levels: 100, change: (hi - lo).abs() })
}

/// Areas of the `n` sectors between the meridians joining `a` and `b`,
/// starting from the ray through the chart angle `offset`. Meridians are the
/// rays of the chart `s ↦ (s - a)/(s - b)`, or `s ↦ s - a` when `b = ∞`.
pub fn piece_areas(
    m: &AmbientSpace,
    section: &SectionCurve,
    a: Complex64,
    b: Option<Complex64>,
    n: usize,
    offset: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    let width = TAU / n as f64;
    (0..n)
        .map(|j| {
            let start = offset + width * j as f64;
            let mut total = 0.0;
            for outer in [false, true] {
                let sec = section.clone();
                let chain = Chain::holomorphic(
                    &section.dims,
                    move |u, v| {
                        let ang = if outer { -(start + width) + width * v } else { start + width * v };
                        let e = Complex64::from_polar(1.0, ang);
                        (e * u, e, e * Complex64::new(0.0, width * u))
                    },
                    move |w| {
                        // chart value y = (s - a)/(s - b), with y = w or 1/w
                        let (y, dy) = if outer { (1.0 / w, -1.0 / (w * w)) } else { (w, Complex64::new(1.0, 0.0)) };
                        let (s, ds) = match b {
                            None => (y + a, dy),
                            Some(b) => {
                                let den = Complex64::new(1.0, 0.0) - y;
                                ((a - b * y) / den, (a - b) / (den * den) * dy)
                            }
                        };
                        let d = sec.derivative(s).into_iter().map(|z| z * ds).collect();
                        (sec.eval(s), d)
                    },
                );
                total += chain_area(m, &chain, tol / 4.0)?.value;
            }
            Ok(total)
        })
        .collect()
}
