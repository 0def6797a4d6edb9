//! Complex polynomials: univariate (for pullbacks to a section curve) and
//! sparse multivariate (for constraints, pencils and divisors).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::winding::winding;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Univariate polynomial, coefficients in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniPoly {
    pub coeffs: Vec<Complex64>,
}

impl UniPoly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        UniPoly { coeffs }
    }

    pub fn constant(c: Complex64) -> Self {
        UniPoly { coeffs: vec![c] }
    }

    pub fn monomial(c: Complex64, degree: usize) -> Self {
        let mut coeffs = vec![ZERO; degree + 1];
        coeffs[degree] = c;
        UniPoly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        UniPoly { coeffs: coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect() }
    }

    /// Length of the stored coefficient list minus one, zeros included.
    pub fn formal_degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Highest index with a coefficient above `tol` times the largest one.
    pub fn degree(&self, tol: f64) -> Option<usize> {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return None;
        }
        self.coeffs.iter().rposition(|c| c.norm() > tol * scale)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.degree(tol).is_none()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * s + c)
    }

    pub fn derivative(&self) -> UniPoly {
        if self.coeffs.len() <= 1 {
            return UniPoly::constant(ZERO);
        }
        UniPoly { coeffs: self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64).collect() }
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        let mut out = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly { coeffs: out }
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &UniPoly, i: usize| p.coeffs.get(i).copied().unwrap_or(ZERO);
        UniPoly { coeffs: (0..n).map(|i| get(self, i) + get(other, i)).collect() }
    }

    pub fn scale(&self, c: Complex64) -> UniPoly {
        UniPoly { coeffs: self.coeffs.iter().map(|&a| a * c).collect() }
    }

    pub fn pow(&self, e: u32) -> UniPoly {
        (0..e).fold(UniPoly::constant(ONE), |acc, _| acc.mul(self))
    }

    /// Cauchy bound on the modulus of the roots.
    pub fn root_bound(&self, tol: f64) -> f64 {
        match self.degree(tol) {
            None | Some(0) => 1.0,
            Some(d) => {
                let lead = self.coeffs[d].norm();
                1.0 + self.coeffs[..d].iter().map(|c| c.norm() / lead).fold(0.0, f64::max)
            }
        }
    }

    /// Number of roots in the finite plane, by the argument principle on a
    /// circle enclosing all of them.
    pub fn count_finite_roots(&self, tol: f64) -> Result<usize> {
        let deg = self.degree(tol).ok_or(Error::IdenticallyZero)?;
        let trimmed = UniPoly { coeffs: self.coeffs[..=deg].to_vec() };
        let mut radius = 2.0 * trimmed.root_bound(tol);
        for _ in 0..4 {
            let scale = trimmed.coeffs[deg].norm() * radius.powi(deg as i32);
            let w = winding(|t| Ok(trimmed.eval(Complex64::from_polar(radius, t)) / scale), 1e-9);
            match w {
                Ok(w) if w.residual() < 1e-6 => return Ok(w.degree() as usize),
                _ => radius *= 1.37,
            }
        }
        Err(Error::ContourThroughRoot)
    }

    /// Zero count over the whole Riemann sphere when this polynomial is the
    /// dehomogenisation of a form of degree `formal`: finite roots plus the
    /// order at infinity `formal - degree`.
    pub fn count_projective_roots(&self, formal: usize, tol: f64) -> Result<usize> {
        let deg = self.degree(tol).ok_or(Error::IdenticallyZero)?;
        if deg > formal {
            return Err(Error::Invalid(format!("degree {deg} exceeds formal degree {formal}")));
        }
        Ok(self.count_finite_roots(tol)? + (formal - deg))
    }

    /// Roots by Aberth-Ehrlich iteration.
    pub fn roots(&self, tol: f64) -> Vec<Complex64> {
        let deg = match self.degree(tol) {
            None | Some(0) => return Vec::new(),
            Some(d) => d,
        };
        let lead = self.coeffs[deg];
        let p = UniPoly { coeffs: self.coeffs[..=deg].iter().map(|&c| c / lead).collect() };
        let dp = p.derivative();
        let r = p.root_bound(1e-300);
        let mut z: Vec<Complex64> =
            (0..deg).map(|k| Complex64::from_polar(0.5 * r, TAU * k as f64 / deg as f64 + 0.4)).collect();
        for _ in 0..500 {
            let mut max_step: f64 = 0.0;
            for i in 0..deg {
                let ratio = p.eval(z[i]) / dp.eval(z[i]);
                let repulsion: Complex64 = (0..deg).filter(|&j| j != i).map(|j| ONE / (z[i] - z[j])).sum();
                let step = ratio / (ONE - ratio * repulsion);
                if step.is_finite() {
                    z[i] -= step;
                    max_step = max_step.max(step.norm());
                }
            }
            if max_step < 1e-15 * r.max(1.0) {
                break;
            }
        }
        z
    }
}

/// A monomial term over the global coordinate list of a product ambient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: Complex64,
    pub exponents: Vec<u32>,
}

/// Sparse multivariate polynomial in the concatenated homogeneous
/// coordinates of all factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiPoly {
    pub nvars: usize,
    pub terms: Vec<Term>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: Vec::new() }
    }

    /// Builds from `(coefficient, [(variable, exponent)])` pairs.
    pub fn from_terms(nvars: usize, terms: &[(f64, &[(usize, u32)])]) -> Self {
        let terms = terms
            .iter()
            .map(|(c, vars)| {
                let mut exponents = vec![0u32; nvars];
                for &(v, e) in vars.iter() {
                    exponents[v] += e;
                }
                Term { coeff: Complex64::new(*c, 0.0), exponents }
            })
            .collect();
        MultiPoly { nvars, terms }
    }

    /// The monomial `∏ z_v` over the listed variables (with repetition).
    pub fn monomial(nvars: usize, vars: &[usize]) -> Self {
        let mut exponents = vec![0u32; nvars];
        for &v in vars {
            exponents[v] += 1;
        }
        MultiPoly { nvars, terms: vec![Term { coeff: ONE, exponents }] }
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Term {
                    coeff: a.coeff * b.coeff,
                    exponents: a.exponents.iter().zip(&b.exponents).map(|(x, y)| x + y).collect(),
                });
            }
        }
        MultiPoly { nvars: self.nvars, terms }
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let one = MultiPoly { nvars: self.nvars, terms: vec![Term { coeff: ONE, exponents: vec![0; self.nvars] }] };
        (0..e).fold(one, |acc, _| acc.mul(self))
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.exponents.iter().zip(z).filter(|(e, _)| **e > 0).fold(t.coeff, |acc, (&e, &x)| acc * x.powu(e)))
            .sum()
    }

    /// Holomorphic gradient `∂P/∂z_j`.
    pub fn gradient(&self, z: &[Complex64]) -> Vec<Complex64> {
        let mut g = vec![ZERO; self.nvars];
        for t in &self.terms {
            for (j, &e) in t.exponents.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut v = t.coeff * e as f64;
                for (k, &ek) in t.exponents.iter().enumerate() {
                    let p = if k == j { ek - 1 } else { ek };
                    if p > 0 {
                        v *= z[k].powu(p);
                    }
                }
                g[j] += v;
            }
        }
        g
    }

    /// Degree in each variable group (one group per projective factor).
    /// Returns `None` if the terms disagree (not multi-homogeneous).
    pub fn multidegree(&self, groups: &[std::ops::Range<usize>]) -> Option<Vec<u32>> {
        let degs: Vec<Vec<u32>> = self
            .terms
            .iter()
            .filter(|t| t.coeff.norm() > 0.0)
            .map(|t| groups.iter().map(|g| t.exponents[g.clone()].iter().sum()).collect())
            .collect();
        let first = degs.first()?.clone();
        degs.iter().all(|d| *d == first).then_some(first)
    }

    /// Substitutes a univariate polynomial for every variable.
    pub fn compose(&self, subs: &[UniPoly]) -> UniPoly {
        let mut acc = UniPoly::constant(ZERO);
        for t in &self.terms {
            let mut m = UniPoly::constant(t.coeff);
            for (j, &e) in t.exponents.iter().enumerate() {
                if e > 0 {
                    m = m.mul(&subs[j].pow(e));
                }
            }
            acc = acc.add(&m);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn finite_root_count_matches_degree() {
        // (s-1)(s+2)(s-3i)
        let p = UniPoly::from_real(&[-1.0, 1.0])
            .mul(&UniPoly::from_real(&[2.0, 1.0]))
            .mul(&UniPoly::new(vec![Complex64::new(0.0, -3.0), c(1.0)]));
        assert_eq!(p.count_finite_roots(1e-12).unwrap(), 3);
        assert_eq!(p.count_projective_roots(5, 1e-12).unwrap(), 5);
    }

    #[test]
    fn aberth_finds_roots() {
        let p = UniPoly::from_real(&[-1.0, 0.0, 0.0, 0.0, 1.0]);
        let mut r = p.roots(1e-12);
        r.sort_by(|a, b| a.arg().partial_cmp(&b.arg()).unwrap());
        assert_eq!(r.len(), 4);
        for z in &r {
            assert!((z.powu(4) - c(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_polynomial_is_rejected() {
        let p = UniPoly::from_real(&[0.0, 0.0]);
        assert_eq!(p.count_projective_roots(1, 1e-12), Err(Error::IdenticallyZero));
    }

    #[test]
    fn multipoly_gradient_and_compose() {
        // z0 z1 + z2^2
        let p = MultiPoly::from_terms(3, &[(1.0, &[(0, 1), (1, 1)]), (1.0, &[(2, 2)])]);
        let z = [c(2.0), c(3.0), Complex64::new(0.0, 1.0)];
        assert_eq!(p.eval(&z), c(5.0));
        let g = p.gradient(&z);
        assert_eq!(g, vec![c(3.0), c(2.0), Complex64::new(0.0, 2.0)]);
        assert_eq!(p.multidegree(&[0..3]), Some(vec![2]));
        // [1 : 1 : s] gives 1 + s^2
        let subs = [UniPoly::from_real(&[1.0]), UniPoly::from_real(&[1.0]), UniPoly::from_real(&[0.0, 1.0])];
        assert_eq!(p.compose(&subs), UniPoly::from_real(&[1.0, 0.0, 1.0]));
    }
}
