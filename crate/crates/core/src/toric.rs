//! Boundary divisor components, integer relations between them, the pencil
//! they define, and the reduced moment maps fixing that pencil.

use serde::{Deserialize, Serialize};

use crate::certify::{intersection_index, middle_case_check, MiddleCase};
use crate::error::{Error, Result};
use crate::geometry::groups_of;
use crate::model::SectionCurve;
use crate::poly::MultiPoly;
use crate::symplectic::MomentMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisorSet {
    pub names: Vec<String>,
    pub components: Vec<MultiPoly>,
    /// Character of each component under each map of the torus set.
    pub weights: Vec<Vec<i64>>,
    pub dims: Vec<usize>,
}

fn character(poly: &MultiPoly, maps: &[MomentMap]) -> Result<Vec<i64>> {
    let term = poly.terms.first().ok_or(Error::IdenticallyZero)?;
    maps.iter()
        .map(|f| {
            let w = f.weights(poly.nvars);
            let c: f64 = term.exponents.iter().zip(&w).map(|(&e, &x)| e as f64 * x).sum();
            if (c - c.round()).abs() > 1e-9 {
                return Err(Error::Invalid(format!("non-integral character under {}", f.name)));
            }
            Ok(c.round() as i64)
        })
        .collect()
}

impl DivisorSet {
    /// Monomial components with characters under `maps`. For a complete
    /// toric set of `n` maps more than `n` components are required.
    pub fn new(
        names: Vec<String>,
        components: Vec<MultiPoly>,
        maps: &[MomentMap],
        dims: &[usize],
        toric: bool,
    ) -> Result<Self> {
        if names.len() != components.len() {
            return Err(Error::LengthMismatch(names.len(), components.len()));
        }
        if toric && components.len() <= maps.len() {
            return Err(Error::Invalid(format!(
                "{} components for a {}-dimensional torus",
                components.len(),
                maps.len()
            )));
        }
        let weights = components.iter().map(|c| character(c, maps)).collect::<Result<_>>()?;
        Ok(DivisorSet { names, components, weights, dims: dims.to_vec() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToricRelation {
    pub lambda: Vec<i64>,
}

impl ToricRelation {
    pub fn new(lambda: Vec<i64>) -> Self {
        ToricRelation { lambda }
    }

    pub fn plus_set(&self) -> Vec<usize> {
        (0..self.lambda.len()).filter(|&i| self.lambda[i] > 0).collect()
    }

    pub fn minus_set(&self) -> Vec<usize> {
        (0..self.lambda.len()).filter(|&i| self.lambda[i] < 0).collect()
    }
}

/// `D⁺ = ∏_{λ>0} D_i^{λ_i}` and `D⁻ = ∏_{λ<0} D_i^{-λ_i}`; both must have the
/// same multidegree.
pub fn split_relation(r: &ToricRelation, d: &DivisorSet) -> Result<(MultiPoly, MultiPoly)> {
    if r.lambda.len() != d.components.len() {
        return Err(Error::LengthMismatch(r.lambda.len(), d.components.len()));
    }
    let nvars = d.components[0].nvars;
    let one = MultiPoly::monomial(nvars, &[]);
    let mut plus = one.clone();
    let mut minus = one;
    for (l, c) in r.lambda.iter().zip(&d.components) {
        if *l > 0 {
            plus = plus.mul(&c.pow(*l as u32));
        } else if *l < 0 {
            minus = minus.mul(&c.pow((-l) as u32));
        }
    }
    let groups = groups_of(&d.dims);
    let dp = plus.multidegree(&groups).unwrap_or_default();
    let dm = minus.multidegree(&groups).unwrap_or_default();
    if dp != dm {
        return Err(Error::Unbalanced {
            plus: dp.into_iter().map(i64::from).collect(),
            minus: dm.into_iter().map(i64::from).collect(),
        });
    }
    Ok((plus, minus))
}

/// Integer basis of `{a ∈ Zⁿ : a · χ = 0}` by unimodular column reduction.
pub fn integer_kernel(chi: &[i64]) -> Result<Vec<Vec<i64>>> {
    let n = chi.len();
    if chi.iter().all(|&c| c == 0) {
        return Err(Error::RankDeficient);
    }
    let mut row = chi.to_vec();
    // columns of u track the transformation
    let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    loop {
        let nz: Vec<usize> = (0..n).filter(|&i| row[i] != 0).collect();
        if nz.len() == 1 {
            let p = nz[0];
            row.swap(0, p);
            u.swap(0, p);
            break;
        }
        let p = *nz.iter().min_by_key(|&&i| row[i].abs()).unwrap();
        for &i in &nz {
            if i != p {
                let q = row[i] / row[p];
                row[i] -= q * row[p];
                let up = u[p].clone();
                for (x, y) in u[i].iter_mut().zip(&up) {
                    *x -= q * y;
                }
            }
        }
    }
    Ok(u[1..].iter().map(|c| normalise_sign(c.clone())).collect())
}

fn normalise_sign(mut v: Vec<i64>) -> Vec<i64> {
    if v.iter().find(|&&x| x != 0).map(|&x| x < 0).unwrap_or(false) {
        for x in &mut v {
            *x = -*x;
        }
    }
    v
}

/// Integer combinations of the toric maps whose flows fix every member of
/// the pencil `⟨D⁺, D⁻⟩`.
pub fn reduced_moment_maps(r: &ToricRelation, d: &DivisorSet) -> Result<Vec<Vec<i64>>> {
    let n = d.weights.first().map(|w| w.len()).unwrap_or(0);
    let mut chi = vec![0i64; n];
    for (l, w) in r.lambda.iter().zip(&d.weights) {
        for (c, x) in chi.iter_mut().zip(w) {
            *c += l * x;
        }
    }
    integer_kernel(&chi)
}

pub fn combine_maps(coeffs: &[i64], maps: &[MomentMap], name: &str) -> MomentMap {
    let parts: Vec<(f64, &MomentMap)> = coeffs.iter().zip(maps).map(|(&c, m)| (c as f64, m)).collect();
    MomentMap::combine(name, &parts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenRow {
    pub lambda: Vec<i64>,
    pub rho: Vec<i64>,
    pub total: i64,
    pub positive: i64,
    pub middle: bool,
    pub margin: i64,
}

/// Middle-case verdict for each relation, with `ρ_i = ind(D_i ∩ Σ)`.
pub fn screen_relations(d: &DivisorSet, relations: &[ToricRelation], section: &SectionCurve) -> Result<Vec<ScreenRow>> {
    let rho: Vec<i64> =
        d.components.iter().map(|c| intersection_index(section, c).map(|x| x as i64)).collect::<Result<_>>()?;
    relations
        .iter()
        .map(|r| {
            let MiddleCase { holds, total, positive, margin } = middle_case_check(&r.lambda, &rho)?;
            Ok(ScreenRow { lambda: r.lambda.clone(), rho: rho.clone(), total, positive, middle: holds, margin })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_simple_characters() {
        assert_eq!(integer_kernel(&[-1, -1]).unwrap(), vec![vec![1, -1]]);
        let k = integer_kernel(&[2, 3, 0]).unwrap();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert_eq!(2 * v[0] + 3 * v[1], 0);
        }
        assert_eq!(integer_kernel(&[0, 0]), Err(Error::RankDeficient));
    }

    #[test]
    fn kernel_basis_is_primitive() {
        // kernel of (4, 6) is spanned by (3, -2), not (6, -4)
        assert_eq!(integer_kernel(&[4, 6]).unwrap(), vec![vec![3, -2]]);
    }
}
