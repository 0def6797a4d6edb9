//! Lagrangian tori swept by fiber tori along a loop on a section, and their
//! Lagrangian residual.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{omega_raw, AmbientSpace, ProductPoint};
use crate::model::{LoopSpec, SectionCurve};
use crate::symplectic::{flow_steps, MomentMap};

/// Circle generators of the fiber torus. Each must have period one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberAction {
    pub generators: Vec<MomentMap>,
    /// Integrate the Hamiltonian flows instead of applying the exact linear action.
    pub numeric: bool,
    pub steps_per_unit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusConstruction {
    pub section: String,
    pub loop_spec: LoopSpec,
    pub levels: Vec<f64>,
    pub shape: Vec<usize>,
    pub numeric_flows: bool,
    /// Distance between the start point and its image after flowing each
    /// generator for unit time.
    pub first_return: Vec<f64>,
}

/// Samples of a map `T^n → M`; axis 0 follows the loop, the others the
/// fiber circles. Row-major, last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusSample {
    pub points: Vec<ProductPoint>,
    pub construction: TorusConstruction,
}

impl TorusSample {
    pub fn shape(&self) -> &[usize] {
        &self.construction.shape
    }

    pub fn index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(self.shape()).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn at(&self, idx: &[usize]) -> &ProductPoint {
        &self.points[self.index(idx)]
    }
}

fn fiber_points(
    m: &AmbientSpace,
    action: &FiberAction,
    base: &ProductPoint,
    shape: &[usize],
) -> Result<Vec<ProductPoint>> {
    let mut pts = vec![base.clone()];
    for (g, &n) in action.generators.iter().zip(shape) {
        let mut next = Vec::with_capacity(pts.len() * n);
        for p in &pts {
            let mut cur = p.clone();
            for j in 0..n {
                if j > 0 {
                    cur = if action.numeric {
                        flow_steps(m, g, &cur, 1.0 / n as f64, (action.steps_per_unit / n).max(1))?
                    } else {
                        g.circle_action(p, j as f64 / n as f64)
                    };
                }
                next.push(cur.clone());
            }
        }
        pts = next;
    }
    Ok(pts)
}

/// `T(γ, 0)`: for each loop sample the orbit of the section point under the
/// fiber torus.
pub fn build_torus(
    m: &AmbientSpace,
    section: &SectionCurve,
    action: &FiberAction,
    lp: &LoopSpec,
    levels: &[f64],
    shape: &[usize],
) -> Result<TorusSample> {
    if levels.iter().any(|&c| c != 0.0) {
        return Err(Error::Invalid("only the zero level is supported".into()));
    }
    if shape.len() != action.generators.len() + 1 || shape.iter().any(|&n| n < 2) {
        return Err(Error::ShapeMismatch(format!(
            "grid shape {shape:?} for {} fiber circles",
            action.generators.len()
        )));
    }
    let rows = crate::par::try_map_range(shape[0], |i| {
        let (s, _) = lp.param(section, TAU * i as f64 / shape[0] as f64);
        let base = m.project(&section.eval(s))?;
        fiber_points(m, action, &base, &shape[1..])
    })?;
    let base = m.project(&section.eval(lp.param(section, 0.0).0))?;
    let first_return = action
        .generators
        .iter()
        .map(|g| -> Result<f64> {
            let q = if action.numeric {
                flow_steps(m, g, &base, 1.0, action.steps_per_unit)?
            } else {
                g.circle_action(&base, 1.0)
            };
            Ok(q.distance(&base))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TorusSample {
        points: rows.into_iter().flatten().collect(),
        construction: TorusConstruction {
            section: section.name.clone(),
            loop_spec: lp.clone(),
            levels: levels.to_vec(),
            shape: shape.to_vec(),
            numeric_flows: action.numeric,
            first_return,
        },
    })
}

/// Per factor, the coordinate whose smallest relative modulus over the grid
/// is largest.
fn reference_coords(m: &AmbientSpace, t: &TorusSample) -> Vec<usize> {
    m.groups()
        .iter()
        .map(|g| {
            g.clone()
                .max_by(|&a, &b| {
                    let worst =
                        |j: usize| t.points.iter().map(|p| rel_modulus(&p.flat(), g, j)).fold(f64::INFINITY, f64::min);
                    worst(a).total_cmp(&worst(b))
                })
                .unwrap()
        })
        .collect()
}

fn rel_modulus(z: &[Complex64], g: &std::ops::Range<usize>, j: usize) -> f64 {
    z[j].norm() / z[g.clone()].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Unit representative with the reference coordinate real and positive:
/// a smooth periodic lift of the grid.
fn phase_fixed(p: &ProductPoint, groups: &[std::ops::Range<usize>], refs: &[usize]) -> Vec<Complex64> {
    let mut z = p.flat();
    for (g, &r) in groups.iter().zip(refs) {
        let n = z[g.clone()].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let ph = z[r].conj() / z[r].norm();
        for x in &mut z[g.clone()] {
            *x *= ph / n;
        }
    }
    z
}

/// Spectral derivative along `axis` of every coordinate of the lifted grid.
fn spectral_derivative(lift: &[Vec<Complex64>], shape: &[usize], axis: usize) -> Vec<Vec<Complex64>> {
    let n = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    let nvars = lift[0].len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut out = vec![vec![Complex64::new(0.0, 0.0); nvars]; lift.len()];
    let total = lift.len();
    for start in 0..total {
        // visit each line once, from its first element
        if !(start / stride).is_multiple_of(n) {
            continue;
        }
        for v in 0..nvars {
            let mut buf: Vec<Complex64> = (0..n).map(|j| lift[start + j * stride][v]).collect();
            fwd.process(&mut buf);
            for (k, b) in buf.iter_mut().enumerate() {
                let freq = if 2 * k < n {
                    k as f64
                } else if 2 * k == n {
                    0.0
                } else {
                    k as f64 - n as f64
                };
                *b *= Complex64::new(0.0, TAU * freq / n as f64);
            }
            inv.process(&mut buf);
            for j in 0..n {
                out[start + j * stride][v] = buf[j];
            }
        }
    }
    out
}

/// Largest `|ω(∂_i T, ∂_j T)|` over the grid, with tangents from spectral
/// differentiation of a smooth periodic lift (unit-period parameters).
pub fn lagrangian_residual(m: &AmbientSpace, t: &TorusSample) -> Result<f64> {
    let shape = t.shape().to_vec();
    if shape.iter().any(|&n| n < 8) {
        return Err(Error::ShapeMismatch("lagrangian residual needs at least 8 samples per axis".into()));
    }
    let groups = m.groups();
    let refs = reference_coords(m, t);
    let lift: Vec<Vec<Complex64>> = crate::par::map_slice(&t.points, |p| phase_fixed(p, &groups, &refs));
    let derivs: Vec<Vec<Vec<Complex64>>> = (0..shape.len()).map(|a| spectral_derivative(&lift, &shape, a)).collect();
    let worst = crate::par::map_range(lift.len(), |idx| {
        let mut w: f64 = 0.0;
        for a in 0..shape.len() {
            for b in a + 1..shape.len() {
                w = w.max(omega_raw(&lift[idx], &derivs[a][idx], &derivs[b][idx], &groups).abs());
            }
        }
        w
    });
    Ok(worst.into_iter().fold(0.0, f64::max))
}
