//! Symplectic area of parametrised 2-chains by tensor Gauss-Legendre
//! quadrature with global dyadic refinement.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{groups_of, omega_raw, AmbientSpace};
use crate::par;

/// Point and its two partial derivatives, in homogeneous coordinates.
pub type Jet = (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>);

type PointFn = dyn Fn(f64, f64) -> Vec<Complex64> + Send + Sync;
type JetFn = dyn Fn(f64, f64) -> Jet + Send + Sync;

const GL_NODES: [f64; 7] = [
    -0.9491079123427585,
    -0.7415311855993945,
    -0.4058451513773972,
    0.0,
    0.4058451513773972,
    0.7415311855993945,
    0.9491079123427585,
];
const GL_WEIGHTS: [f64; 7] = [
    0.1294849661688697,
    0.2797053914892766,
    0.3818300505051189,
    0.4179591836734694,
    0.3818300505051189,
    0.2797053914892766,
    0.1294849661688697,
];

/// A smooth map `[0,1]² → M`. The orientation is `(∂u, ∂v)`.
#[derive(Clone)]
pub struct Chain {
    pub dims: Vec<usize>,
    point: Arc<PointFn>,
    jet: Option<Arc<JetFn>>,
}

impl std::fmt::Debug for Chain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Chain").field("dims", &self.dims).field("analytic", &self.jet.is_some()).finish()
    }
}

impl Chain {
    /// Chain with derivatives from Richardson-extrapolated central differences.
    pub fn from_fn<F>(dims: &[usize], f: F) -> Chain
    where
        F: Fn(f64, f64) -> Vec<Complex64> + Send + Sync + 'static,
    {
        Chain { dims: dims.to_vec(), point: Arc::new(f), jet: None }
    }

    pub fn from_jet<F>(dims: &[usize], f: F) -> Chain
    where
        F: Fn(f64, f64) -> Jet + Send + Sync + 'static,
    {
        let j: Arc<JetFn> = Arc::new(f);
        let jj = j.clone();
        Chain { dims: dims.to_vec(), point: Arc::new(move |u, v| jj(u, v).0), jet: Some(j) }
    }

    /// Composition of a holomorphic curve `phi(w) = (point, dpoint/dw)` with
    /// a planar parametrisation `w(u,v) = (w, ∂u w, ∂v w)`.
    pub fn holomorphic<W, P>(dims: &[usize], w: W, phi: P) -> Chain
    where
        W: Fn(f64, f64) -> (Complex64, Complex64, Complex64) + Send + Sync + 'static,
        P: Fn(Complex64) -> (Vec<Complex64>, Vec<Complex64>) + Send + Sync + 'static,
    {
        Chain::from_jet(dims, move |u, v| {
            let (w0, wu, wv) = w(u, v);
            let (z, dz) = phi(w0);
            let du = dz.iter().map(|d| d * wu).collect();
            let dv = dz.iter().map(|d| d * wv).collect();
            (z, du, dv)
        })
    }

    /// The disc `|w| ≤ r` in polar form, `w = r u e^{2πiv}`.
    pub fn polar_disc<P>(dims: &[usize], r: f64, phi: P) -> Chain
    where
        P: Fn(Complex64) -> (Vec<Complex64>, Vec<Complex64>) + Send + Sync + 'static,
    {
        let tau = std::f64::consts::TAU;
        Chain::holomorphic(
            dims,
            move |u, v| {
                let e = Complex64::from_polar(1.0, tau * v);
                (e * (r * u), e * r, e * Complex64::new(0.0, tau * r * u))
            },
            phi,
        )
    }

    pub fn point(&self, u: f64, v: f64) -> Vec<Complex64> {
        (self.point)(u, v)
    }

    pub fn jet(&self, u: f64, v: f64) -> Jet {
        if let Some(j) = &self.jet {
            return j(u, v);
        }
        let z = self.point(u, v);
        let d = |du: f64, dv: f64| -> Vec<Complex64> {
            let h = 1e-4;
            let c = |s: f64| -> Vec<Complex64> {
                let a = self.point(u + s * du, v + s * dv);
                let b = self.point(u - s * du, v - s * dv);
                a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * s)).collect()
            };
            let d1 = c(h);
            let d2 = c(h / 2.0);
            d1.iter().zip(&d2).map(|(a, b)| (4.0 * b - a) / 3.0).collect()
        };
        (z, d(1.0, 0.0), d(0.0, 1.0))
    }

    /// Pulled-back area density at `(u, v)`.
    pub fn density(&self, u: f64, v: f64) -> f64 {
        let (z, a, b) = self.jet(u, v);
        omega_raw(&z, &a, &b, &groups_of(&self.dims))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    pub tol: f64,
    pub min_level: u32,
    pub max_level: u32,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { tol: 1e-6, min_level: 1, max_level: 12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaResult {
    pub value: f64,
    /// Cells per axis are `2^level`.
    pub level: u32,
    /// Difference to the previous level.
    pub change: f64,
}

/// Area with the composite 7-point rule on a `2^level` square grid. Rows are
/// evaluated in parallel and summed in a fixed order.
pub fn area_at_level(chain: &Chain, level: u32) -> f64 {
    let n = 1usize << level;
    let h = 1.0 / n as f64;
    let rows = par::map_range(n, |i| {
        let mut s = 0.0;
        for j in 0..n {
            for (a, wa) in GL_NODES.iter().zip(&GL_WEIGHTS) {
                let u = h * (i as f64 + 0.5 * (a + 1.0));
                for (b, wb) in GL_NODES.iter().zip(&GL_WEIGHTS) {
                    let v = h * (j as f64 + 0.5 * (b + 1.0));
                    s += wa * wb * chain.density(u, v);
                }
            }
        }
        s
    });
    rows.iter().sum::<f64>() * h * h / 4.0
}

pub fn chain_area_with(m: &AmbientSpace, chain: &Chain, opts: QuadratureOptions) -> Result<AreaResult> {
    if chain.dims != m.factor_dims {
        return Err(Error::ShapeMismatch(format!("chain does not map into {}", m.name)));
    }
    let mut prev = area_at_level(chain, 0);
    let mut change = f64::INFINITY;
    for level in 1..=opts.max_level {
        let cur = area_at_level(chain, level);
        change = (cur - prev).abs();
        if !cur.is_finite() {
            return Err(Error::NonConvergent { levels: level as usize, change: f64::INFINITY });
        }
        if level >= opts.min_level && change < opts.tol {
            return Ok(AreaResult { value: cur, level, change });
        }
        prev = cur;
    }
    Err(Error::NonConvergent { levels: opts.max_level as usize, change })
}

/// `∫ ω` over the chain, refined until two successive levels agree to `tol`.
pub fn chain_area(m: &AmbientSpace, chain: &Chain, tol: f64) -> Result<AreaResult> {
    chain_area_with(m, chain, QuadratureOptions { tol, ..Default::default() })
}
