//! Winding numbers of closed complex-valued curves by unwrapped phase.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, TAU};

use crate::error::{Error, Result};

/// Result of unwrapping the phase of a closed curve `θ ↦ g(θ)`, `θ ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winding {
    /// Accumulated phase divided by 2π.
    pub raw: f64,
    pub min_modulus: f64,
    pub samples: usize,
}

impl Winding {
    pub fn degree(&self) -> i64 {
        self.raw.round() as i64
    }

    pub fn residual(&self) -> f64 {
        (self.raw - self.raw.round()).abs()
    }
}

pub const MAX_SAMPLES: usize = 1 << 16;

/// Samples start at 64 and double until every consecutive phase step is
/// below π/2. Fails with `VanishingPairing` when the curve gets closer than
/// `min_modulus` to the origin.
pub fn winding<F>(g: F, min_modulus: f64) -> Result<Winding>
where
    F: Fn(f64) -> Result<Complex64> + Sync + Send,
{
    let mut n = 64usize;
    let mut values: Vec<Complex64> = sample(&g, n)?;
    loop {
        let min_mod = values.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        if min_mod < min_modulus {
            return Err(Error::VanishingPairing(min_mod));
        }
        let mut total = 0.0;
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let a = values[i];
            let b = values[(i + 1) % n];
            let step = (b / a).arg();
            max_step = max_step.max(step.abs());
            total += step;
        }
        if max_step < FRAC_PI_2 {
            return Ok(Winding { raw: total / TAU, min_modulus: min_mod, samples: n });
        }
        if 2 * n > MAX_SAMPLES {
            return Err(Error::AliasLimit);
        }
        // reuse the even samples
        let odd = crate::par::try_map_range(n, |i| g(TAU * (2 * i + 1) as f64 / (2 * n) as f64))?;
        let mut merged = Vec::with_capacity(2 * n);
        for i in 0..n {
            merged.push(values[i]);
            merged.push(odd[i]);
        }
        values = merged;
        n *= 2;
    }
}

fn sample<F>(g: &F, n: usize) -> Result<Vec<Complex64>>
where
    F: Fn(f64) -> Result<Complex64> + Sync + Send,
{
    crate::par::try_map_range(n, |i| g(TAU * i as f64 / n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_powers_of_the_circle() {
        for k in -3i32..=3 {
            let w = winding(|t| Ok(Complex64::from_polar(1.0, t).powi(k) * 2.0), 1e-12).unwrap();
            assert_eq!(w.degree(), k as i64);
            assert!(w.residual() < 1e-12);
        }
    }

    #[test]
    fn refines_fast_phases() {
        let w = winding(|t| Ok(Complex64::from_polar(1.0, 40.0 * t)), 1e-12).unwrap();
        assert_eq!(w.degree(), 40);
        assert!(w.samples >= 128);
    }

    #[test]
    fn reports_vanishing() {
        let r = winding(|t| Ok(Complex64::new(t.cos() + 1.0, 0.0)), 1e-8);
        assert!(matches!(r, Err(Error::VanishingPairing(_))));
    }

    #[test]
    fn off_center_circle_has_zero_winding() {
        let w = winding(|t| Ok(Complex64::new(3.0, 0.0) + Complex64::from_polar(1.0, t)), 1e-12).unwrap();
        assert_eq!(w.degree(), 0);
    }
}
