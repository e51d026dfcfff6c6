//! Middle-thirds Cantor measure and its pre-fractal approximations.
//!
//! Both are evaluated through the product formula
//! `mu^(xi) = prod_i (1 + e^{-4 pi i xi 3^-i}) / 2`, so they serve as an
//! independent reference for the generic transform code.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::fourier::{sinc, turn, SpectralMeasure};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CantorMeasure {
    /// Normalised Lebesgue measure on the `2^depth` intervals of length
    /// `3^-depth` left after `depth` removal steps.
    Prefractal { depth: u32 },
    /// The self-similar limit measure.
    Limit,
}

impl CantorMeasure {
    pub fn prefractal(depth: u32) -> Self {
        CantorMeasure::Prefractal { depth }
    }
}

impl SpectralMeasure for CantorMeasure {
    fn total_mass(&self) -> f64 {
        1.0
    }

    fn transform(&self, xi: f64) -> Complex64 {
        match *self {
            CantorMeasure::Prefractal { depth } => {
                let mut acc = Complex64::new(1.0, 0.0);
                let mut scale = 1.0;
                for _ in 0..depth {
                    scale /= 3.0;
                    acc *= (Complex64::new(1.0, 0.0) + turn(2.0 * xi * scale)) * 0.5;
                }
                // Uniform mass on [0, 3^-depth].
                acc * turn(0.5 * xi * scale) * sinc(PI * xi * scale)
            }
            CantorMeasure::Limit => {
                // The phases telescope to e^{-pi i xi}; the moduli are cosines.
                let mut modulus = 1.0;
                let mut x = xi;
                loop {
                    x /= 3.0;
                    if x.abs() < 1e-10 {
                        break;
                    }
                    let f = x - x.floor();
                    modulus *= (2.0 * PI * f).cos();
                }
                turn(0.5 * xi) * modulus
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefractal_zero_is_uniform() {
        let c = CantorMeasure::prefractal(0);
        assert!((c.transform(0.5).norm() - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn limit_is_invariant_along_powers_of_three() {
        let c = CantorMeasure::Limit;
        let base = c.transform(1.0).norm();
        for k in 1..=15 {
            let v = c.transform(3f64.powi(k)).norm();
            assert!((v - base).abs() < 1e-12);
        }
    }

    #[test]
    fn prefractal_converges_to_limit() {
        let deep = CantorMeasure::prefractal(30);
        for xi in [0.3, 1.0, 7.5, 40.0] {
            let d = (deep.transform(xi) - CantorMeasure::Limit.transform(xi)).norm();
            assert!(d < 1e-12, "xi={xi}: {d}");
        }
    }
}
