//! Adaptive Gauss-Kronrod quadrature, used as an independent reference for
//! closed forms elsewhere in the crate.

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 50;

/// One 15-point Kronrod rule with its embedded 7-point Gauss estimate.
fn kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, (k - g).abs() * h)
}

fn adapt(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: (f64, f64), tol: f64, depth: u32) -> Result<f64> {
    let (value, err) = whole;
    if err <= tol || (b - a).abs() < 1e-15 * (a.abs() + b.abs()) {
        return Ok(value);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::InvalidArgument(format!(
            "quadrature on [{a}, {b}] did not reach tolerance {tol:e} (error estimate {err:e})"
        )));
    }
    let m = 0.5 * (a + b);
    let left = kronrod(f, a, m);
    let right = kronrod(f, m, b);
    Ok(adapt(f, a, m, left, 0.5 * tol, depth + 1)? + adapt(f, m, b, right, 0.5 * tol, depth + 1)?)
}

/// `\int_a^b f` to absolute tolerance `tol` for smooth `f`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let whole = kronrod(&f, a, b);
    adapt(&f, a, b, whole, tol, 0)
}

/// `\int_a^b (t - a)^{-s} g(t) dt` for smooth `g` and `0 <= s < 1`. The
/// substitution `t = a + u^p`, `p = 1 / (1 - s)`, removes the singularity.
pub fn integrate_singular_left(g: impl Fn(f64) -> f64, s: f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("singular exponent must lie in [0, 1), got {s}")));
    }
    let p = 1.0 / (1.0 - s);
    let top = (b - a).powf(1.0 - s);
    integrate(|u| p * g(a + u.powf(p)), 0.0, top, tol)
}

/// Mean of `|x - y|^{-s}` over `x` in `[0, 1)` and `y` in `[d, d + 1)`, by
/// one-dimensional quadrature against the triangular density of `y - x`.
pub fn cell_pair_kernel(s: f64, d: u64, tol: f64) -> Result<f64> {
    let d = d as f64;
    if d == 0.0 {
        return Ok(2.0 * integrate_singular_left(|t| 1.0 - t, s, 0.0, 1.0, tol)?);
    }
    let right = integrate(|t| (d + 1.0 - t) * t.powf(-s), d, d + 1.0, tol)?;
    let left = if d == 1.0 {
        integrate_singular_left(|t| t, s, 0.0, 1.0, tol)?
    } else {
        integrate(|t| (t - d + 1.0) * t.powf(-s), d - 1.0, d, tol)?
    };
    Ok(left + right)
}

/// `\iint_{[0,1]^2} |x - y|^{-s} dx dy` by iterated adaptive quadrature, the
/// inner integral split at the diagonal.
pub fn unit_square_energy(s: f64, tol: f64) -> Result<f64> {
    let inner = |x: f64| -> f64 {
        let below = if x > 0.0 {
            integrate_singular_left(|_| 1.0, s, 0.0, x, 0.1 * tol).unwrap_or(f64::NAN)
        } else {
            0.0
        };
        let above = if x < 1.0 {
            integrate_singular_left(|_| 1.0, s, 0.0, 1.0 - x, 0.1 * tol).unwrap_or(f64::NAN)
        } else {
            0.0
        };
        below + above
    };
    // The inner integral behaves like x^{1-s} at both ends; x = u^2 from
    // each end smooths it.
    let half = 0.5f64.sqrt();
    let v = integrate(|u| 2.0 * u * inner(u * u), 0.0, half, 0.5 * tol)?
        + integrate(|u| 2.0 * u * inner(1.0 - u * u), 0.0, half, 0.5 * tol)?;
    if v.is_nan() {
        return Err(Error::InvalidArgument("inner quadrature failed".into()));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-14).unwrap();
        assert!((v - 0.0).abs() < 1e-13);
    }

    #[test]
    fn singular_power() {
        let v = integrate_singular_left(|_| 1.0, 0.5, 0.0, 1.0, 1e-14).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn square_energy_half() {
        let v = unit_square_energy(0.5, 1e-12).unwrap();
        assert!((v - 8.0 / 3.0).abs() < 1e-10, "{v}");
    }
}
