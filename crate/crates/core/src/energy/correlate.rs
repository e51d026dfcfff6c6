//! Weighted difference histograms by FFT.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::{Error, Result};

/// Largest FFT length used for a correlation.
const MAX_FFT_LEN: u64 = 1 << 24;

/// `R(delta) = sum_{a, b : y_b - x_a = delta} m_a m_b` on the lattice
/// `delta = base + step * k`, `k = -k_neg..=k_pos`.
pub struct Correlation {
    pub base: i64,
    pub step: i64,
    pub k_neg: i64,
    pub values: Vec<f64>,
}

impl Correlation {
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.base + self.step * (i as i64 - self.k_neg), v))
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Cross-correlation of two sorted weighted point sets. Positions are
/// compressed by the gcd of all offsets before transforming.
pub fn cross_correlate(xs: &[(u64, f64)], ys: &[(u64, f64)]) -> Result<Correlation> {
    let (x0, y0) = (xs[0].0, ys[0].0);
    let mut g = 0;
    for &(x, _) in xs {
        g = gcd(g, x - x0);
    }
    for &(y, _) in ys {
        g = gcd(g, y - y0);
    }
    let g = g.max(1);
    let max_x = (xs[xs.len() - 1].0 - x0) / g;
    let max_y = (ys[ys.len() - 1].0 - y0) / g;
    let len = (max_x + max_y + 1).next_power_of_two();
    if len > MAX_FFT_LEN {
        return Err(Error::TooLarge(format!("correlation of length {len} (limit {MAX_FFT_LEN})")));
    }
    let n = len as usize;
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut a = vec![Complex64::new(0.0, 0.0); n];
    for &(x, m) in xs {
        a[((x - x0) / g) as usize].re += m;
    }
    fwd.process(&mut a);
    let same = std::ptr::eq(xs, ys);
    if same {
        for v in a.iter_mut() {
            *v = Complex64::new(v.norm_sqr(), 0.0);
        }
    } else {
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        for &(y, m) in ys {
            b[((y - y0) / g) as usize].re += m;
        }
        fwd.process(&mut b);
        for (u, v) in a.iter_mut().zip(&b) {
            *u = u.conj() * v;
        }
    }
    inv.process(&mut a);
    let scale = 1.0 / n as f64;
    let mut values = Vec::with_capacity((max_x + max_y + 1) as usize);
    for k in -(max_x as i64)..=(max_y as i64) {
        values.push(a[k.rem_euclid(n as i64) as usize].re * scale);
    }
    Ok(Correlation { base: y0 as i64 - x0 as i64, step: g as i64, k_neg: max_x as i64, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_brute_force() {
        let xs = vec![(4u64, 1.0), (10, 2.0), (22, 0.5)];
        let ys = vec![(0u64, 3.0), (6, 1.0)];
        let c = cross_correlate(&xs, &ys).unwrap();
        let mut brute = std::collections::BTreeMap::new();
        for &(x, m) in &xs {
            for &(y, w) in &ys {
                *brute.entry(y as i64 - x as i64).or_insert(0.0) += m * w;
            }
        }
        for (d, v) in c.iter() {
            let want = brute.get(&d).copied().unwrap_or(0.0);
            assert!((v - want).abs() < 1e-12, "delta {d}: {v} vs {want}");
        }
        assert_eq!(c.step, 6);
    }
}
