//! Exact accumulation of dyadic masses.
//!
//! Masses in this crate are sums of `f64` values scaled by powers of two and
//! integer cell counts. Those sums are representable as fixed-point integers,
//! so bookkeeping identities such as `alpha_k = sum_j alpha_k^j` can be checked
//! for exact equality instead of up to rounding.

use std::cmp::Ordering;

/// Fixed-point scale: the accumulator stores `value * 2^FRAC_BITS`.
const FRAC_BITS: i32 = 120;

/// Fixed-point accumulator for non-negative dyadic sums.
///
/// Any term that would lose bits (too small or too large for the fixed-point
/// window) marks the sum inexact; the floating-point shadow is still kept.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactSum {
    acc: i128,
    inexact: bool,
    shadow: f64,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        self.add_scaled(x, 1, 0);
    }

    /// Adds `x * count * 2^-shift`.
    pub fn add_scaled(&mut self, x: f64, count: u64, shift: u32) {
        self.shadow += x * count as f64 * (-(shift as f64)).exp2();
        if x == 0.0 || count == 0 {
            return;
        }
        if !x.is_finite() {
            self.inexact = true;
            return;
        }
        let (mantissa, exp) = decompose(x);
        let sign: i128 = if x < 0.0 { -1 } else { 1 };
        let Some(prod) = (mantissa as u128).checked_mul(count as u128) else {
            self.inexact = true;
            return;
        };
        let e = exp - shift as i32 + FRAC_BITS;
        let term = if e >= 0 {
            let bits = 128 - prod.leading_zeros() as i32;
            if bits + e > 126 {
                self.inexact = true;
                return;
            }
            (prod << e) as i128
        } else {
            let s = (-e) as u32;
            if s >= 128 || prod & ((1u128 << s) - 1) != 0 {
                self.inexact = true;
            }
            if s >= 128 {
                0
            } else {
                (prod >> s) as i128
            }
        };
        match self.acc.checked_add(sign * term) {
            Some(v) => self.acc = v,
            None => self.inexact = true,
        }
    }

    pub fn is_exact(&self) -> bool {
        !self.inexact
    }

    /// Nearest `f64` to the exact sum, or the floating shadow if bits were lost.
    pub fn value(&self) -> f64 {
        if self.inexact {
            self.shadow
        } else {
            self.acc as f64 * (-(FRAC_BITS as f64)).exp2()
        }
    }

    /// Exact comparison when both sums are exact.
    pub fn exact_cmp(&self, other: &ExactSum) -> Option<Ordering> {
        (self.is_exact() && other.is_exact()).then(|| self.acc.cmp(&other.acc))
    }

    pub fn exactly_equals(&self, other: &ExactSum) -> bool {
        self.exact_cmp(other) == Some(Ordering::Equal)
    }

    pub fn is_exactly_zero(&self) -> bool {
        self.is_exact() && self.acc == 0
    }
}

impl std::ops::AddAssign for ExactSum {
    fn add_assign(&mut self, rhs: ExactSum) {
        self.shadow += rhs.shadow;
        self.inexact |= rhs.inexact;
        match self.acc.checked_add(rhs.acc) {
            Some(v) => self.acc = v,
            None => self.inexact = true,
        }
    }
}

impl std::ops::SubAssign for ExactSum {
    fn sub_assign(&mut self, rhs: ExactSum) {
        self.shadow -= rhs.shadow;
        self.inexact |= rhs.inexact;
        match self.acc.checked_sub(rhs.acc) {
            Some(v) => self.acc = v,
            None => self.inexact = true,
        }
    }
}

/// Splits a finite non-zero `x` into `|x| = mantissa * 2^exp`.
fn decompose(x: f64) -> (u64, i32) {
    let bits = x.abs().to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if raw_exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), raw_exp - 1075)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_sums_are_exact() {
        let mut s = ExactSum::new();
        s.add_scaled(1.0, 3, 2);
        s.add_scaled(0.25, 1, 0);
        assert!(s.is_exact());
        assert_eq!(s.value(), 1.0);
    }

    #[test]
    fn cancellation_is_exact() {
        let mut a = ExactSum::new();
        a.add(0.1);
        a.add(0.2);
        let mut b = ExactSum::new();
        b.add(0.2);
        b.add(0.1);
        assert!(a.exactly_equals(&b));
        a -= b;
        assert!(a.is_exactly_zero());
    }

    #[test]
    fn tiny_terms_mark_inexact() {
        let mut s = ExactSum::new();
        s.add(f64::MIN_POSITIVE);
        assert!(!s.is_exact());
    }
}
