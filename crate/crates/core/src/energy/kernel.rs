//! Mean of `|x - y|^{-s}` over pairs of intervals.

/// Interval pairs whose centre distance exceeds this multiple of the mean
/// half-length use the moment series.
const FAR_RATIO: f64 = 0.25;
const SERIES_TERMS: usize = 40;

/// Riesz kernel `|x - y|^{-s}` for `0 < s < 1`.
#[derive(Clone, Copy, Debug)]
pub struct RieszKernel {
    s: f64,
    /// `(1 - s)(2 - s)`.
    denom: f64,
}

impl RieszKernel {
    pub fn new(s: f64) -> Self {
        assert!(s > 0.0 && s < 1.0, "kernel exponent must lie in (0, 1)");
        RieszKernel { s, denom: (1.0 - s) * (2.0 - s) }
    }

    pub fn exponent(&self) -> f64 {
        self.s
    }

    /// Second antiderivative `H(u) = u^{2-s} / ((1-s)(2-s))`.
    pub fn h(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else {
            u.powf(2.0 - self.s) / self.denom
        }
    }

    /// `H(x + w) - H(x)` without cancellation for `w << x`.
    fn h_increment(&self, x: f64, w: f64) -> f64 {
        if x <= 0.0 {
            return self.h(w);
        }
        x.powf(2.0 - self.s) * ((2.0 - self.s) * (w / x).ln_1p()).exp_m1() / self.denom
    }

    /// Mean kernel over a cell of length `h` paired with itself.
    pub fn same_cell(&self, h: f64) -> f64 {
        2.0 * self.h(h) / (h * h)
    }

    /// Mean of `|x - y|^{-s}` for `x` uniform on `[0, alpha)` and `y` uniform
    /// on `[offset, offset + beta)`. Returns `None` when the intervals overlap
    /// without coinciding.
    pub fn mean(&self, alpha: f64, beta: f64, offset: f64) -> Option<f64> {
        if offset == 0.0 && alpha == beta {
            return Some(self.same_cell(alpha));
        }
        // Put the second interval to the right of the first.
        let (a, b, d) = if offset >= alpha {
            (alpha, beta, offset)
        } else if offset + beta <= 0.0 {
            (beta, alpha, -offset)
        } else {
            return None;
        };
        let centre = d + 0.5 * (b - a);
        if (a + b) / (2.0 * centre) <= FAR_RATIO {
            return Some(self.far_series(a, b, centre));
        }
        // Step along the shorter interval and difference across the longer
        // one; the other grouping cancels badly when the lengths differ a lot.
        let (long, short, d) = if a >= b { (a, b, d) } else { (b, a, d + b - a) };
        let total = self.h_increment(d, short) - self.h_increment(d - long, short);
        Some(total / (long * short))
    }

    /// `centre^{-s} sum_k binom(-s, 2k) centre^{-2k} E[(V - U)^{2k}]` for `U`,
    /// `V` uniform and centred with lengths `a`, `b`.
    fn far_series(&self, a: f64, b: f64, centre: f64) -> f64 {
        let (ha, hb) = (0.5 * a / centre, 0.5 * b / centre);
        // Even moments of U / centre and V / centre.
        let mut mu = [0.0f64; 2 * SERIES_TERMS + 1];
        let mut mv = [0.0f64; 2 * SERIES_TERMS + 1];
        let (mut pa, mut pb) = (1.0, 1.0);
        for i in (0..=2 * SERIES_TERMS).step_by(2) {
            mu[i] = pa / (i as f64 + 1.0);
            mv[i] = pb / (i as f64 + 1.0);
            pa *= ha * ha;
            pb *= hb * hb;
        }
        let mut sum = 1.0;
        let mut coeff = 1.0; // binom(-s, n)
        for k in 1..=SERIES_TERMS {
            let n = 2 * k;
            coeff *= (-self.s - (n - 2) as f64) / (n - 1) as f64;
            coeff *= (-self.s - (n - 1) as f64) / n as f64;
            // E[(V - U)^n] = sum_i C(n, 2i) E[U^{2i}] E[V^{n - 2i}]
            let mut moment = 0.0;
            let mut c = 1.0;
            for i in 0..=k {
                moment += c * mu[2 * i] * mv[n - 2 * i];
                if i < k {
                    // C(n, 2i+2) from C(n, 2i)
                    let t = 2 * i;
                    c *= ((n - t) * (n - t - 1)) as f64 / ((t + 1) * (t + 2)) as f64;
                }
            }
            let term = coeff * moment;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        centre.powf(-self.s) * sum
    }

    /// Mean kernel between two depth-`n` cells `d` cells apart, in units of
    /// the cell length (multiply by `h^{-s}`).
    pub fn cell_pair(&self, d: u64) -> f64 {
        if d == 0 {
            self.same_cell(1.0)
        } else {
            self.mean(1.0, 1.0, d as f64).expect("disjoint cells")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn second_difference(k: &RieszKernel, d: f64) -> f64 {
        k.h(d + 1.0) - 2.0 * k.h(d) + k.h(d - 1.0)
    }

    #[test]
    fn same_cell_closed_form() {
        let k = RieszKernel::new(0.5);
        assert!((k.same_cell(1.0) - 8.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn near_and_far_branches_agree() {
        let k = RieszKernel::new(0.7);
        for d in 1..40u64 {
            let direct = second_difference(&k, d as f64);
            let v = k.cell_pair(d);
            assert!((v - direct).abs() < 1e-9 * direct, "d={d}: {v} vs {direct}");
        }
    }

    #[test]
    fn mixed_lengths_match_four_term_formula() {
        let k = RieszKernel::new(0.4);
        let (a, b) = (4.0, 1.0);
        for off in [4.0, 5.0, 9.0, 30.0, -1.0, -3.0, -20.0] {
            let four = if off >= a {
                k.h(off + b) - k.h(off + b - a) - k.h(off) + k.h(off - a)
            } else {
                // Second interval on the left: mirror.
                let d = -off;
                k.h(d + a) - k.h(d + a - b) - k.h(d) + k.h(d - b)
            };
            let v = k.mean(a, b, off).unwrap();
            assert!((v - four / (a * b)).abs() < 1e-10 * v, "off={off}");
        }
        assert!(k.mean(4.0, 1.0, 2.0).is_none());
    }
}
