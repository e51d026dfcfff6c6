//! Lower bounds for `inf_mu sup_{j >= 1} |mu^(j)|` over probability measures
//! on `[eps, 1]`.
//!
//! Two routes are provided. The analytic one pairs `mu` with a triangle pulse
//! `phi` supported on `[0, eps]`: since `mu(phi) = 0`, Parseval gives
//! `1/2 <= (sum_{k >= 1} |phi^(k)|) sup_j |mu^(j)|`, and the sum is at most
//! `(4 + pi eps) / (pi eps)`. The numerical one solves the discretised
//! minimax problem as a matrix game and compares.
//!
//! ```
//! use fourier_lab::lemma::{infsup_lower_bound, pulse_sum_bound};
//!
//! let eps = 0.5;
//! let b = infsup_lower_bound(eps);
//! assert!(b >= eps / 5.0);
//! let p = pulse_sum_bound(eps, 400).unwrap();
//! assert!(p.numeric_sum <= p.bound);
//! ```

pub mod simplex;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fourier::{sinc, turn, SpectralMeasure};
use crate::measure::AtomicMeasure;
use simplex::{solve_game, Payoff};

use crate::{Error, Result};

/// Number of rotation angles used to linearise `|z| <= t`.
pub const DEFAULT_ROTATIONS: usize = 32;

/// `pi eps / (8 + 2 pi eps)`.
pub fn infsup_lower_bound(eps: f64) -> f64 {
    PI * eps / (8.0 + 2.0 * PI * eps)
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1], got {eps}")))
    }
}

/// Number of pulse coefficients summed by default: `ceil(10 / eps^2) * 10`.
pub fn default_pulse_terms(eps: f64) -> usize {
    (10.0 / (eps * eps)).ceil() as usize * 10
}

/// Fourier coefficient of the triangle pulse of width `eps` starting at 0:
/// `sinc^2(pi k eps / 2) e^{-pi i k eps}`.
pub fn triangle_pulse_transform(eps: f64, k: i64) -> Complex64 {
    let x = sinc(PI * k as f64 * eps / 2.0);
    turn(k as f64 * eps / 2.0) * (x * x)
}

/// `|phi^(k)|` for `k = 0..=K` together with the analytic bound on their sum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PulseProfile {
    pub epsilon: f64,
    pub coefficients: Vec<f64>,
    /// `(4 + pi eps) / (pi eps)`, a bound on `sum_{k >= 1} |phi^(k)|`.
    pub tail_bound: f64,
}

pub fn triangle_pulse_coefficients(eps: f64, terms: usize) -> Result<PulseProfile> {
    check_epsilon(eps)?;
    if terms < 1 {
        return Err(Error::InvalidArgument("need at least one pulse coefficient".into()));
    }
    let coefficients = (0..=terms)
        .map(|k| {
            let x = sinc(PI * k as f64 * eps / 2.0);
            x * x
        })
        .collect();
    Ok(PulseProfile { epsilon: eps, coefficients, tail_bound: (4.0 + PI * eps) / (PI * eps) })
}

/// `min(1, 4 / (k^2 pi^2 eps^2))`, the termwise bound on `|phi^(k)|`.
pub fn pulse_coefficient_bound(eps: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let t = k as f64 * PI * eps;
    (4.0 / (t * t)).min(1.0)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PulseSum {
    pub epsilon: f64,
    pub terms: usize,
    /// `sum_{k=1}^{K} sinc^2(k pi eps / 2)`.
    pub numeric_sum: f64,
    /// `(4 + pi eps) / (pi eps)`.
    pub bound: f64,
    /// Bound on the omitted terms, `4 / (pi^2 eps^2 K)`.
    pub tail: f64,
}

pub fn pulse_sum_bound(eps: f64, terms: usize) -> Result<PulseSum> {
    let profile = triangle_pulse_coefficients(eps, terms)?;
    // Small terms first.
    let numeric_sum = profile.coefficients[1..].iter().rev().sum();
    Ok(PulseSum { epsilon: eps, terms, numeric_sum, bound: profile.tail_bound, tail: pulse_tail(eps, terms) })
}

fn pulse_tail(eps: f64, terms: usize) -> f64 {
    4.0 / (PI * PI * eps * eps * terms as f64)
}

/// Lower bound on `sup_j |mu^(j)|` from pairing `mu` with the triangle pulse,
/// with the pairing identity checked numerically.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualityCertificate {
    pub epsilon: f64,
    /// `(1/2) / (sum_{k <= K} |phi^(k)| + tail)`.
    pub lower_bound: f64,
    pub paper_bound: f64,
    pub terms: usize,
    /// `|mu(1) + 2 Re sum_{k=1}^{K} phi^(k) conj(mu^(k))|`, which is zero for
    /// the full series.
    pub pairing_residual: f64,
    /// `2 sum_{k > K} |phi^(k)|` bound times the mass.
    pub residual_allowance: f64,
    pub residual_ok: bool,
}

pub fn duality_lower_bound(mu: &AtomicMeasure, eps: f64) -> Result<DualityCertificate> {
    duality_lower_bound_with_terms(mu, eps, default_pulse_terms(eps))
}

pub fn duality_lower_bound_with_terms(mu: &AtomicMeasure, eps: f64, terms: usize) -> Result<DualityCertificate> {
    check_epsilon(eps)?;
    for &(x, _) in mu.atoms() {
        if !(x >= eps && x <= 1.0) {
            return Err(Error::AtomOutsideSupport { position: x, lo: eps, hi: 1.0 });
        }
    }
    let mass = mu.total_mass();
    if (mass - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("expected a probability measure, mass is {mass}")));
    }
    let sum = pulse_sum_bound(eps, terms)?;
    let mut pairing = 0.0;
    for k in 1..=terms as i64 {
        pairing += (triangle_pulse_transform(eps, k) * mu.transform(k as f64).conj()).re;
    }
    let pairing_residual = (mass + 2.0 * pairing).abs();
    let residual_allowance = 2.0 * sum.tail * mass;
    Ok(DualityCertificate {
        epsilon: eps,
        lower_bound: 0.5 / (sum.numeric_sum + sum.tail),
        paper_bound: infsup_lower_bound(eps),
        terms,
        pairing_residual,
        residual_allowance,
        residual_ok: pairing_residual <= residual_allowance + 1e-12,
    })
}

/// How far `sup_{1 <= j <= J}` can fall below the bound for `sup_{j >= 1}`:
/// dropping the pulse terms `k > J` costs `4 / (pi eps J (4 + pi eps))`.
pub fn truncation_slack(eps: f64, j_max: usize) -> f64 {
    4.0 / (PI * eps * j_max as f64 * (4.0 + PI * eps))
}

/// `1 / cos(pi / R)`: `max_r Re(e^{i theta_r} z)` underestimates `|z|` by at
/// most this factor.
pub fn rotation_factor(rotations: usize) -> f64 {
    1.0 / (PI / rotations as f64).cos()
}

/// Atom positions `eps + (q + 1/2)(1 - eps) / Q`.
pub fn grid_points(eps: f64, grid_size: usize) -> Vec<f64> {
    (0..grid_size).map(|q| eps + (q as f64 + 0.5) * (1.0 - eps) / grid_size as f64).collect()
}

/// Payoff `cos(theta_r - 2 pi j x_q)` with rows `(j, r)` and columns `q`.
pub struct RotationPayoff {
    cos_jx: Vec<f64>,
    sin_jx: Vec<f64>,
    cos_r: Vec<f64>,
    sin_r: Vec<f64>,
    j_max: usize,
    rotations: usize,
    grid: usize,
}

impl RotationPayoff {
    pub fn new(points: &[f64], j_max: usize, rotations: usize) -> Self {
        let grid = points.len();
        let mut cos_jx = Vec::with_capacity(j_max * grid);
        let mut sin_jx = Vec::with_capacity(j_max * grid);
        for j in 1..=j_max {
            for &x in points {
                let z = turn(-(j as f64) * x);
                cos_jx.push(z.re);
                sin_jx.push(z.im);
            }
        }
        let angle = |r: usize| 2.0 * PI * r as f64 / rotations as f64;
        RotationPayoff {
            cos_jx,
            sin_jx,
            cos_r: (0..rotations).map(|r| angle(r).cos()).collect(),
            sin_r: (0..rotations).map(|r| angle(r).sin()).collect(),
            j_max,
            rotations,
            grid,
        }
    }
}

impl Payoff for RotationPayoff {
    fn rows(&self) -> usize {
        self.j_max * self.rotations
    }

    fn cols(&self) -> usize {
        self.grid
    }

    fn min_entry(&self) -> f64 {
        -1.0
    }

    fn row(&self, i: usize, out: &mut [f64]) {
        let (j, r) = (i / self.rotations, i % self.rotations);
        let (c, s) = (&self.cos_jx[j * self.grid..], &self.sin_jx[j * self.grid..]);
        for q in 0..self.grid {
            out[q] = self.cos_r[r] * c[q] + self.sin_r[r] * s[q];
        }
    }

    fn row_dots(&self, v: &[f64], out: &mut [f64]) {
        for j in 0..self.j_max {
            let range = j * self.grid..(j + 1) * self.grid;
            let a: f64 = self.cos_jx[range.clone()].iter().zip(v).map(|(x, y)| x * y).sum();
            let b: f64 = self.sin_jx[range].iter().zip(v).map(|(x, y)| x * y).sum();
            for r in 0..self.rotations {
                out[j * self.rotations + r] = self.cos_r[r] * a + self.sin_r[r] * b;
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimaxResult {
    pub epsilon: f64,
    pub grid_size: usize,
    pub j_max: usize,
    pub rotations: usize,
    /// `max_{j, r} Re(e^{i theta_r} mu^(j))` at the optimal grid measure.
    pub optimal_value: f64,
    /// Value guaranteed by the row player's strategy; `optimal_value` minus
    /// this is the solver's duality gap.
    pub dual_value: f64,
    /// `optimal_value / cos(pi / R)`.
    pub corrected_value: f64,
    /// `max_{1 <= j <= J} |mu^(j)|` of the optimal measure, evaluated directly.
    pub true_sup: f64,
    pub j_star: u64,
    pub lower_bound: f64,
    pub truncation_slack: f64,
    pub solver_gap: f64,
    /// `truncation_slack + solver_gap`.
    pub slack: f64,
    pub optimal_measure: AtomicMeasure,
    pub iterations: usize,
}

impl MinimaxResult {
    /// `corrected_value + slack >= lower_bound`.
    pub fn consistent(&self) -> bool {
        self.corrected_value + self.slack >= self.lower_bound
    }
}

pub fn minimize_sup_transform(eps: f64, grid_size: usize, j_max: usize) -> Result<MinimaxResult> {
    minimize_sup_transform_with(eps, grid_size, j_max, DEFAULT_ROTATIONS)
}

/// Minimises `max_{1 <= j <= J} |sum_q w_q e^{-2 pi i j x_q}|` over
/// probability vectors `w` on the grid, with the modulus replaced by the
/// maximum over `R` rotated real parts.
pub fn minimize_sup_transform_with(
    eps: f64,
    grid_size: usize,
    j_max: usize,
    rotations: usize,
) -> Result<MinimaxResult> {
    check_epsilon(eps)?;
    if grid_size < 1 || j_max < 1 || rotations < 3 {
        return Err(Error::InvalidArgument(format!(
            "need grid size >= 1, j_max >= 1 and at least 3 rotations (got {grid_size}, {j_max}, {rotations})"
        )));
    }
    let points = grid_points(eps, grid_size);
    let payoff = RotationPayoff::new(&points, j_max, rotations);
    let sol = solve_game(&payoff).map_err(|e| Error::Solver(e.to_string()))?;
    let atoms: Vec<(f64, f64)> = points.iter().copied().zip(sol.column_strategy.iter().copied()).collect();
    let optimal_measure = AtomicMeasure::new(atoms, (eps, 1.0))?;
    let (j_star, true_sup) = crate::fourier::sup_abs_transform(&optimal_measure, 1, j_max as u64)?;
    let solver_gap = (sol.value_upper - sol.value_lower).max(0.0);
    let truncation = truncation_slack(eps, j_max);
    Ok(MinimaxResult {
        epsilon: eps,
        grid_size,
        j_max,
        rotations,
        optimal_value: sol.value_upper,
        dual_value: sol.value_lower,
        corrected_value: sol.value_upper * rotation_factor(rotations),
        true_sup,
        j_star,
        lower_bound: infsup_lower_bound(eps),
        truncation_slack: truncation,
        solver_gap,
        slack: truncation + solver_gap,
        optimal_measure,
        iterations: sol.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_dominates_eps_over_five() {
        for i in 1..=1000 {
            let eps = i as f64 * 1e-3;
            assert!(infsup_lower_bound(eps) >= eps / 5.0);
        }
    }

    #[test]
    fn pulse_coefficients_vanish_at_sinc_zeros() {
        let p = triangle_pulse_coefficients(1.0, 4).unwrap();
        assert_eq!(p.coefficients[0], 1.0);
        assert!(p.coefficients[2] < 1e-30);
        for (k, c) in p.coefficients.iter().enumerate() {
            assert!(*c <= pulse_coefficient_bound(1.0, k) + 1e-15);
        }
    }

    #[test]
    fn full_pulse_sum_matches_poisson() {
        // Poisson summation gives sum_{k >= 1} sinc^2(k pi eps / 2) = 1/eps - 1/2.
        for eps in [0.25, 0.5, 1.0] {
            let p = pulse_sum_bound(eps, 200_000).unwrap();
            assert!((p.numeric_sum - (1.0 / eps - 0.5)).abs() <= p.tail);
        }
    }

    #[test]
    fn unit_epsilon_collapses_to_a_point() {
        let r = minimize_sup_transform(1.0, 16, 8).unwrap();
        assert!((r.optimal_value - 1.0).abs() < 1e-12);
        assert!((r.true_sup - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duality_rejects_atoms_below_epsilon() {
        let mu = AtomicMeasure::on_unit_interval(vec![(0.1, 0.5), (0.9, 0.5)]).unwrap();
        assert!(duality_lower_bound(&mu, 0.25).is_err());
    }
}
