//! Riesz `s`-energies `I_s(mu) = \iint |x - y|^{-s} dmu(x) dmu(y)`.
//!
//! For a dyadic measure the energy is a finite sum over pairs of uniform
//! blocks of block masses times the mean kernel between the two intervals.
//! Pairs are grouped by block level; large groups are handled by an FFT
//! histogram of position differences, so no sum runs over all 2^n cells.

mod correlate;
mod kernel;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use kernel::RieszKernel;

use crate::cylinder::CylinderSet;
use crate::fourier::extended_float;
use crate::measure::DyadicMeasure;
use crate::{Error, Result};

/// Block-pair counts up to this are summed pairwise.
const PAIR_LIMIT: u64 = 1 << 20;
const CHUNK: usize = 1 << 12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnergyResult {
    pub s: f64,
    /// `+inf` when `s >= 1`: a piecewise-constant density has divergent
    /// self-energy on every cell it charges.
    #[serde(with = "extended_float")]
    pub value: f64,
    /// Fraction of the energy coming from pairs of points in the same
    /// depth-`n` cell.
    pub diagonal_share: f64,
    pub divergent: bool,
}

/// Riesz `s`-energy of a dyadic measure, for `s > 0`.
pub fn riesz_energy(mu: &DyadicMeasure, s: f64) -> Result<EnergyResult> {
    if !(s > 0.0) {
        return Err(Error::NonPositiveExponent(s));
    }
    if mu.blocks().is_empty() {
        return Ok(EnergyResult { s, value: 0.0, diagonal_share: 0.0, divergent: false });
    }
    if s >= 1.0 {
        return Ok(EnergyResult { s, value: f64::INFINITY, diagonal_share: 1.0, divergent: true });
    }
    let kernel = RieszKernel::new(s);
    let mut by_level: BTreeMap<u32, Vec<(u64, f64)>> = BTreeMap::new();
    for b in mu.blocks() {
        by_level.entry(b.level).or_default().push((b.index, b.mass));
    }
    let levels: Vec<(u32, &Vec<(u64, f64)>)> = by_level.iter().map(|(l, v)| (*l, v)).collect();
    let mut total = 0.0;
    for (i, &(la, a)) in levels.iter().enumerate() {
        total += self_energy(&kernel, la, a)?;
        for &(lb, b) in &levels[i + 1..] {
            total += 2.0 * cross_energy(&kernel, la, a, lb, b)?;
        }
    }
    let n = mu.depth();
    let same_cell = kernel.same_cell(1.0) * (n as f64 * s).exp2();
    let diagonal: f64 = mu
        .blocks()
        .iter()
        .map(|b| b.mass * b.mass * (-((n - b.level) as f64)).exp2() * same_cell)
        .sum();
    Ok(EnergyResult { s, value: total, diagonal_share: diagonal / total, divergent: false })
}

/// Sum over ordered pairs of blocks at one level, including each block with
/// itself.
fn self_energy(kernel: &RieszKernel, level: u32, cells: &[(u64, f64)]) -> Result<f64> {
    let unit = (level as f64 * kernel.exponent()).exp2();
    let n = cells.len() as u64;
    let sum = if n * n <= PAIR_LIMIT {
        let diag: f64 = cells.iter().map(|c| c.1 * c.1).sum::<f64>() * kernel.cell_pair(0);
        let off: f64 = chunked_sum(cells.len(), |i| {
            let (p, m) = cells[i];
            cells[i + 1..].iter().map(|&(q, w)| w * kernel.cell_pair(q - p)).sum::<f64>() * m
        });
        diag + 2.0 * off
    } else {
        let corr = correlate::cross_correlate(cells, cells)?;
        let pairs: Vec<(i64, f64)> = corr.iter().collect();
        chunked_sum(pairs.len(), |i| {
            let (d, r) = pairs[i];
            r * kernel.cell_pair(d.unsigned_abs())
        })
    };
    Ok(sum * unit)
}

/// Sum over pairs (coarse block at `la`, fine block at `lb > la`).
fn cross_energy(kernel: &RieszKernel, la: u32, a: &[(u64, f64)], lb: u32, b: &[(u64, f64)]) -> Result<f64> {
    let unit = (lb as f64 * kernel.exponent()).exp2();
    let ratio = 1u64 << (lb - la);
    let alpha = ratio as f64;
    let scaled: Vec<(u64, f64)> = a.iter().map(|&(p, m)| (p * ratio, m)).collect();
    let sum = if (a.len() as u64) * (b.len() as u64) <= PAIR_LIMIT {
        chunked_sum(scaled.len(), |i| {
            let (x, m) = scaled[i];
            b.iter()
                .map(|&(y, w)| w * kernel.mean(alpha, 1.0, y as f64 - x as f64).expect("disjoint blocks"))
                .sum::<f64>()
                * m
        })
    } else {
        let corr = correlate::cross_correlate(&scaled, b)?;
        let pairs: Vec<(i64, f64)> = corr.iter().collect();
        chunked_sum(pairs.len(), |i| {
            let (d, r) = pairs[i];
            // Offsets where the blocks would overlap never occur; the
            // histogram there holds only rounding noise.
            kernel.mean(alpha, 1.0, d as f64).map_or(0.0, |k| r * k)
        })
    };
    Ok(sum * unit)
}

/// `sum_{i < len} f(i)` in fixed-size chunks, so the result does not depend
/// on the thread count.
fn chunked_sum(len: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    let partial: Vec<f64> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(len)).map(&f).sum())
        .collect();
    partial.iter().sum()
}

/// `|I|^{-s} mass^2 / N`: by Cauchy-Schwarz, the energy of a measure giving
/// `mass` to a union of `N` intervals of length `|I|` is at least this.
pub fn energy_cell_lower_bound(mass: f64, cell_count: u64, cell_length: f64, s: f64) -> Result<f64> {
    if cell_count == 0 {
        return Err(Error::InvalidArgument("cell count must be at least one".into()));
    }
    if !(cell_length > 0.0) {
        return Err(Error::InvalidArgument(format!("cell length must be positive, got {cell_length}")));
    }
    Ok(cell_length.powf(-s) * mass * mass / cell_count as f64)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DominationReport {
    #[serde(with = "extended_float")]
    pub energy: f64,
    /// `|I|^{-s} sum_p mu(I_p)^2` over the cells of the set.
    pub square_sum_bound: f64,
    /// `|I|^{-s} mu(E)^2 / N`.
    pub cell_bound: f64,
    pub holds: bool,
}

/// Checks `I_s(mu) >= |I|^{-s} sum_p mu(I_p)^2 >= |I|^{-s} mu(E)^2 / N` for a
/// set `E` made of `N` cells `I_p` at the set's depth.
pub fn verify_energy_dominates_bound(mu: &DyadicMeasure, set: &CylinderSet, s: f64) -> Result<DominationReport> {
    let energy = riesz_energy(mu, s)?.value;
    dominates_with_energy(mu, set, s, energy)
}

/// [`verify_energy_dominates_bound`] with `I_s(mu)` already computed.
pub fn dominates_with_energy(mu: &DyadicMeasure, set: &CylinderSet, s: f64, energy: f64) -> Result<DominationReport> {
    let d = set.depth();
    let h = (-(d as f64)).exp2();
    let restricted = mu.restrict(set)?;
    let mut fine: BTreeMap<u64, f64> = BTreeMap::new();
    let mut squares = 0.0;
    for b in restricted.blocks() {
        if b.level >= d {
            *fine.entry(b.index >> (b.level - d)).or_insert(0.0) += b.mass;
        } else {
            // Spread evenly over 2^{d - level} cells of the set.
            squares += b.mass * b.mass * (-((d - b.level) as f64)).exp2();
        }
    }
    squares += fine.values().map(|m| m * m).sum::<f64>();
    let square_sum_bound = h.powf(-s) * squares;
    let cell_bound = if set.is_empty() {
        0.0
    } else {
        energy_cell_lower_bound(mu.mass_of(set)?, set.cell_count(), h, s)?
    };
    // Relative slack for rounding in sums over up to 2^30 cells; the second
    // inequality is an equality for measures spread evenly over the set.
    let tol = 1e-9 * energy.abs();
    Ok(DominationReport {
        energy,
        square_sum_bound,
        cell_bound,
        holds: energy + tol >= square_sum_bound && square_sum_bound * (1.0 + 1e-9) >= cell_bound,
    })
}

/// Energy as a plain double sum over depth-`n` cells with the closed-form
/// cell-pair kernel. Quadratic in the number of charged cells; used as a
/// reference for [`riesz_energy`].
pub fn riesz_energy_by_cells(mu: &DyadicMeasure, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidArgument(format!("reference energy needs 0 < s < 1, got {s}")));
    }
    let kernel = RieszKernel::new(s);
    let cells: Vec<(u64, f64)> = mu.cells().collect();
    if cells.len() > 1 << 14 {
        return Err(Error::TooLarge(format!("{} cells for the pairwise reference", cells.len())));
    }
    let mut total = 0.0;
    for &(p, m) in &cells {
        for &(q, w) in &cells {
            total += m * w * kernel.cell_pair(p.abs_diff(q));
        }
    }
    Ok(total * (mu.depth() as f64 * s).exp2())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lebesgue_closed_form() {
        let e = riesz_energy(&DyadicMeasure::lebesgue(8).unwrap(), 0.5).unwrap();
        assert!((e.value - 8.0 / 3.0).abs() < 1e-12);
        let by_cells = riesz_energy_by_cells(&DyadicMeasure::lebesgue(8).unwrap(), 0.5).unwrap();
        assert!((by_cells - 8.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_positive_exponent() {
        let m = DyadicMeasure::lebesgue(2).unwrap();
        assert!(riesz_energy(&m, 0.0).is_err());
        assert!(riesz_energy(&m, -1.0).is_err());
        assert!(riesz_energy(&m, f64::NAN).is_err());
        assert!(riesz_energy(&m, 1.2).unwrap().value.is_infinite());
    }

    #[test]
    fn structured_sum_matches_cells() {
        let m = DyadicMeasure::from_cells(7, [(0, 0.2), (1, 0.2), (5, 0.1), (64, 0.3), (100, 0.05)])
            .unwrap()
            .add(&DyadicMeasure::from_blocks(7, vec![crate::measure::Block { level: 2, index: 3, mass: 0.4 }]).unwrap());
        for s in [0.1, 0.5, 0.9] {
            let a = riesz_energy(&m, s).unwrap().value;
            let b = riesz_energy_by_cells(&m, s).unwrap();
            assert!((a - b).abs() < 1e-10 * b, "s={s}: {a} vs {b}");
        }
    }

    #[test]
    fn cell_bound_example() {
        let b = energy_cell_lower_bound(0.5, 4, 0.125, 0.5).unwrap();
        assert!((b - 0.125f64.powf(-0.5) * 0.25 / 4.0).abs() < 1e-15);
        assert!(energy_cell_lower_bound(0.5, 0, 0.125, 0.5).is_err());
    }
}
