//! Fourier transforms `mu^(xi) = \int e^{-2 pi i xi x} dmu(x)` and empirical
//! decay rates.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::measure::{AtomicMeasure, Block, DyadicMeasure};
use crate::{Error, Result};

/// Sups below this are treated as numerical zero when fitting decay.
pub const NOISE_FLOOR: f64 = 1e-13;

/// Level sums with at most this many terms are evaluated directly.
const DIRECT_TERMS: u64 = 1 << 18;

/// `sin(x) / x`, with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `e^{-2 pi i t}`, reducing `t` modulo one first so that large exact
/// arguments keep full precision.
pub fn turn(t: f64) -> Complex64 {
    let f = t - t.floor();
    let a = -2.0 * PI * f;
    Complex64::new(a.cos(), a.sin())
}

/// Frequencies `j` or `j + 1/2` for `j = 0, 1, 2, ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrequencyGrid {
    Integer,
    HalfInteger,
}

impl FrequencyGrid {
    pub fn frequency(self, j: u64) -> f64 {
        match self {
            FrequencyGrid::Integer => j as f64,
            FrequencyGrid::HalfInteger => j as f64 + 0.5,
        }
    }
}

/// A finite measure whose Fourier transform can be evaluated.
pub trait SpectralMeasure {
    fn total_mass(&self) -> f64;

    fn transform(&self, xi: f64) -> Complex64;

    /// Transform at `grid.frequency(j)` for `j = 0..=j_max`.
    fn transform_grid(&self, j_max: u64, grid: FrequencyGrid) -> Vec<Complex64> {
        (0..=j_max).map(|j| self.transform(grid.frequency(j))).collect()
    }
}

pub fn fourier_transform<M: SpectralMeasure + ?Sized>(mu: &M, xi: f64) -> Complex64 {
    mu.transform(xi)
}

impl SpectralMeasure for DyadicMeasure {
    fn total_mass(&self) -> f64 {
        DyadicMeasure::total_mass(self)
    }

    /// Exact for the piecewise-constant density: a block of mass `m` on
    /// `[a, a + h)` contributes `m e^{-2 pi i xi (a + h/2)} sinc(pi xi h)`.
    fn transform(&self, xi: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for b in self.blocks() {
            let centre = xi * (2 * b.index + 1) as f64 * (-((b.level + 1) as f64)).exp2();
            acc += turn(centre) * (b.mass * sinc(PI * xi * b.length()));
        }
        acc
    }

    fn transform_grid(&self, j_max: u64, grid: FrequencyGrid) -> Vec<Complex64> {
        match grid {
            FrequencyGrid::Integer => block_transform(self.blocks(), j_max),
            FrequencyGrid::HalfInteger => {
                // mu^(j + 1/2) = nu^(2j + 1) with nu the image of mu under x -> x/2.
                let squeezed: Vec<Block> =
                    self.blocks().iter().map(|b| Block { level: b.level + 1, ..*b }).collect();
                let all = block_transform(&squeezed, 2 * j_max + 1);
                all.into_iter().skip(1).step_by(2).collect()
            }
        }
    }
}

impl SpectralMeasure for AtomicMeasure {
    fn total_mass(&self) -> f64 {
        AtomicMeasure::total_mass(self)
    }

    fn transform(&self, xi: f64) -> Complex64 {
        self.atoms().iter().map(|&(x, m)| turn(xi * x) * m).sum()
    }
}

/// Transform of a dyadic measure at `j = 0..=j_max`, with a flag set when
/// `j_max` exceeds the number of cells (the cell sums are then periodic and
/// only the `sinc` envelope distinguishes aliased frequencies).
#[derive(Clone, Debug)]
pub struct BatchTransform {
    pub values: Vec<Complex64>,
    pub aliased: bool,
}

pub fn batch_integer_transform(mu: &DyadicMeasure, j_max: u64) -> BatchTransform {
    BatchTransform {
        values: block_transform(mu.blocks(), j_max),
        aliased: j_max > 1u64 << mu.depth(),
    }
}

/// Integer-frequency transform of uniform blocks, grouped by level.
///
/// For the blocks at level `L`, `S(j) = sum_p m_p e^{-2 pi i j p / 2^L}` is a
/// DFT of the block masses; it is evaluated by FFT (decimated by index residue
/// when `2^L` exceeds the frequency range) or directly when small. Each level
/// is then multiplied by the block envelope `e^{-pi i j 2^-L} sinc(pi j 2^-L)`.
fn block_transform(blocks: &[Block], j_max: u64) -> Vec<Complex64> {
    let n = (j_max + 1) as usize;
    let mut by_level: BTreeMap<u32, Vec<(u64, f64)>> = BTreeMap::new();
    for b in blocks {
        by_level.entry(b.level).or_default().push((b.index, b.mass));
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (&level, cells) in &by_level {
        let sums = level_sums(level, cells, j_max, &mut planner);
        let h = (-(level as f64)).exp2();
        for (j, (o, s)) in out.iter_mut().zip(sums).enumerate() {
            let xi = j as f64;
            *o += s * turn(xi * h * 0.5) * sinc(PI * xi * h);
        }
    }
    out
}

/// `e^{-2 pi i k / 2^level}` for an integer `k`, reduced exactly.
fn root_of_unity(k: u128, level: u32) -> Complex64 {
    let mask = (1u128 << level) - 1;
    turn((k & mask) as f64 * (-(level as f64)).exp2())
}

fn level_sums(level: u32, cells: &[(u64, f64)], j_max: u64, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let n = (j_max + 1) as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if level == 0 {
        let total: f64 = cells.iter().map(|c| c.1).sum();
        out.fill(Complex64::new(total, 0.0));
        return out;
    }
    if (cells.len() as u64).saturating_mul(j_max + 1) <= DIRECT_TERMS {
        for (j, o) in out.iter_mut().enumerate() {
            for &(p, m) in cells {
                *o += root_of_unity(j as u128 * p as u128, level) * m;
            }
        }
        return out;
    }
    let size = (1u64 << level).min((j_max + 1).next_power_of_two());
    let stride = (1u64 << level) / size;
    let mut by_residue: BTreeMap<u64, Vec<(u64, f64)>> = BTreeMap::new();
    for &(p, m) in cells {
        by_residue.entry(p % stride).or_default().push((p / stride, m));
    }
    let fft = planner.plan_fft_forward(size as usize);
    let mut buf = vec![Complex64::new(0.0, 0.0); size as usize];
    for (r, column) in by_residue {
        buf.fill(Complex64::new(0.0, 0.0));
        for (q, m) in column {
            buf[q as usize] += m;
        }
        fft.process(&mut buf);
        for (j, o) in out.iter_mut().enumerate() {
            let v = buf[j % size as usize];
            *o += if r == 0 { v } else { v * root_of_unity(j as u128 * r as u128, level) };
        }
    }
    out
}

/// Largest `|mu^(j)|` over integers `j_lo <= j <= j_hi`, with the smallest
/// maximising `j`.
pub fn sup_abs_transform<M: SpectralMeasure + ?Sized>(mu: &M, j_lo: u64, j_hi: u64) -> Result<(u64, f64)> {
    if j_lo < 1 || j_lo > j_hi {
        return Err(Error::InvalidArgument(format!("frequency window [{j_lo}, {j_hi}] is empty or contains 0")));
    }
    let values = mu.transform_grid(j_hi, FrequencyGrid::Integer);
    Ok(argmax_abs(&values, j_lo, j_hi))
}

fn argmax_abs(values: &[Complex64], lo: u64, hi: u64) -> (u64, f64) {
    let mut best = (lo, -1.0);
    for j in lo..=hi {
        let a = values[j as usize].norm();
        if a > best.1 {
            best = (j, a);
        }
    }
    best
}

/// Sup of `|mu^|` over one dyadic frequency band `[band_lo, band_hi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayWindow {
    pub band_lo: u64,
    pub band_hi: u64,
    pub sup_abs: f64,
    pub j_star: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayReport {
    pub grid: FrequencyGrid,
    pub j_max: u64,
    pub windows: Vec<DecayWindow>,
    /// Least-squares decay exponent `beta >= 0` of the band sups, or `+inf`
    /// when fewer than two bands rise above the noise floor.
    #[serde(with = "extended_float")]
    pub fitted_exponent: f64,
    /// `min(1, 2 beta)`.
    pub fourier_dim_estimate: f64,
    pub bands_fitted: usize,
    pub aliased: bool,
}

/// Fits `sup_{band} |mu^| ~ C |xi|^{-beta}` over dyadic bands
/// `[2^t, 2^{t+1})` with `2^{t+1} - 1 <= j_max`. With `band_count` set only the
/// highest that many bands are used.
pub fn estimate_decay<M: SpectralMeasure + ?Sized>(
    mu: &M,
    j_max: u64,
    band_count: Option<u32>,
    grid: FrequencyGrid,
) -> Result<DecayReport> {
    let available = 63 - (j_max + 1).leading_zeros();
    let bands = band_count.unwrap_or(available);
    if bands < 2 || bands > available {
        return Err(Error::InvalidArgument(format!(
            "need 2..={available} frequency bands below j_max = {j_max}, asked for {bands}"
        )));
    }
    let values = mu.transform_grid(j_max, grid);
    let mut windows = Vec::with_capacity(bands as usize);
    for t in (available - bands)..available {
        let (lo, hi) = (1u64 << t, 1u64 << (t + 1));
        let (j_star, sup_abs) = argmax_abs(&values, lo, hi - 1);
        windows.push(DecayWindow { band_lo: lo, band_hi: hi, sup_abs, j_star });
    }
    let points: Vec<(f64, f64)> = windows
        .iter()
        .filter(|w| w.sup_abs >= NOISE_FLOOR)
        .map(|w| (((w.band_lo as f64) * (w.band_hi as f64)).sqrt().ln(), w.sup_abs.ln()))
        .collect();
    let fitted_exponent = if points.len() < 2 { f64::INFINITY } else { (-slope(&points)).max(0.0) };
    Ok(DecayReport {
        grid,
        j_max,
        windows,
        fitted_exponent,
        fourier_dim_estimate: (2.0 * fitted_exponent).min(1.0),
        bands_fitted: points.len(),
        aliased: false,
    })
}

/// Decay report for a dyadic measure, flagging frequencies past the cell
/// resolution.
pub fn estimate_decay_dyadic(
    mu: &DyadicMeasure,
    j_max: u64,
    band_count: Option<u32>,
    grid: FrequencyGrid,
) -> Result<DecayReport> {
    let mut report = estimate_decay(mu, j_max, band_count, grid)?;
    report.aliased = j_max > 1u64 << mu.depth();
    Ok(report)
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Serialises non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`.
pub mod extended_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        use serde::de::Error;
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(D::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylinder::CylinderSet;

    #[test]
    fn lebesgue_vanishes_at_nonzero_integers() {
        let m = DyadicMeasure::lebesgue(4).unwrap();
        assert!((m.transform(0.0).re - 1.0).abs() < 1e-15);
        for j in 1..20 {
            assert!(m.transform(j as f64).norm() < 1e-15);
        }
        assert!((m.transform(0.5).norm() - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn batch_matches_direct_on_mixed_levels() {
        let set = CylinderSet::from_indices(6, [0, 1, 2, 3, 9, 17, 40, 41, 63]).unwrap();
        let m = DyadicMeasure::lebesgue_on(&set).add(&DyadicMeasure::from_cells(6, [(9, 0.3), (50, 0.2)]).unwrap());
        for grid in [FrequencyGrid::Integer, FrequencyGrid::HalfInteger] {
            let batch = m.transform_grid(300, grid);
            for (j, v) in batch.iter().enumerate() {
                let d = m.transform(grid.frequency(j as u64));
                assert!((v - d).norm() < 1e-12, "{grid:?} j={j}: {v} vs {d}");
            }
        }
    }

    #[test]
    fn fft_path_matches_direct() {
        // Enough cells at a deep level to force the decimated FFT path.
        let cells: Vec<(u64, f64)> = (0..4096u64).map(|p| (p * 37 % (1 << 16), 1.0 + (p % 7) as f64)).collect();
        let mut cells = cells;
        cells.sort_by_key(|c| c.0);
        cells.dedup_by_key(|c| c.0);
        let m = DyadicMeasure::from_cells(16, cells).unwrap();
        let batch = batch_integer_transform(&m, 200);
        for j in [0u64, 1, 2, 77, 128, 200] {
            let d = m.transform(j as f64);
            assert!((batch.values[j as usize] - d).norm() < 1e-9 * m.total_mass());
        }
    }

    #[test]
    fn single_atom_has_no_decay() {
        let d = AtomicMeasure::dirac(0.3).unwrap();
        let r = estimate_decay(&d, 1023, None, FrequencyGrid::Integer).unwrap();
        assert!(r.fitted_exponent.abs() < 1e-12);
        assert_eq!(r.fourier_dim_estimate, 0.0);
    }

    #[test]
    fn zero_sups_give_infinite_sentinel() {
        let m = DyadicMeasure::lebesgue(8).unwrap();
        let r = estimate_decay(&m, 255, None, FrequencyGrid::Integer).unwrap();
        assert!(r.fitted_exponent.is_infinite());
        assert_eq!(r.fourier_dim_estimate, 1.0);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"fitted_exponent\":\"inf\""));
    }
}
