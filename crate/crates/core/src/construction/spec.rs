use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::MAX_DEPTH;

/// Margin applied to the strict inequalities of the parameter window, so that
/// decimal inputs sitting on an endpoint are rejected despite rounding.
const WINDOW_MARGIN: f64 = 1e-12;

/// `b l` within this of an integer counts as that integer when taking the
/// ceiling.
const CEIL_SNAP: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SpecViolation {
    #[error("s = {s} must lie strictly between sqrt(3) - 1 and 1")]
    ExponentOutOfRange { s: f64 },
    #[error("b = {b} must lie strictly between (1 - s)/s = {lo} and s/2 = {hi}")]
    BlockRatioOutOfWindow { b: f64, lo: f64, hi: f64 },
    #[error("at least one stage is required")]
    NoStages,
    #[error("block offsets must be positive and strictly increasing (l_{k} = {value})")]
    NotIncreasing { k: usize, value: u32 },
    #[error("block {k} ends at digit {end}, so block {next} cannot start at digit {start}")]
    OverlappingBlocks { k: usize, end: u32, next: usize, start: u32 },
    #[error("depth {depth} is shallower than the last block end {needed}")]
    DepthTooShallow { depth: u32, needed: u32 },
    #[error("depth {depth} exceeds the supported maximum {max}")]
    DepthTooLarge { depth: u32, max: u32 },
}

/// Parameters `s`, `b`, `(l_k)`, `m_k = ceil(b l_k)` and a working depth.
/// Stage `k` (1-based) is the digit block `l_k + 1 ..= l_k + m_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DigitBlockSpec {
    s: f64,
    b: f64,
    l: Vec<u32>,
    m: Vec<u32>,
    depth: u32,
}

/// Spec file contents; `depth` defaults to the end of the last block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub s: f64,
    pub b: f64,
    pub l: Vec<u32>,
    #[serde(default)]
    pub depth: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub k: usize,
    pub l_k: u32,
    pub l_next: u32,
    pub ratio: f64,
}

/// `((1 - s)/s, s/2)`.
pub fn parameter_window(s: f64) -> (f64, f64) {
    ((1.0 - s) / s, s / 2.0)
}

fn ceil_snapped(x: f64) -> u32 {
    let r = x.round();
    if (x - r).abs() <= CEIL_SNAP {
        r as u32
    } else {
        x.ceil() as u32
    }
}

/// Checks the parameter window and block layout. The working depth is the
/// end of the last block.
pub fn validate_parameters(s: f64, b: f64, l: &[u32]) -> Result<DigitBlockSpec, SpecViolation> {
    let root = 3f64.sqrt() - 1.0;
    if !(s > root + WINDOW_MARGIN && s < 1.0 - WINDOW_MARGIN) {
        return Err(SpecViolation::ExponentOutOfRange { s });
    }
    let (lo, hi) = parameter_window(s);
    if !(b > lo + WINDOW_MARGIN && b < hi - WINDOW_MARGIN) {
        return Err(SpecViolation::BlockRatioOutOfWindow { b, lo, hi });
    }
    if l.is_empty() {
        return Err(SpecViolation::NoStages);
    }
    let mut prev = 0;
    for (i, &v) in l.iter().enumerate() {
        if v == 0 || (i > 0 && v <= prev) {
            return Err(SpecViolation::NotIncreasing { k: i + 1, value: v });
        }
        prev = v;
    }
    let m: Vec<u32> = l.iter().map(|&v| ceil_snapped(b * v as f64)).collect();
    for i in 0..l.len() - 1 {
        let end = l[i] + m[i];
        if l[i + 1] <= end {
            return Err(SpecViolation::OverlappingBlocks { k: i + 1, end, next: i + 2, start: l[i + 1] + 1 });
        }
    }
    let depth = l[l.len() - 1] + m[m.len() - 1];
    Ok(DigitBlockSpec { s, b, l: l.to_vec(), m, depth })
}

impl DigitBlockSpec {
    /// `s = 0.8`, `b = 0.3`, `l = (4, 20, 120)` cut down to the stages that
    /// fit in 30 binary digits: `l = (4, 20)`, `m = (2, 6)`, depth 26.
    pub fn default_spec() -> Self {
        validate_parameters(0.8, 0.3, &[4, 20, 120])
            .and_then(|s| s.truncated(MAX_DEPTH))
            .expect("default parameters are valid")
    }

    pub fn from_file(file: &SpecFile) -> Result<Self, SpecViolation> {
        let spec = validate_parameters(file.s, file.b, &file.l)?;
        match file.depth {
            Some(d) => spec.with_depth(d),
            None => Ok(spec),
        }
    }

    pub fn load(path: &Path) -> crate::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: SpecFile = serde_json::from_str(&text)?;
        Ok(Self::from_file(&file)?)
    }

    pub fn to_file(&self) -> SpecFile {
        SpecFile { s: self.s, b: self.b, l: self.l.clone(), depth: Some(self.depth) }
    }

    /// Same parameters at a larger working depth.
    pub fn with_depth(mut self, depth: u32) -> Result<Self, SpecViolation> {
        let needed = self.block_end(self.stage_count());
        if depth < needed {
            return Err(SpecViolation::DepthTooShallow { depth, needed });
        }
        if depth > MAX_DEPTH {
            return Err(SpecViolation::DepthTooLarge { depth, max: MAX_DEPTH });
        }
        self.depth = depth;
        Ok(self)
    }

    /// Keeps the leading stages whose blocks end by `max_depth`.
    pub fn truncated(&self, max_depth: u32) -> Result<Self, SpecViolation> {
        let keep = (1..=self.stage_count()).take_while(|&k| self.block_end(k) <= max_depth).count();
        if keep == 0 {
            return Err(SpecViolation::DepthTooShallow { depth: max_depth, needed: self.block_end(1) });
        }
        let l = &self.l[..keep];
        let mut spec = validate_parameters(self.s, self.b, l)?;
        if self.depth <= max_depth {
            spec = spec.with_depth(self.depth)?;
        }
        Ok(spec)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn l(&self) -> &[u32] {
        &self.l
    }

    pub fn m(&self) -> &[u32] {
        &self.m
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Number of stages `K`.
    pub fn stage_count(&self) -> usize {
        self.l.len()
    }

    /// `l_k` for 1-based `k`.
    pub fn l_k(&self, k: usize) -> u32 {
        self.l[k - 1]
    }

    pub fn m_k(&self, k: usize) -> u32 {
        self.m[k - 1]
    }

    /// Last digit position of block `k`, `l_k + m_k`.
    pub fn block_end(&self, k: usize) -> u32 {
        self.l[k - 1] + self.m[k - 1]
    }

    /// `l_{k+1} / l_k` for consecutive stages. The construction wants these
    /// ratios to grow without bound; at finite `K` they are only reported.
    pub fn ratio_table(&self) -> Vec<RatioRow> {
        self.l
            .windows(2)
            .enumerate()
            .map(|(i, w)| RatioRow { k: i + 1, l_k: w[0], l_next: w[1], ratio: w[1] as f64 / w[0] as f64 })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_two_stages_at_depth_26() {
        let d = DigitBlockSpec::default_spec();
        assert_eq!(d.l(), &[4, 20]);
        assert_eq!(d.m(), &[2, 6]);
        assert_eq!(d.depth(), 26);
    }

    #[test]
    fn full_default_blocks() {
        let d = validate_parameters(0.8, 0.3, &[4, 20, 120]).unwrap();
        assert_eq!(d.m(), &[2, 6, 36]);
        let (lo, hi) = parameter_window(0.8);
        assert!((lo - 0.25).abs() < 1e-15 && (hi - 0.4).abs() < 1e-15);
    }

    #[test]
    fn window_endpoints_rejected() {
        assert!(matches!(validate_parameters(0.7, 0.3, &[4]), Err(SpecViolation::ExponentOutOfRange { .. })));
        assert!(matches!(validate_parameters(0.8, 0.25, &[4]), Err(SpecViolation::BlockRatioOutOfWindow { .. })));
        assert!(matches!(validate_parameters(0.8, 0.4, &[4]), Err(SpecViolation::BlockRatioOutOfWindow { .. })));
        assert!(matches!(validate_parameters(0.8, 0.3, &[4, 5]), Err(SpecViolation::OverlappingBlocks { .. })));
        assert!(matches!(validate_parameters(0.8, 0.3, &[4, 4]), Err(SpecViolation::NotIncreasing { .. })));
    }
}
