//! Finite Borel measures on `[0, 1]`.
//!
//! [`DyadicMeasure`] is constant on every depth-`n` dyadic cell. It is stored
//! as maximal uniform dyadic blocks: a block `(level, index, mass)` spreads
//! `mass` uniformly over `[index 2^-level, (index+1) 2^-level)`. Lebesgue
//! measure on a digit-block set at depth 26 is then a few hundred thousand
//! blocks rather than 2^26 weights, and refinement is free.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cylinder::{aligned_blocks, CylinderSet};
use crate::exact::ExactSum;
use crate::{Error, Result};

/// Deepest supported dyadic resolution.
pub const MAX_DEPTH: u32 = 30;

/// Measures up to this depth are serialised as a dense weight vector.
const DENSE_JSON_DEPTH: u32 = 16;

/// Largest depth for which a dense weight vector is materialised.
const DENSE_DEPTH_LIMIT: u32 = 26;

/// Uniform mass on one dyadic interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Block {
    pub level: u32,
    pub index: u64,
    pub mass: f64,
}

impl Block {
    /// First depth-`depth` cell covered by the block.
    pub fn start(&self, depth: u32) -> u64 {
        self.index << (depth - self.level)
    }

    /// One past the last depth-`depth` cell covered by the block.
    pub fn end(&self, depth: u32) -> u64 {
        (self.index + 1) << (depth - self.level)
    }

    /// Left endpoint in `[0, 1)`.
    pub fn left(&self) -> f64 {
        self.index as f64 * (-(self.level as f64)).exp2()
    }

    pub fn length(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }
}

/// A measure with constant density on each depth-`n` dyadic cell.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicMeasure {
    depth: u32,
    blocks: Vec<Block>,
}

impl DyadicMeasure {
    /// Lebesgue measure on `[0, 1]` at the given depth.
    pub fn lebesgue(depth: u32) -> Result<Self> {
        check_depth(depth)?;
        Ok(DyadicMeasure { depth, blocks: vec![Block { level: 0, index: 0, mass: 1.0 }] })
    }

    /// The zero measure.
    pub fn zero(depth: u32) -> Result<Self> {
        check_depth(depth)?;
        Ok(DyadicMeasure { depth, blocks: Vec::new() })
    }

    /// Builds a measure from one weight per depth-`depth` cell.
    pub fn from_weights(depth: u32, weights: &[f64]) -> Result<Self> {
        check_depth(depth)?;
        let expected = 1u64 << depth;
        if weights.len() as u64 != expected {
            return Err(Error::WeightCount { depth, expected, got: weights.len() as u64 });
        }
        Self::from_cells(depth, weights.iter().enumerate().map(|(p, &w)| (p as u64, w)))
    }

    /// Builds a measure from `(cell, weight)` pairs; absent cells weigh zero
    /// and repeated cells add.
    pub fn from_cells<I: IntoIterator<Item = (u64, f64)>>(depth: u32, cells: I) -> Result<Self> {
        check_depth(depth)?;
        let mut blocks = Vec::new();
        for (index, mass) in cells {
            check_weight(index, mass)?;
            if index >= 1u64 << depth {
                return Err(Error::IndexOutOfRange { index, depth });
            }
            blocks.push(Block { level: depth, index, mass });
        }
        Self::from_blocks(depth, blocks)
    }

    /// Sum of uniform blocks, which may overlap. Every block needs
    /// `level <= depth`.
    pub fn from_blocks(depth: u32, blocks: Vec<Block>) -> Result<Self> {
        check_depth(depth)?;
        for b in &blocks {
            check_weight(b.index, b.mass)?;
            if b.level > depth || b.index >= 1u64 << b.level {
                return Err(Error::InvalidArgument(format!(
                    "block ({}, {}) does not fit depth {depth}",
                    b.level, b.index
                )));
            }
        }
        Ok(DyadicMeasure { depth, blocks: accumulate(depth, blocks) })
    }

    /// Lebesgue measure restricted to a cylinder set.
    pub fn lebesgue_on(set: &CylinderSet) -> Self {
        let mut blocks = Vec::new();
        for (level, index) in set.maximal_intervals() {
            blocks.push(Block { level, index, mass: (-(level as f64)).exp2() });
        }
        DyadicMeasure { depth: set.depth(), blocks: merge_siblings(blocks) }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Canonical blocks: disjoint, sorted, non-zero, with no two equal-mass
    /// siblings.
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn total_mass_exact(&self) -> ExactSum {
        let mut s = ExactSum::new();
        for b in &self.blocks {
            s.add(b.mass);
        }
        s
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass_exact().value()
    }

    /// Weight of depth-`n` cell `index`.
    pub fn weight(&self, index: u64) -> f64 {
        let i = self.blocks.partition_point(|b| b.end(self.depth) <= index);
        match self.blocks.get(i) {
            Some(b) if b.start(self.depth) <= index => b.mass * cell_fraction(self.depth - b.level),
            _ => 0.0,
        }
    }

    /// Non-zero depth-`n` cells with their weights, in increasing order.
    pub fn cells(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        let depth = self.depth;
        self.blocks.iter().flat_map(move |b| {
            let w = b.mass * cell_fraction(depth - b.level);
            (b.start(depth)..b.end(depth)).map(move |p| (p, w))
        })
    }

    /// Number of depth-`n` cells carrying positive mass.
    pub fn support_cell_count(&self) -> u64 {
        self.blocks.iter().map(|b| b.end(self.depth) - b.start(self.depth)).sum()
    }

    /// Dense weight vector (limited to moderate depths).
    pub fn weights(&self) -> Result<Vec<f64>> {
        if self.depth > DENSE_DEPTH_LIMIT {
            return Err(Error::TooLarge(format!(
                "dense weights at depth {} (limit {DENSE_DEPTH_LIMIT})",
                self.depth
            )));
        }
        let mut w = vec![0.0; 1usize << self.depth];
        for (p, x) in self.cells() {
            w[p as usize] = x;
        }
        Ok(w)
    }

    /// Same measure at a finer depth.
    pub fn refine(&self, depth: u32) -> Result<Self> {
        check_depth(depth)?;
        if depth < self.depth {
            return Err(Error::RefineDown { from: self.depth, to: depth });
        }
        Ok(DyadicMeasure { depth, blocks: self.blocks.clone() })
    }

    /// Restriction to a cylinder set, at the finer of the two depths.
    pub fn restrict(&self, set: &CylinderSet) -> Result<Self> {
        let depth = self.depth.max(set.depth());
        let set = set.refine(depth)?;
        let runs = set.runs();
        let mut out = Vec::new();
        let mut r = 0;
        for b in &self.blocks {
            let (bs, be) = (b.start(depth), b.end(depth));
            while r < runs.len() && runs[r].1 <= bs {
                r += 1;
            }
            let mut k = r;
            while k < runs.len() && runs[k].0 < be {
                let lo = runs[k].0.max(bs);
                let hi = runs[k].1.min(be);
                aligned_blocks(depth, lo, hi, |level, index| {
                    let mass = b.mass * cell_fraction(level - b.level);
                    out.push(Block { level, index, mass });
                });
                k += 1;
            }
        }
        Ok(DyadicMeasure { depth, blocks: merge_siblings(out) })
    }

    /// Exact mass of a cylinder set.
    pub fn mass_of_exact(&self, set: &CylinderSet) -> Result<ExactSum> {
        let depth = self.depth.max(set.depth());
        let set = set.refine(depth)?;
        let runs = set.runs();
        let mut sum = ExactSum::new();
        let mut r = 0;
        for b in &self.blocks {
            let (bs, be) = (b.start(depth), b.end(depth));
            while r < runs.len() && runs[r].1 <= bs {
                r += 1;
            }
            let mut k = r;
            while k < runs.len() && runs[k].0 < be {
                let count = runs[k].1.min(be) - runs[k].0.max(bs);
                sum.add_scaled(b.mass, count, depth - b.level);
                k += 1;
            }
        }
        Ok(sum)
    }

    pub fn mass_of(&self, set: &CylinderSet) -> Result<f64> {
        Ok(self.mass_of_exact(set)?.value())
    }

    /// Image under `x -> 2^l x mod 1`. The result has depth `n - l`.
    pub fn dyadic_pushforward(&self, l: u32) -> Result<Self> {
        if l > self.depth {
            return Err(Error::PushforwardTooDeep { l, depth: self.depth });
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                if b.level >= l {
                    let level = b.level - l;
                    Block { level, index: b.index & ((1u64 << level) - 1), mass: b.mass }
                } else {
                    // Blocks coarser than 2^-l wrap around the circle evenly.
                    Block { level: 0, index: 0, mass: b.mass }
                }
            })
            .collect();
        Ok(DyadicMeasure { depth: self.depth - l, blocks: accumulate(self.depth - l, blocks) })
    }

    /// Rescales to total mass one.
    pub fn normalize(&self) -> Result<Self> {
        let total = self.total_mass();
        if total == 0.0 {
            return Err(Error::ZeroMass);
        }
        if total == 1.0 {
            return Ok(self.clone());
        }
        Ok(self.scale(1.0 / total))
    }

    pub fn scale(&self, c: f64) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|b| Block { mass: b.mass * c, ..*b })
            .filter(|b| b.mass != 0.0)
            .collect();
        DyadicMeasure { depth: self.depth, blocks: merge_siblings(blocks) }
    }

    /// Sum of two measures, at the finer depth.
    pub fn add(&self, other: &DyadicMeasure) -> Self {
        let depth = self.depth.max(other.depth);
        let blocks = self.blocks.iter().chain(&other.blocks).copied().collect();
        DyadicMeasure { depth, blocks: accumulate(depth, blocks) }
    }

    /// Image under `x -> 1 - x`.
    pub fn reflect(&self) -> Self {
        let mut blocks: Vec<Block> = self
            .blocks
            .iter()
            .map(|b| Block { index: (1u64 << b.level) - 1 - b.index, ..*b })
            .collect();
        blocks.reverse();
        DyadicMeasure { depth: self.depth, blocks }
    }
}

/// `2^-shift`.
fn cell_fraction(shift: u32) -> f64 {
    (-(shift as f64)).exp2()
}

fn check_depth(depth: u32) -> Result<()> {
    if depth > MAX_DEPTH {
        return Err(Error::DepthTooLarge { depth, max: MAX_DEPTH });
    }
    Ok(())
}

fn check_weight(index: u64, w: f64) -> Result<()> {
    if !w.is_finite() || w < 0.0 {
        return Err(Error::InvalidWeight { index, value: w });
    }
    Ok(())
}

/// Canonical form of a sum of possibly overlapping blocks.
///
/// Blocks are sorted by position and pushed down a binary trie: a node's mass
/// is split evenly between its children whenever a finer block lies inside
/// it. Halving is exact, so only genuine overlaps incur rounding.
pub(crate) fn accumulate(depth: u32, mut blocks: Vec<Block>) -> Vec<Block> {
    blocks.retain(|b| b.mass != 0.0);
    blocks.sort_by(|x, y| {
        (x.start(depth), x.level).cmp(&(y.start(depth), y.level))
    });
    let mut out = Vec::with_capacity(blocks.len());
    descend(depth, 0, 0, 0.0, &blocks, &mut out);
    merge_siblings(out)
}

fn descend(depth: u32, level: u32, index: u64, inherited: f64, pieces: &[Block], out: &mut Vec<Block>) {
    let mut mass = inherited;
    let mut rest = pieces;
    while let Some(first) = rest.first() {
        if first.level != level {
            break;
        }
        mass += first.mass;
        rest = &rest[1..];
    }
    if rest.is_empty() {
        if mass > 0.0 {
            out.push(Block { level, index, mass });
        }
        return;
    }
    let mid = (2 * index + 1) << (depth - level - 1);
    let split = rest.partition_point(|b| b.start(depth) < mid);
    let half = mass * 0.5;
    descend(depth, level + 1, 2 * index, half, &rest[..split], out);
    descend(depth, level + 1, 2 * index + 1, half, &rest[split..], out);
}

/// Merges equal-mass sibling blocks bottom-up. Input must be sorted and
/// disjoint.
pub(crate) fn merge_siblings(blocks: Vec<Block>) -> Vec<Block> {
    let mut stack: Vec<Block> = Vec::with_capacity(blocks.len());
    for b in blocks {
        stack.push(b);
        while stack.len() >= 2 {
            let y = stack[stack.len() - 1];
            let x = stack[stack.len() - 2];
            if x.level == y.level && x.level > 0 && x.index % 2 == 0 && y.index == x.index + 1 && x.mass == y.mass {
                stack.truncate(stack.len() - 2);
                stack.push(Block { level: x.level - 1, index: x.index / 2, mass: x.mass * 2.0 });
            } else {
                break;
            }
        }
    }
    stack
}

#[derive(Serialize, Deserialize)]
struct DyadicRepr {
    depth: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    /// `[level, index, mass]` triples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    blocks: Option<Vec<(u32, u64, f64)>>,
}

impl Serialize for DyadicMeasure {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = if self.depth <= DENSE_JSON_DEPTH {
            DyadicRepr { depth: self.depth, weights: Some(self.weights().expect("small depth")), blocks: None }
        } else {
            let blocks = self.blocks.iter().map(|b| (b.level, b.index, b.mass)).collect();
            DyadicRepr { depth: self.depth, weights: None, blocks: Some(blocks) }
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DyadicMeasure {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = DyadicRepr::deserialize(deserializer)?;
        let m = match (repr.weights, repr.blocks) {
            (Some(w), None) => DyadicMeasure::from_weights(repr.depth, &w),
            (None, Some(b)) => DyadicMeasure::from_blocks(
                repr.depth,
                b.into_iter().map(|(level, index, mass)| Block { level, index, mass }).collect(),
            ),
            _ => return Err(D::Error::custom("expected exactly one of `weights` or `blocks`")),
        };
        m.map_err(D::Error::custom)
    }
}

/// A finite combination of point masses inside a declared support interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    atoms: Vec<(f64, f64)>,
    support: (f64, f64),
}

impl AtomicMeasure {
    /// Atoms `(position, mass)` inside `support`; atoms are sorted by
    /// position and repeated positions merged.
    pub fn new(atoms: Vec<(f64, f64)>, support: (f64, f64)) -> Result<Self> {
        let (lo, hi) = support;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidArgument(format!("bad support interval [{lo}, {hi}]")));
        }
        let mut merged: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
        for (x, m) in atoms {
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::InvalidAtomMass { mass: m });
            }
            if !(x >= lo && x <= hi) {
                return Err(Error::AtomOutsideSupport { position: x, lo, hi });
            }
            if m == 0.0 {
                continue;
            }
            // Order-preserving key for non-negative and negative positions.
            let key = order_key(x);
            merged.entry(key).and_modify(|e| e.1 += m).or_insert((x, m));
        }
        Ok(AtomicMeasure { atoms: merged.into_values().collect(), support })
    }

    /// Atoms on `[0, 1]`.
    pub fn on_unit_interval(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(atoms, (0.0, 1.0))
    }

    pub fn dirac(x: f64) -> Result<Self> {
        Self::on_unit_interval(vec![(x, 1.0)])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// Convolution; the support interval is the Minkowski sum.
    pub fn convolve(&self, other: &AtomicMeasure) -> Result<Self> {
        let mut atoms = Vec::with_capacity(self.atoms.len() * other.atoms.len());
        for &(x, m) in &self.atoms {
            for &(y, w) in &other.atoms {
                atoms.push((x + y, m * w));
            }
        }
        Self::new(atoms, (self.support.0 + other.support.0, self.support.1 + other.support.1))
    }
}

fn order_key(x: f64) -> u64 {
    let bits = x.to_bits();
    if x.is_sign_negative() {
        !bits
    } else {
        bits | (1u64 << 63)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lebesgue_is_one_block() {
        let w = vec![0.25; 4];
        let m = DyadicMeasure::from_weights(2, &w).unwrap();
        assert_eq!(m.blocks(), &[Block { level: 0, index: 0, mass: 1.0 }]);
        assert_eq!(m, DyadicMeasure::lebesgue(2).unwrap());
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(DyadicMeasure::from_weights(1, &[0.5, -0.1]).is_err());
        assert!(DyadicMeasure::from_weights(1, &[0.5, f64::NAN]).is_err());
        assert!(DyadicMeasure::from_weights(2, &[0.5, 0.5]).is_err());
        assert!(DyadicMeasure::lebesgue(31).is_err());
    }

    #[test]
    fn restriction_to_half() {
        let m = DyadicMeasure::lebesgue(3).unwrap();
        let half = CylinderSet::from_indices(1, [1]).unwrap();
        let r = m.restrict(&half).unwrap();
        assert_eq!(r.total_mass(), 0.5);
        assert_eq!(r.depth(), 3);
        assert_eq!(r.weight(0), 0.0);
        assert_eq!(r.weight(7), 0.125);
    }

    #[test]
    fn pushforward_of_doubling() {
        // Point-like mass on [0.5, 0.75) maps to [0, 0.5) under doubling.
        let m = DyadicMeasure::from_cells(2, [(2, 1.0)]).unwrap();
        let p = m.dyadic_pushforward(1).unwrap();
        assert_eq!(p.depth(), 1);
        assert_eq!(p.weights().unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn overlapping_blocks_accumulate() {
        let m = DyadicMeasure::from_blocks(
            3,
            vec![Block { level: 0, index: 0, mass: 1.0 }, Block { level: 3, index: 5, mass: 0.5 }],
        )
        .unwrap();
        assert_eq!(m.total_mass(), 1.5);
        assert_eq!(m.weight(5), 0.625);
        assert_eq!(m.weight(4), 0.125);
    }

    #[test]
    fn json_round_trip_both_forms() {
        let m = DyadicMeasure::from_weights(2, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("weights"));
        assert_eq!(serde_json::from_str::<DyadicMeasure>(&text).unwrap(), m);
        let deep = DyadicMeasure::from_cells(20, [(7, 0.5), (99, 0.25)]).unwrap();
        let text = serde_json::to_string(&deep).unwrap();
        assert!(text.contains("blocks"));
        assert_eq!(serde_json::from_str::<DyadicMeasure>(&text).unwrap(), deep);
    }

    #[test]
    fn atomic_validation_and_convolution() {
        assert!(AtomicMeasure::on_unit_interval(vec![(1.5, 1.0)]).is_err());
        assert!(AtomicMeasure::on_unit_interval(vec![(0.5, -1.0)]).is_err());
        let a = AtomicMeasure::on_unit_interval(vec![(0.25, 0.5), (0.5, 0.5)]).unwrap();
        let c = a.convolve(&a).unwrap();
        assert_eq!(c.atoms(), &[(0.5, 0.25), (0.75, 0.5), (1.0, 0.25)]);
        assert_eq!(c.support(), (0.0, 2.0));
    }
}
