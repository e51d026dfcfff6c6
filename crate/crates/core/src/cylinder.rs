//! Finite unions of dyadic intervals.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::measure::MAX_DEPTH;
use crate::{Error, Result};

/// Largest set that is serialised as an explicit index list; bigger sets are
/// written as runs.
const INDEX_LIST_LIMIT: u64 = 1 << 16;

/// A union of depth-`n` dyadic cells `[p 2^-n, (p+1) 2^-n)`.
///
/// Stored as sorted, disjoint, non-adjacent half-open runs of cell indices,
/// so sets with millions of cells stay small.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CylinderSet {
    depth: u32,
    runs: Vec<(u64, u64)>,
}

impl CylinderSet {
    pub fn empty(depth: u32) -> Result<Self> {
        check_depth(depth)?;
        Ok(CylinderSet { depth, runs: Vec::new() })
    }

    pub fn full(depth: u32) -> Result<Self> {
        check_depth(depth)?;
        Ok(CylinderSet { depth, runs: vec![(0, 1u64 << depth)] })
    }

    /// Builds a set from strictly increasing cell indices.
    pub fn from_indices<I: IntoIterator<Item = u64>>(depth: u32, indices: I) -> Result<Self> {
        check_depth(depth)?;
        let cells = 1u64 << depth;
        let mut runs: Vec<(u64, u64)> = Vec::new();
        let mut prev: Option<u64> = None;
        for p in indices {
            if p >= cells {
                return Err(Error::IndexOutOfRange { index: p, depth });
            }
            if let Some(q) = prev {
                if p <= q {
                    return Err(Error::UnsortedCells { prev: q, next: p });
                }
            }
            prev = Some(p);
            match runs.last_mut() {
                Some(last) if last.1 == p => last.1 = p + 1,
                _ => runs.push((p, p + 1)),
            }
        }
        Ok(CylinderSet { depth, runs })
    }

    /// Builds a set from sorted, disjoint, non-empty half-open runs; touching
    /// runs are merged.
    pub fn from_runs(depth: u32, runs: Vec<(u64, u64)>) -> Result<Self> {
        check_depth(depth)?;
        let cells = 1u64 << depth;
        let mut merged: Vec<(u64, u64)> = Vec::with_capacity(runs.len());
        for (a, b) in runs {
            if a >= b {
                return Err(Error::InvalidArgument(format!("empty run [{a}, {b})")));
            }
            if b > cells {
                return Err(Error::IndexOutOfRange { index: b - 1, depth });
            }
            match merged.last_mut() {
                Some(last) if a < last.1 => {
                    return Err(Error::UnsortedCells { prev: last.1 - 1, next: a })
                }
                Some(last) if a == last.1 => last.1 = b,
                _ => merged.push((a, b)),
            }
        }
        Ok(CylinderSet { depth, runs: merged })
    }

    /// Set of all depth-`depth` cells inside the given dyadic intervals
    /// `(level, index)`, each with `level <= depth`. Intervals may overlap.
    pub fn from_intervals(depth: u32, intervals: &[(u32, u64)]) -> Result<Self> {
        check_depth(depth)?;
        let mut runs = Vec::with_capacity(intervals.len());
        for &(level, index) in intervals {
            if level > depth || index >= (1u64 << level) {
                return Err(Error::InvalidArgument(format!(
                    "interval ({level}, {index}) does not fit depth {depth}"
                )));
            }
            let shift = depth - level;
            runs.push((index << shift, (index + 1) << shift));
        }
        runs.sort_unstable();
        Ok(CylinderSet { depth, runs: normalize_runs(runs) })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn runs(&self) -> &[(u64, u64)] {
        &self.runs
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Number of depth-`n` cells in the set.
    pub fn cell_count(&self) -> u64 {
        self.runs.iter().map(|(a, b)| b - a).sum()
    }

    /// Lebesgue measure of the set (exact: a count times a power of two).
    pub fn lebesgue_mass(&self) -> f64 {
        self.cell_count() as f64 * (-(self.depth as f64)).exp2()
    }

    pub fn contains(&self, index: u64) -> bool {
        let i = self.runs.partition_point(|r| r.1 <= index);
        i < self.runs.len() && self.runs[i].0 <= index
    }

    pub fn indices(&self) -> impl Iterator<Item = u64> + '_ {
        self.runs.iter().flat_map(|&(a, b)| a..b)
    }

    /// The same set described at a finer depth.
    pub fn refine(&self, depth: u32) -> Result<Self> {
        check_depth(depth)?;
        if depth < self.depth {
            return Err(Error::RefineDown { from: self.depth, to: depth });
        }
        let shift = depth - self.depth;
        let runs = self.runs.iter().map(|&(a, b)| (a << shift, b << shift)).collect();
        Ok(CylinderSet { depth, runs })
    }

    /// Decomposes the set into maximal aligned dyadic intervals
    /// `(level, index)`, in increasing order.
    pub fn maximal_intervals(&self) -> Vec<(u32, u64)> {
        let mut out = Vec::new();
        for &(a, b) in &self.runs {
            aligned_blocks(self.depth, a, b, |level, index| out.push((level, index)));
        }
        out
    }

    pub fn union(&self, other: &CylinderSet) -> CylinderSet {
        self.combine(other, |x, y| x || y)
    }

    pub fn intersection(&self, other: &CylinderSet) -> CylinderSet {
        self.combine(other, |x, y| x && y)
    }

    pub fn difference(&self, other: &CylinderSet) -> CylinderSet {
        self.combine(other, |x, y| x && !y)
    }

    pub fn complement(&self) -> CylinderSet {
        let full = CylinderSet { depth: self.depth, runs: vec![(0, 1u64 << self.depth)] };
        full.difference(self)
    }

    pub fn is_subset_of(&self, other: &CylinderSet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_disjoint_from(&self, other: &CylinderSet) -> bool {
        self.intersection(other).is_empty()
    }

    /// Boolean combination by a sweep over run boundaries, at the finer of
    /// the two depths.
    fn combine(&self, other: &CylinderSet, op: impl Fn(bool, bool) -> bool) -> CylinderSet {
        let depth = self.depth.max(other.depth);
        let a = self.refine(depth).expect("depth within range");
        let b = other.refine(depth).expect("depth within range");
        let mut cuts: Vec<u64> = Vec::with_capacity(2 * (a.runs.len() + b.runs.len()) + 2);
        cuts.push(0);
        for &(x, y) in a.runs.iter().chain(&b.runs) {
            cuts.push(x);
            cuts.push(y);
        }
        cuts.push(1u64 << depth);
        cuts.sort_unstable();
        cuts.dedup();
        let mut runs: Vec<(u64, u64)> = Vec::new();
        let (mut i, mut j) = (0, 0);
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            while i < a.runs.len() && a.runs[i].1 <= lo {
                i += 1;
            }
            while j < b.runs.len() && b.runs[j].1 <= lo {
                j += 1;
            }
            let in_a = i < a.runs.len() && a.runs[i].0 <= lo;
            let in_b = j < b.runs.len() && b.runs[j].0 <= lo;
            if op(in_a, in_b) {
                match runs.last_mut() {
                    Some(last) if last.1 == lo => last.1 = hi,
                    _ => runs.push((lo, hi)),
                }
            }
        }
        CylinderSet { depth, runs }
    }
}

/// Calls `emit(level, index)` for the maximal aligned dyadic blocks covering
/// the half-open run `[a, b)` of depth-`depth` cells.
pub(crate) fn aligned_blocks(depth: u32, mut a: u64, b: u64, mut emit: impl FnMut(u32, u64)) {
    while a < b {
        let align = if a == 0 { depth } else { a.trailing_zeros().min(depth) };
        let fit = 63 - (b - a).leading_zeros();
        let t = align.min(fit);
        emit(depth - t, a >> t);
        a += 1u64 << t;
    }
}

fn normalize_runs(sorted: Vec<(u64, u64)>) -> Vec<(u64, u64)> {
    let mut out: Vec<(u64, u64)> = Vec::with_capacity(sorted.len());
    for (a, b) in sorted {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn check_depth(depth: u32) -> Result<()> {
    if depth > MAX_DEPTH {
        return Err(Error::DepthTooLarge { depth, max: MAX_DEPTH });
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct CylinderRepr {
    depth: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    indices: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    runs: Option<Vec<(u64, u64)>>,
}

impl Serialize for CylinderSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = if self.cell_count() <= INDEX_LIST_LIMIT {
            CylinderRepr { depth: self.depth, indices: Some(self.indices().collect()), runs: None }
        } else {
            CylinderRepr { depth: self.depth, indices: None, runs: Some(self.runs.clone()) }
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CylinderSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = CylinderRepr::deserialize(deserializer)?;
        let set = match (repr.indices, repr.runs) {
            (Some(ix), None) => CylinderSet::from_indices(repr.depth, ix),
            (None, Some(runs)) => CylinderSet::from_runs(repr.depth, runs),
            _ => return Err(D::Error::custom("expected exactly one of `indices` or `runs`")),
        };
        set.map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_merge_and_count() {
        let s = CylinderSet::from_indices(4, [1, 2, 3, 7, 8]).unwrap();
        assert_eq!(s.runs(), &[(1, 4), (7, 9)]);
        assert_eq!(s.cell_count(), 5);
        assert!(s.contains(8) && !s.contains(4));
    }

    #[test]
    fn rejects_unsorted_and_out_of_range() {
        assert!(CylinderSet::from_indices(3, [2, 1]).is_err());
        assert!(CylinderSet::from_indices(3, [8]).is_err());
    }

    #[test]
    fn maximal_intervals_cover_runs() {
        let s = CylinderSet::from_runs(4, vec![(3, 13)]).unwrap();
        let iv = s.maximal_intervals();
        assert_eq!(iv, vec![(4, 3), (2, 1), (2, 2), (4, 12)]);
        assert_eq!(CylinderSet::from_intervals(4, &iv).unwrap(), s);
    }

    #[test]
    fn set_algebra() {
        let a = CylinderSet::from_runs(3, vec![(0, 4)]).unwrap();
        let b = CylinderSet::from_runs(2, vec![(1, 3)]).unwrap();
        assert_eq!(a.intersection(&b).runs(), &[(2, 4)]);
        assert_eq!(a.union(&b).runs(), &[(0, 6)]);
        assert_eq!(a.difference(&b).runs(), &[(0, 2)]);
        assert_eq!(a.complement().runs(), &[(4, 8)]);
        assert!(a.complement().is_disjoint_from(&a));
    }

    #[test]
    fn json_forms_round_trip() {
        let s = CylinderSet::from_indices(3, [0, 5, 6]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"depth":3,"indices":[0,5,6]}"#);
        assert_eq!(serde_json::from_str::<CylinderSet>(&text).unwrap(), s);
        let big = CylinderSet::full(20).unwrap();
        let text = serde_json::to_string(&big).unwrap();
        assert_eq!(serde_json::from_str::<CylinderSet>(&text).unwrap(), big);
        assert!(serde_json::from_str::<CylinderSet>(r#"{"depth":3,"indices":[2,1]}"#).is_err());
    }
}
