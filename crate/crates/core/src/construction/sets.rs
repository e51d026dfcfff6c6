use serde::{Deserialize, Serialize};

use super::spec::DigitBlockSpec;
use crate::cylinder::CylinderSet;
use crate::{Error, Result};

/// Largest number of runs a decomposition may produce.
const RUN_LIMIT: usize = 1 << 24;

/// Which half of the construction is under study. For `A` (`f` even) the
/// stages `k` are odd and the competing stages `j` even; `B` swaps parities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    /// `{f even}` or `{f odd}`.
    pub fn predicate(self) -> Predicate {
        match self {
            Side::A => Predicate::FEven,
            Side::B => Predicate::FOdd,
        }
    }

    /// Parity of `f` on this side: 0 for `A`, 1 for `B`.
    pub fn parity(self) -> usize {
        match self {
            Side::A => 0,
            Side::B => 1,
        }
    }

    /// Stages `k <= K` examined on this side.
    pub fn stages(self, spec: &DigitBlockSpec) -> Vec<usize> {
        (1..=spec.stage_count()).filter(|k| k % 2 != self.parity()).collect()
    }

    /// Stages `j` with `k < j <= K` that carry this side's parity.
    pub fn branches(self, spec: &DigitBlockSpec, k: usize) -> Vec<usize> {
        (k + 1..=spec.stage_count()).filter(|j| j % 2 == self.parity()).collect()
    }
}

/// A condition on the digits of `x` that depends only on which blocks are
/// all zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Predicate {
    FEven,
    FOdd,
    FEquals(usize),
    BlockZero(usize),
    /// Some block `j >= k` is all zero.
    ZeroBlockFrom(usize),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn and(self, other: Predicate) -> Predicate {
        Predicate::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Predicate) -> Predicate {
        Predicate::Or(Box::new(self), Box::new(other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Predicate {
        Predicate::Not(Box::new(self))
    }

    /// `zero[k - 1]` says whether block `k` is all zero.
    pub fn eval(&self, zero: &[bool]) -> bool {
        match self {
            Predicate::FEven => f_of_blocks(zero) % 2 == 0,
            Predicate::FOdd => f_of_blocks(zero) % 2 == 1,
            Predicate::FEquals(j) => f_of_blocks(zero) as usize == *j,
            Predicate::BlockZero(k) => zero.get(k.wrapping_sub(1)).copied().unwrap_or(false),
            Predicate::ZeroBlockFrom(k) => zero.iter().skip(k.saturating_sub(1)).any(|&z| z),
            Predicate::And(a, b) => a.eval(zero) && b.eval(zero),
            Predicate::Or(a, b) => a.eval(zero) || b.eval(zero),
            Predicate::Not(a) => !a.eval(zero),
        }
    }
}

/// Last stage whose block is all zero, or 0.
pub fn f_of_blocks(zero: &[bool]) -> u32 {
    zero.iter().rposition(|&z| z).map_or(0, |i| i as u32 + 1)
}

/// `A_k = {f in side, block k zero}`.
pub fn stage_predicate(side: Side, k: usize) -> Predicate {
    side.predicate().and(Predicate::BlockZero(k))
}

/// `A_k^j = {f = j, block k zero}`.
pub fn branch_predicate(k: usize, j: usize) -> Predicate {
    Predicate::FEquals(j).and(Predicate::BlockZero(k))
}

/// Bit mask of block `k` in a cell index at `depth`; digit `i` of the
/// expansion is bit `depth - i`.
pub fn block_mask(spec: &DigitBlockSpec, k: usize, depth: u32) -> u64 {
    let (lo, hi) = (spec.l_k(k) + 1, spec.block_end(k));
    (lo..=hi).fold(0u64, |m, i| m | (1u64 << (depth - i)))
}

/// Which blocks of the depth-`n` cell `index` are all zero.
pub fn zero_blocks(spec: &DigitBlockSpec, index: u64) -> Vec<bool> {
    (1..=spec.stage_count()).map(|k| index & block_mask(spec, k, spec.depth()) == 0).collect()
}

/// `f` of the cell `index` at the spec's depth.
pub fn classify_index(spec: &DigitBlockSpec, index: u64) -> u32 {
    let n = spec.depth();
    (1..=spec.stage_count()).rev().find(|&k| index & block_mask(spec, k, n) == 0).map_or(0, |k| k as u32)
}

/// `f` of a binary digit string `x_1 x_2 ... x_n`.
pub fn classify_f(digits: &str, spec: &DigitBlockSpec) -> Result<u32> {
    let need = spec.block_end(spec.stage_count()) as usize;
    if digits.len() < need {
        return Err(Error::InvalidArgument(format!("digit string has length {}, need at least {need}", digits.len())));
    }
    let bytes = digits.as_bytes();
    if let Some(c) = bytes.iter().find(|c| **c != b'0' && **c != b'1') {
        return Err(Error::InvalidArgument(format!("unexpected character {:?} in digit string", *c as char)));
    }
    let mut f = 0;
    for k in 1..=spec.stage_count() {
        let block = &bytes[spec.l_k(k) as usize..spec.block_end(k) as usize];
        if block.iter().all(|&c| c == b'0') {
            f = k as u32;
        }
    }
    Ok(f)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum BlockState {
    Open,
    Zero,
    NonZero,
}

/// Exact depth-`n` cylinder set of the cells satisfying `pred`.
pub fn cylinder_decompose(spec: &DigitBlockSpec, pred: &Predicate) -> Result<CylinderSet> {
    let n = spec.depth();
    // Block index of each digit position, 1-based positions.
    let mut owner = vec![None; n as usize + 1];
    for k in 1..=spec.stage_count() {
        for i in spec.l_k(k) + 1..=spec.block_end(k) {
            owner[i as usize] = Some(k - 1);
        }
    }
    let mut walk = Walk { spec, pred, owner, runs: Vec::new(), n };
    let mut states = vec![BlockState::Open; spec.stage_count()];
    match walk.decided(&states) {
        Some(true) => walk.emit(0, 0)?,
        Some(false) => {}
        None => walk.descend(0, 0, &mut states)?,
    }
    CylinderSet::from_runs(n, walk.runs)
}

struct Walk<'a> {
    spec: &'a DigitBlockSpec,
    pred: &'a Predicate,
    owner: Vec<Option<usize>>,
    runs: Vec<(u64, u64)>,
    n: u32,
}

impl Walk<'_> {
    /// The predicate's value if it is the same for every completion of the
    /// open blocks.
    fn decided(&self, states: &[BlockState]) -> Option<bool> {
        let open: Vec<usize> = (0..states.len()).filter(|&i| states[i] == BlockState::Open).collect();
        let mut zero: Vec<bool> = states.iter().map(|s| *s == BlockState::Zero).collect();
        let mut first = None;
        for mask in 0u64..(1u64 << open.len()) {
            for (b, &i) in open.iter().enumerate() {
                zero[i] = mask >> b & 1 == 1;
            }
            let v = self.pred.eval(&zero);
            match first {
                None => first = Some(v),
                Some(f) if f != v => return None,
                _ => {}
            }
        }
        first
    }

    fn emit(&mut self, prefix: u64, len: u32) -> Result<()> {
        let shift = self.n - len;
        let (a, b) = (prefix << shift, (prefix + 1) << shift);
        match self.runs.last_mut() {
            Some(last) if last.1 == a => last.1 = b,
            _ => {
                if self.runs.len() >= RUN_LIMIT {
                    return Err(Error::TooLarge(format!(
                        "decomposition at depth {} needs more than {RUN_LIMIT} intervals; reduce the depth or stage count",
                        self.n
                    )));
                }
                self.runs.push((a, b));
            }
        }
        Ok(())
    }

    /// Visits the children of the cell `prefix` of length `len`, whose value
    /// is undecided.
    fn descend(&mut self, prefix: u64, len: u32, states: &mut [BlockState]) -> Result<()> {
        let pos = len + 1;
        let owner = self.owner[pos as usize];
        for digit in 0..2u64 {
            let child = prefix << 1 | digit;
            let resolved = owner.map(|k| {
                let before = states[k];
                if digit == 1 {
                    states[k] = BlockState::NonZero;
                } else if pos == self.spec.block_end(k + 1) && before == BlockState::Open {
                    states[k] = BlockState::Zero;
                }
                (k, before)
            });
            let value = match resolved {
                Some((k, before)) if states[k] != before => self.decided(states),
                _ => None,
            };
            match value {
                Some(true) => self.emit(child, pos)?,
                Some(false) => {}
                None if pos < self.n => self.descend(child, pos, states)?,
                None => unreachable!("every block is resolved at full depth"),
            }
            if let Some((k, before)) = resolved {
                states[k] = before;
            }
        }
        Ok(())
    }
}

/// Block zero-patterns satisfying `pred`, each listed as `zero[k - 1]`.
pub fn block_patterns(spec: &DigitBlockSpec, pred: &Predicate) -> Vec<Vec<bool>> {
    let k = spec.stage_count();
    (0u64..1 << k)
        .map(|mask| (0..k).map(|i| mask >> i & 1 == 1).collect::<Vec<bool>>())
        .filter(|z| pred.eval(z))
        .collect()
}

/// Lebesgue measure of a block pattern: `prod 2^{-m_k}` over zero blocks
/// times `prod (1 - 2^{-m_k})` over the rest.
pub fn pattern_lebesgue(spec: &DigitBlockSpec, zero: &[bool]) -> f64 {
    zero.iter()
        .enumerate()
        .map(|(i, &z)| {
            let p = (-(spec.m()[i] as f64)).exp2();
            if z {
                p
            } else {
                1.0 - p
            }
        })
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::spec::validate_parameters;

    fn tiny() -> DigitBlockSpec {
        validate_parameters(0.9, 0.3, &[2, 6]).unwrap().with_depth(12).unwrap()
    }

    #[test]
    fn classify_examples() {
        let spec = tiny();
        assert_eq!(classify_f(&"1".repeat(12), &spec).unwrap(), 0);
        // Block 2 is digits 7..8.
        assert_eq!(classify_f("111111001111", &spec).unwrap(), 2);
        assert_eq!(classify_f("110111111111", &spec).unwrap(), 1);
        assert!(classify_f("1101", &spec).is_err());
    }

    #[test]
    fn decomposition_matches_enumeration() {
        let spec = tiny();
        for pred in [
            Predicate::FEven,
            Predicate::FOdd,
            Predicate::FEquals(2),
            Predicate::BlockZero(1),
            stage_predicate(Side::A, 1),
            branch_predicate(1, 2),
            Predicate::ZeroBlockFrom(1),
        ] {
            let set = cylinder_decompose(&spec, &pred).unwrap();
            for p in 0..1u64 << 12 {
                assert_eq!(set.contains(p), pred.eval(&zero_blocks(&spec, p)), "{pred:?} cell {p}");
            }
        }
    }

    #[test]
    fn patterns_sum_to_lebesgue() {
        let spec = tiny();
        let pred = Predicate::FEven;
        let set = cylinder_decompose(&spec, &pred).unwrap();
        let via_patterns: f64 = block_patterns(&spec, &pred).iter().map(|z| pattern_lebesgue(&spec, z)).sum();
        assert_eq!(set.lebesgue_mass(), via_patterns);
    }
}
