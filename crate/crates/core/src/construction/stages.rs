use serde::{Deserialize, Serialize};

use super::sets::{branch_predicate, cylinder_decompose, stage_predicate, Predicate, Side};
use super::spec::DigitBlockSpec;
use crate::exact::ExactSum;
use crate::measure::DyadicMeasure;
use crate::Result;

/// `2^{-(m_k + j - k)} / 6`, the largest `alpha_k^j` allowed for `k` in `P`.
pub fn p_threshold(spec: &DigitBlockSpec, k: usize, j: usize) -> f64 {
    let e = spec.m_k(k) as i64 + j as i64 - k as i64;
    (-(e as f64)).exp2() / 6.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchMass {
    pub j: usize,
    /// `alpha_k^j = mu(A_k^j)`.
    pub alpha: f64,
    pub threshold: f64,
    pub within_threshold: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageMass {
    pub k: usize,
    /// `alpha_k = mu(A_k)`.
    pub alpha: f64,
    pub branches: Vec<BranchMass>,
    /// `alpha_k - sum_j alpha_k^j`, mass of `A_k` not accounted for by a
    /// stage `j <= K`. Zero at finite depth.
    pub residual: f64,
    /// Whether `alpha_k`, the `alpha_k^j` and the residual were all summed
    /// without rounding.
    pub exact: bool,
    pub in_p: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageMasses {
    pub side: Side,
    pub stages: Vec<StageMass>,
}

impl StageMasses {
    pub fn stage(&self, k: usize) -> Option<&StageMass> {
        self.stages.iter().find(|s| s.k == k)
    }
}

/// Masses `alpha_k`, `alpha_k^j` and membership in `P` for every stage `k` on
/// the given side.
pub fn stage_masses(mu: &DyadicMeasure, spec: &DigitBlockSpec, side: Side) -> Result<StageMasses> {
    let mut stages = Vec::new();
    for k in side.stages(spec) {
        let a_k = cylinder_decompose(spec, &stage_predicate(side, k))?;
        let alpha_exact = mu.mass_of_exact(&a_k)?;
        let mut residual = alpha_exact;
        let mut exact = alpha_exact.is_exact();
        let mut branches = Vec::new();
        for j in side.branches(spec, k) {
            let set = cylinder_decompose(spec, &branch_predicate(k, j))?;
            let m = mu.mass_of_exact(&set)?;
            exact &= m.is_exact();
            residual -= m;
            let alpha = m.value();
            let threshold = p_threshold(spec, k, j);
            branches.push(BranchMass { j, alpha, threshold, within_threshold: alpha <= threshold });
        }
        exact &= residual.is_exact();
        stages.push(StageMass {
            k,
            alpha: alpha_exact.value(),
            in_p: branches.iter().all(|b| b.within_threshold),
            branches,
            residual: residual.value(),
            exact,
        });
    }
    Ok(StageMasses { side, stages })
}

/// `lambda{f = infinity}` is at most `lambda(some block j >= k is zero)`, which
/// is at most `sum_{j >= k} 2^{-m_j}`. At finite `K` both sides are computed
/// exactly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InfiniteStageBound {
    pub from_stage: usize,
    /// `sum_{j=k}^{K} 2^{-m_j}`.
    pub union_bound: f64,
    /// Lebesgue measure of the depth-`n` cells with a zero block at stage
    /// `>= k`.
    pub exact_mass: f64,
    pub holds: bool,
}

pub fn mass_of_f_infinite_bound(spec: &DigitBlockSpec, from_stage: usize) -> Result<InfiniteStageBound> {
    if from_stage < 1 || from_stage > spec.stage_count() {
        return Err(crate::Error::InvalidArgument(format!(
            "stage {from_stage} is outside 1..={}",
            spec.stage_count()
        )));
    }
    let mut bound = ExactSum::new();
    for j in from_stage..=spec.stage_count() {
        bound.add((-(spec.m_k(j) as f64)).exp2());
    }
    let set = cylinder_decompose(spec, &Predicate::ZeroBlockFrom(from_stage))?;
    let mut mass = ExactSum::new();
    mass.add_scaled(1.0, set.cell_count(), spec.depth());
    let holds = matches!(mass.exact_cmp(&bound), Some(std::cmp::Ordering::Less | std::cmp::Ordering::Equal));
    Ok(InfiniteStageBound { from_stage, union_bound: bound.value(), exact_mass: mass.value(), holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::spec::validate_parameters;

    #[test]
    fn threshold_instance() {
        let spec = DigitBlockSpec::default_spec();
        assert_eq!(p_threshold(&spec, 1, 2), 1.0 / 48.0);
    }

    #[test]
    fn union_bound_three_stages() {
        let spec = validate_parameters(0.8, 0.3, &[4, 9, 13]).unwrap();
        assert_eq!(spec.m(), &[2, 3, 4]);
        let b = mass_of_f_infinite_bound(&spec, 1).unwrap();
        assert_eq!(b.union_bound, 0.4375);
        assert_eq!(b.exact_mass, 0.384765625);
        assert!(b.holds);
        let last = mass_of_f_infinite_bound(&spec, 3).unwrap();
        assert_eq!(last.exact_mass, last.union_bound);
    }
}
