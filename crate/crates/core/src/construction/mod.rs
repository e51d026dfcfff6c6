//! Digit-block sets `A = {f even}` and `B = {f odd}` at finite depth.
//!
//! For `x = 0.x_1 x_2 ...` in binary, block `k` is the digits
//! `l_k + 1 ..= l_k + m_k` and `f(x)` is the last stage whose block is all
//! zero (0 if none). Each of `A` and `B` supports no measure with fast
//! Fourier decay, while `A` and `B` together carry Lebesgue measure. At a
//! finite depth every quantity in that argument is a finite sum over dyadic
//! cells, computed here exactly where possible.
//!
//! ```
//! use fourier_lab::construction::{cylinder_decompose, DigitBlockSpec, Predicate};
//!
//! let spec = DigitBlockSpec::default_spec();
//! let a = cylinder_decompose(&spec, &Predicate::FEven).unwrap();
//! assert_eq!(a.lebesgue_mass(), 193.0 / 256.0);
//! ```

mod branches;
mod sets;
mod spec;
mod stages;

pub use branches::{
    dichotomy, energy_branch_bound, energy_branch_with_energy, witness_frequency_bound, zero_block_cover, Branch,
    DichotomyReport, DichotomyStage, EnergyBranchReport, WitnessReport,
};
pub use sets::{
    block_mask, block_patterns, branch_predicate, classify_f, classify_index, cylinder_decompose, f_of_blocks,
    pattern_lebesgue, stage_predicate, zero_blocks, Predicate, Side,
};
pub use spec::{parameter_window, validate_parameters, DigitBlockSpec, RatioRow, SpecFile, SpecViolation};
pub use stages::{mass_of_f_infinite_bound, p_threshold, stage_masses, BranchMass, InfiniteStageBound, StageMass, StageMasses};

use serde::{Deserialize, Serialize};

use crate::measure::DyadicMeasure;
use crate::Result;

/// Natural probability measures for experiments on the construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Candidate {
    /// Normalised Lebesgue measure on `A` or `B`.
    Side(Side),
    /// Normalised Lebesgue measure on `{f = j}`.
    Stage(usize),
    /// Lebesgue measure on `A u B = [0, 1]`.
    Union,
}

impl Candidate {
    pub fn label(&self) -> String {
        match self {
            Candidate::Side(Side::A) => "lebesgue-on-A".into(),
            Candidate::Side(Side::B) => "lebesgue-on-B".into(),
            Candidate::Stage(j) => format!("lebesgue-on-f={j}"),
            Candidate::Union => "lebesgue-on-AuB".into(),
        }
    }

    /// Candidates supported on one side: the whole side and each stage of
    /// its parity.
    pub fn on_side(spec: &DigitBlockSpec, side: Side) -> Vec<Candidate> {
        let mut out = vec![Candidate::Side(side)];
        out.extend((0..=spec.stage_count()).filter(|j| j % 2 == side.parity()).map(Candidate::Stage));
        out
    }
}

pub fn candidate_measure(spec: &DigitBlockSpec, candidate: Candidate) -> Result<DyadicMeasure> {
    let pred = match candidate {
        Candidate::Side(side) => side.predicate(),
        Candidate::Stage(j) => Predicate::FEquals(j),
        Candidate::Union => return DyadicMeasure::lebesgue(spec.depth()),
    };
    DyadicMeasure::lebesgue_on(&cylinder_decompose(spec, &pred)?).normalize()
}
