use serde::{Deserialize, Serialize};

use super::sets::{branch_predicate, cylinder_decompose, stage_predicate, Side};
use super::spec::DigitBlockSpec;
use super::stages::{p_threshold, stage_masses, StageMasses};
use crate::cylinder::CylinderSet;
use crate::energy::{dominates_with_energy, energy_cell_lower_bound, riesz_energy};
use crate::fourier::{batch_integer_transform, SpectralMeasure};
use crate::lemma::{infsup_lower_bound, truncation_slack};
use crate::measure::DyadicMeasure;
use crate::{Error, Result};

/// Frequencies `r <= this` are used to check `nu_k^(r) = mu_k^(2^{l_k} r)`.
const IDENTITY_CHECKS: u64 = 64;

/// The frequency branch at stage `k`: `mu_k = mu` restricted to the side set
/// minus `A_k`, pushed forward by `x -> 2^{l_k} x mod 1`, lives on
/// `[2^{-m_k}, 1]`, so some `|nu_k^(r)|` is large.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessReport {
    pub k: usize,
    pub l_k: u32,
    pub m_k: u32,
    /// `2^{-m_k}`.
    pub epsilon: f64,
    pub alpha_k: f64,
    /// Total mass of `nu_k`.
    pub nu_mass: f64,
    /// Mass of `nu_k` below `2^{-m_k}`.
    pub leaked_mass: f64,
    pub r_max: u64,
    pub r_star: u64,
    /// `max_{1 <= r <= r_max} |nu_k^(r)|`.
    pub nu_sup: f64,
    /// `nu_mass 2^{-m_k} / 5`.
    pub target: f64,
    /// `nu_mass pi eps / (8 + 2 pi eps)`.
    pub lemma_bound: f64,
    /// Allowance for scanning only `r <= r_max`.
    pub slack: f64,
    /// `nu_sup + slack >= target` with nothing leaked.
    pub certified: bool,
    /// `max_{r <= 64} |nu_k^(r) - mu_k^(2^{l_k} r)|`.
    pub pushforward_deviation: f64,
    /// `s l_k / 2 - m_k`.
    pub paper_exponent: f64,
    /// `2^{s l_k / 2 - m_k} ((1 - alpha_k) / 5 - 1/6)`.
    pub paper_bound: f64,
    /// `(2^{l_k} r*)^{s/2} |mu^(2^{l_k} r*)|`.
    pub direct_value: f64,
    /// `2^{s l_k / 2} (|mu_k^(2^{l_k} r*)| - alpha_k)`.
    pub triangle_lower: f64,
    pub chain_holds: bool,
}

pub fn witness_frequency_bound(
    mu: &DyadicMeasure,
    spec: &DigitBlockSpec,
    side: Side,
    k: usize,
    r_max: u64,
) -> Result<WitnessReport> {
    check_stage(spec, side, k)?;
    if r_max < 1 {
        return Err(Error::InvalidArgument("r_max must be at least 1".into()));
    }
    let (l_k, m_k, s) = (spec.l_k(k), spec.m_k(k), spec.s());
    let side_set = cylinder_decompose(spec, &side.predicate())?;
    let a_k = cylinder_decompose(spec, &stage_predicate(side, k))?;
    let alpha_k = mu.mass_of(&a_k)?;
    let mu_k = mu.restrict(&side_set.difference(&a_k))?;
    let nu = mu_k.dyadic_pushforward(l_k)?;
    let nu_mass = nu.total_mass();
    let nu_depth = nu.depth();
    let below = CylinderSet::from_runs(nu_depth, vec![(0, 1u64 << (nu_depth - m_k))])?;
    let leaked_mass = nu.mass_of(&below)?;
    let epsilon = (-(m_k as f64)).exp2();

    let values = batch_integer_transform(&nu, r_max).values;
    let (mut r_star, mut nu_sup) = (1, -1.0);
    for (r, v) in values.iter().enumerate().skip(1) {
        if v.norm() > nu_sup {
            (r_star, nu_sup) = (r as u64, v.norm());
        }
    }
    let scale = (l_k as f64).exp2();
    let pushforward_deviation = (1..=r_max.min(IDENTITY_CHECKS))
        .map(|r| (values[r as usize] - mu_k.transform(scale * r as f64)).norm())
        .fold(0.0, f64::max);

    let target = nu_mass * epsilon / 5.0;
    let slack = nu_mass * truncation_slack(epsilon, r_max as usize);
    let freq = scale * r_star as f64;
    let mu_abs = mu.transform(freq).norm();
    let mu_k_abs = mu_k.transform(freq).norm();
    let direct_value = freq.powf(s / 2.0) * mu_abs;
    let triangle_lower = (s * l_k as f64 / 2.0).exp2() * (mu_k_abs - alpha_k);
    let paper_exponent = s * l_k as f64 / 2.0 - m_k as f64;
    Ok(WitnessReport {
        k,
        l_k,
        m_k,
        epsilon,
        alpha_k,
        nu_mass,
        leaked_mass,
        r_max,
        r_star,
        nu_sup,
        target,
        lemma_bound: nu_mass * infsup_lower_bound(epsilon),
        slack,
        certified: leaked_mass == 0.0 && nu_sup + slack >= target,
        pushforward_deviation,
        paper_exponent,
        paper_bound: paper_exponent.exp2() * ((1.0 - alpha_k) / 5.0 - 1.0 / 6.0),
        direct_value,
        triangle_lower,
        chain_holds: direct_value * (1.0 + 1e-12) + 1e-15 >= triangle_lower,
    })
}

/// The energy branch at `(k, j)`: `A_k^j` is covered by `2^{l_j - m_k}`
/// cells of length `2^{-(l_j + m_j)}`, forcing `I_s(mu)` up when
/// `alpha_k^j` is large.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnergyBranchReport {
    pub k: usize,
    pub j: usize,
    pub alpha: f64,
    pub threshold: f64,
    pub violates_threshold: bool,
    /// Number of cells in the cover, counted from the two zero blocks.
    pub cover_cells: u64,
    pub cover_depth: u32,
    /// `|I|^{-s} alpha^2 / N`.
    pub cell_bound: f64,
    /// `2^{s(l_j + m_j)} alpha^2 / 2^{l_j - m_k}`, evaluated from exponents.
    pub paper_form: f64,
    pub energy: f64,
    /// `|I|^{-s} sum_p mu(I_p)^2` over the cover.
    pub square_sum_bound: f64,
    pub dominated: bool,
    /// `(s(1 + b) - 1) l_j - 2j - m_k`.
    pub paper_exponent: f64,
    /// `2^{paper_exponent} / 36`, a lower bound for `cell_bound` whenever the
    /// threshold is violated.
    pub exponent_form: f64,
    /// `s(1 + b) - 1`.
    pub linear_rate: f64,
    /// `linear_rate l_j - m_k`.
    pub simplified_exponent: f64,
    pub exponent_bound_holds: Option<bool>,
}

pub fn energy_branch_bound(mu: &DyadicMeasure, spec: &DigitBlockSpec, side: Side, k: usize, j: usize) -> Result<EnergyBranchReport> {
    let energy = riesz_energy(mu, spec.s())?.value;
    energy_branch_with_energy(mu, spec, side, k, j, energy)
}

/// [`energy_branch_bound`] with `I_s(mu)` already known.
pub fn energy_branch_with_energy(
    mu: &DyadicMeasure,
    spec: &DigitBlockSpec,
    side: Side,
    k: usize,
    j: usize,
    energy: f64,
) -> Result<EnergyBranchReport> {
    check_stage(spec, side, k)?;
    if !side.branches(spec, k).contains(&j) {
        return Err(Error::InvalidArgument(format!("stage {j} is not a branch of stage {k} on side {side:?}")));
    }
    let s = spec.s();
    let (l_j, m_j, m_k) = (spec.l_k(j), spec.m_k(j), spec.m_k(k));
    let alpha = mu.mass_of(&cylinder_decompose(spec, &branch_predicate(k, j))?)?;
    let threshold = p_threshold(spec, k, j);
    let cover_depth = l_j + m_j;
    let cover = zero_block_cover(spec, &[k, j], cover_depth)?;
    let cover_cells = cover.cell_count();
    let cell_bound = energy_cell_lower_bound(alpha, cover_cells, (-(cover_depth as f64)).exp2(), s)?;
    let paper_form = (s * cover_depth as f64 - (l_j as f64 - m_k as f64)).exp2() * alpha * alpha;
    let domination = dominates_with_energy(mu, &cover, s, energy)?;
    let linear_rate = s * (1.0 + spec.b()) - 1.0;
    let paper_exponent = linear_rate * l_j as f64 - 2.0 * j as f64 - m_k as f64;
    let exponent_form = paper_exponent.exp2() / 36.0;
    let violates_threshold = alpha > threshold;
    Ok(EnergyBranchReport {
        k,
        j,
        alpha,
        threshold,
        violates_threshold,
        cover_cells,
        cover_depth,
        cell_bound,
        paper_form,
        energy,
        square_sum_bound: domination.square_sum_bound,
        dominated: domination.holds && energy * (1.0 + 1e-12) >= cell_bound,
        paper_exponent,
        exponent_form,
        linear_rate,
        simplified_exponent: linear_rate * l_j as f64 - m_k as f64,
        exponent_bound_holds: violates_threshold.then(|| cell_bound >= exponent_form),
    })
}

/// Depth-`depth` cells whose blocks `stages` are all zero.
pub fn zero_block_cover(spec: &DigitBlockSpec, stages: &[usize], depth: u32) -> Result<CylinderSet> {
    let mut fixed = 0u64;
    for &k in stages {
        if spec.block_end(k) > depth {
            return Err(Error::InvalidArgument(format!("block {k} does not fit in depth {depth}")));
        }
        for i in spec.l_k(k) + 1..=spec.block_end(k) {
            fixed |= 1u64 << (depth - i);
        }
    }
    let free: Vec<u32> = (0..depth).filter(|b| fixed >> b & 1 == 0).collect();
    let count = 1u64 << free.len();
    let indices = (0..count).map(|t| {
        free.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | ((t >> i & 1) << b))
    });
    CylinderSet::from_indices(depth, indices)
}

fn check_stage(spec: &DigitBlockSpec, side: Side, k: usize) -> Result<()> {
    if side.stages(spec).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("stage {k} is not examined on side {side:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Witness,
    Energy,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DichotomyStage {
    pub k: usize,
    pub in_p: bool,
    pub witness: Option<WitnessReport>,
    pub energy: Vec<EnergyBranchReport>,
    pub witness_fired: bool,
    pub energy_fired: bool,
    pub branch: Option<Branch>,
}

impl DichotomyStage {
    pub fn exactly_one(&self) -> bool {
        self.witness_fired != self.energy_fired
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub side: Side,
    pub masses: StageMasses,
    pub energy: f64,
    pub stages: Vec<DichotomyStage>,
}

impl DichotomyReport {
    pub fn every_stage_fires_once(&self) -> bool {
        self.stages.iter().all(DichotomyStage::exactly_one)
    }

    pub fn energy_dominates(&self) -> bool {
        self.stages.iter().flat_map(|s| &s.energy).all(|e| e.dominated)
    }
}

/// Runs both branches at every stage: the witness scan for stages in `P`,
/// the energy bound for every `(k, j)`.
pub fn dichotomy(mu: &DyadicMeasure, spec: &DigitBlockSpec, side: Side, r_max: u64) -> Result<DichotomyReport> {
    let masses = stage_masses(mu, spec, side)?;
    let energy = riesz_energy(mu, spec.s())?.value;
    let mut stages = Vec::new();
    for st in &masses.stages {
        let witness = if st.in_p { Some(witness_frequency_bound(mu, spec, side, st.k, r_max)?) } else { None };
        let energy_reports = st
            .branches
            .iter()
            .map(|b| energy_branch_with_energy(mu, spec, side, st.k, b.j, energy))
            .collect::<Result<Vec<_>>>()?;
        let witness_fired = witness.is_some();
        let energy_fired = energy_reports.iter().any(|e| e.violates_threshold && e.cell_bound > 0.0);
        let branch = match (witness_fired, energy_fired) {
            (true, false) => Some(Branch::Witness),
            (false, true) => Some(Branch::Energy),
            _ => None,
        };
        stages.push(DichotomyStage { k: st.k, in_p: st.in_p, witness, energy: energy_reports, witness_fired, energy_fired, branch });
    }
    Ok(DichotomyReport { side, masses, energy, stages })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_cover_size() {
        let spec = DigitBlockSpec::default_spec();
        let c = zero_block_cover(&spec, &[1, 2], 26).unwrap();
        assert_eq!(c.cell_count(), 1 << 18);
        assert_eq!(c.lebesgue_mass(), (-8f64).exp2());
    }
}
