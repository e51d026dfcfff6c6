//! Experiment driver behind the `lab` binary.
//!
//! Each `cmd_*` function takes a config, writes its artifacts into
//! `out_dir` and returns a [`Run`] whose [`Outcome`] maps onto the exit code:
//! 0 when every asserted inequality holds, 1 on a violation, 2 when the
//! result is inconclusive. CSV files open with `#` comment lines and JSON
//! files with a `header` object recording the command and its parameters.
//! Nothing time- or machine-dependent is written, so reruns are
//! byte-identical.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cantor::CantorMeasure;
use crate::construction::{
    block_patterns, candidate_measure, cylinder_decompose, dichotomy, mass_of_f_infinite_bound, pattern_lebesgue,
    stage_predicate, Branch, Candidate, DichotomyReport, DigitBlockSpec, InfiniteStageBound, Predicate,
    Side, StageMasses,
};
use crate::fourier::{estimate_decay, estimate_decay_dyadic, extended_float, DecayReport, FrequencyGrid};
use crate::lemma::{default_pulse_terms, infsup_lower_bound, minimize_sup_transform_with, pulse_sum_bound, DEFAULT_ROTATIONS};
use crate::measure::{AtomicMeasure, DyadicMeasure};
use crate::oracle::{self, inclusion_exclusion, OracleCheck, OracleConfig, StageMassRow};
use crate::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Stage masses are also checked against a digit-string enumeration up to
/// this depth.
pub const ENUMERATION_DEPTH: u32 = 20;

/// Required gap between the decay estimates of `A u B` and the best
/// candidate on `A`.
pub const NONSTABILITY_MARGIN: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Violation,
    Inconclusive,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Violation => 1,
            Outcome::Inconclusive => 2,
        }
    }

    /// Violation beats inconclusive beats pass.
    pub fn and(self, other: Outcome) -> Outcome {
        use Outcome::*;
        match (self, other) {
            (Violation, _) | (_, Violation) => Violation,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }

    fn from_bool(ok: bool) -> Outcome {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Violation
        }
    }
}

/// What a command did: its verdict, a short human-readable report and the
/// files it wrote.
#[derive(Clone, Debug)]
pub struct Run {
    pub outcome: Outcome,
    pub report: String,
    pub files: Vec<PathBuf>,
}

/// Caps the global rayon pool at `LAB_THREADS` when set.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("LAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("LAB_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(Error::InvalidArgument("LAB_THREADS must be at least 1".into()));
        }
        // A pool built earlier in the process wins; that is fine for tests.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn header(command: &str, params: Value) -> Value {
    json!({ "tool": "fourier-lab", "version": VERSION, "command": command, "params": params })
}

fn write_csv<T: Serialize>(path: &Path, header: &Value, rows: &[T]) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "# fourier-lab {VERSION}")?;
    writeln!(file, "# command: {}", header["command"].as_str().unwrap_or_default())?;
    writeln!(file, "# params: {}", header["params"])?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, header: &Value, body: Value) -> Result<()> {
    let mut doc = serde_json::Map::new();
    doc.insert("header".into(), header.clone());
    if let Value::Object(fields) = body {
        doc.extend(fields);
    } else {
        doc.insert("data".into(), body);
    }
    let mut file = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut file, &Value::Object(doc))?;
    writeln!(file)?;
    file.flush()?;
    Ok(())
}

// ---------------------------------------------------------------- lemma

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LemmaConfig {
    pub eps: Vec<f64>,
    pub grid: usize,
    pub j_max: usize,
    pub rotations: usize,
    pub out_dir: PathBuf,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig { eps: vec![0.25, 0.5, 1.0], grid: 256, j_max: 256, rotations: DEFAULT_ROTATIONS, out_dir: ".".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaRow {
    pub epsilon: f64,
    pub paper_bound: f64,
    pub eps_over_5: f64,
    /// Raw LP value over rotated real parts.
    pub minimax_value: f64,
    pub slack: f64,
    pub pulse_sum: f64,
    pub pulse_bound: f64,
    /// `minimax_value / cos(pi / R)`.
    pub corrected_value: f64,
    pub true_sup: f64,
    pub j_star: u64,
    pub pulse_terms: usize,
    pub iterations: usize,
    pub holds: bool,
}

pub fn lemma_rows(cfg: &LemmaConfig) -> Result<Vec<LemmaRow>> {
    cfg.eps
        .iter()
        .map(|&eps| {
            let r = minimize_sup_transform_with(eps, cfg.grid, cfg.j_max, cfg.rotations)?;
            let terms = default_pulse_terms(eps);
            let p = pulse_sum_bound(eps, terms)?;
            let paper_bound = infsup_lower_bound(eps);
            Ok(LemmaRow {
                epsilon: eps,
                paper_bound,
                eps_over_5: eps / 5.0,
                minimax_value: r.optimal_value,
                slack: r.slack,
                pulse_sum: p.numeric_sum,
                pulse_bound: p.bound,
                corrected_value: r.corrected_value,
                true_sup: r.true_sup,
                j_star: r.j_star,
                pulse_terms: terms,
                iterations: r.iterations,
                holds: r.corrected_value + r.slack >= paper_bound && p.numeric_sum <= p.bound,
            })
        })
        .collect()
}

/// Writes `lemma.csv`. Passes iff for every `eps` the corrected minimax value
/// plus slack reaches `pi eps / (8 + 2 pi eps)` and the pulse sum stays
/// below its bound. An empty `eps` list does nothing.
pub fn cmd_lemma(cfg: &LemmaConfig) -> Result<Run> {
    if cfg.eps.is_empty() {
        return Ok(Run { outcome: Outcome::Pass, report: "no epsilon values given\n".into(), files: vec![] });
    }
    let rows = lemma_rows(cfg)?;
    let h = header("lemma", json!({ "eps": cfg.eps, "grid": cfg.grid, "jmax": cfg.j_max, "rotations": cfg.rotations }));
    std::fs::create_dir_all(&cfg.out_dir)?;
    let path = cfg.out_dir.join("lemma.csv");
    write_csv(&path, &h, &rows)?;
    let mut report = String::new();
    for r in &rows {
        let _ = writeln!(
            report,
            "eps {:<6} bound {:.6}  minimax {:.6}  corrected+slack {:.6}  pulse sum {:.6} <= {:.6}  {}",
            r.epsilon,
            r.paper_bound,
            r.minimax_value,
            r.corrected_value + r.slack,
            r.pulse_sum,
            r.pulse_bound,
            if r.holds { "ok" } else { "VIOLATED" }
        );
    }
    Ok(Run { outcome: Outcome::from_bool(rows.iter().all(|r| r.holds)), report, files: vec![path] })
}

// ------------------------------------------------------------ construct

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecSource {
    Default,
    File(PathBuf),
}

impl SpecSource {
    pub fn load(&self) -> Result<DigitBlockSpec> {
        match self {
            SpecSource::Default => Ok(DigitBlockSpec::default_spec()),
            SpecSource::File(p) => DigitBlockSpec::load(p),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstructConfig {
    pub spec: SpecSource,
    pub side: Side,
    pub oracle: bool,
    /// Largest `r` scanned for a witness frequency `2^{l_k} r`.
    pub r_max: u64,
    pub out_dir: PathBuf,
}

impl Default for ConstructConfig {
    fn default() -> Self {
        ConstructConfig { spec: SpecSource::Default, side: Side::A, oracle: false, r_max: 256, out_dir: ".".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRow {
    pub k: usize,
    pub j: usize,
    pub alpha: f64,
    pub threshold: f64,
    #[serde(rename = "in_P")]
    pub in_p: bool,
    /// `2^{s l_k / 2 - m_k} ((1 - alpha_k) / 5 - 1/6)` when `k` is in `P`.
    pub witness_bound: Option<f64>,
    /// `|I|^{-s} (alpha_k^j)^2 / N` when `alpha_k^j` exceeds the threshold.
    pub energy_bound: Option<f64>,
    pub alpha_k: f64,
    pub residual: f64,
    pub witness_sup: Option<f64>,
    pub witness_certified: Option<bool>,
    pub energy: f64,
    pub energy_dominates: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstructionCheck {
    pub name: &'static str,
    pub outcome: Outcome,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstructionSummary {
    pub side: Side,
    pub candidate: String,
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub lambda_sum: f64,
    /// `lambda(A) + lambda(B) = 1` as a cell count.
    pub partition_exact: bool,
    pub infinite_stage_bounds: Vec<InfiniteStageBound>,
    pub energy: f64,
    pub branches: Vec<(usize, Option<Branch>)>,
    pub checks: Vec<ConstructionCheck>,
    pub outcome: Outcome,
}

pub struct Construction {
    pub spec: DigitBlockSpec,
    pub rows: Vec<StageRow>,
    pub dichotomy: DichotomyReport,
    pub summary: ConstructionSummary,
}

pub fn stage_rows(report: &DichotomyReport) -> Vec<StageRow> {
    let mut rows = Vec::new();
    for (st, mass) in report.stages.iter().zip(&report.masses.stages) {
        for (b, e) in mass.branches.iter().zip(&st.energy) {
            rows.push(StageRow {
                k: st.k,
                j: b.j,
                alpha: b.alpha,
                threshold: b.threshold,
                in_p: st.in_p,
                witness_bound: st.witness.as_ref().map(|w| w.paper_bound),
                energy_bound: e.violates_threshold.then_some(e.cell_bound),
                alpha_k: mass.alpha,
                residual: mass.residual,
                witness_sup: st.witness.as_ref().map(|w| w.nu_sup),
                witness_certified: st.witness.as_ref().map(|w| w.certified),
                energy: e.energy,
                energy_dominates: e.dominated,
            });
        }
    }
    rows
}

/// `alpha_k` and `alpha_k^j` of normalised Lebesgue measure on one side,
/// from block zero-patterns alone. Digit blocks are independent under
/// Lebesgue measure, so each pattern has mass `prod 2^{-m}` or
/// `prod (1 - 2^{-m})`.
pub fn pattern_stage_masses(spec: &DigitBlockSpec, side: Side) -> Vec<StageMassRow> {
    let side_mass: f64 = block_patterns(spec, &side.predicate()).iter().map(|z| pattern_lebesgue(spec, z)).sum();
    side.stages(spec)
        .into_iter()
        .map(|k| {
            let stage: f64 = block_patterns(spec, &stage_predicate(side, k)).iter().map(|z| pattern_lebesgue(spec, z)).sum();
            let branches = side
                .branches(spec, k)
                .into_iter()
                .map(|j| {
                    let p = Predicate::BlockZero(k).and(Predicate::FEquals(j));
                    (j, block_patterns(spec, &p).iter().map(|z| pattern_lebesgue(spec, z)).sum::<f64>() / side_mass)
                })
                .collect();
            (k, stage / side_mass, branches)
        })
        .collect()
}

fn oracle_checks(spec: &DigitBlockSpec, side: Side, masses: &StageMasses) -> Result<Vec<ConstructionCheck>> {
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    for ((k, a, branches), st) in pattern_stage_masses(spec, side).into_iter().zip(&masses.stages) {
        debug_assert_eq!(k, st.k);
        worst = worst.max((a - st.alpha).abs());
        for ((_, b), bm) in branches.iter().zip(&st.branches) {
            worst = worst.max((b - bm.alpha).abs());
        }
    }
    out.push(ConstructionCheck {
        name: "stage-masses-vs-block-patterns",
        outcome: Outcome::from_bool(worst < 1e-12),
        detail: format!("max deviation {worst:e}"),
    });
    let mut worst = 0.0f64;
    for ((_, a, branches), st) in oracle::block_digit_enumeration(spec, side)?.into_iter().zip(&masses.stages) {
        worst = worst.max((a - st.alpha).abs());
        for ((_, b), bm) in branches.iter().zip(&st.branches) {
            worst = worst.max((b - bm.alpha).abs());
        }
    }
    out.push(ConstructionCheck {
        name: "stage-masses-vs-block-digit-enumeration",
        outcome: Outcome::from_bool(worst < 1e-12),
        detail: format!("max deviation {worst:e} over 2^{} block digit strings", spec.m().iter().sum::<u32>()),
    });
    if side == Side::A && spec.depth() <= ENUMERATION_DEPTH {
        let (ok, detail) = oracle::stage_mass_enumeration(spec)?;
        out.push(ConstructionCheck { name: "stage-masses-vs-enumeration", outcome: Outcome::from_bool(ok), detail });
    } else {
        out.push(ConstructionCheck {
            name: "stage-masses-vs-enumeration",
            outcome: Outcome::Pass,
            detail: format!("skipped: full enumeration runs for side A up to depth {ENUMERATION_DEPTH}, spec has depth {}", spec.depth()),
        });
    }
    let mut ok = true;
    let mut detail = String::new();
    for k in 1..=spec.stage_count() {
        let b = mass_of_f_infinite_bound(spec, k)?;
        let ie = inclusion_exclusion(spec.m(), k);
        ok &= (b.exact_mass - ie).abs() <= 1e-15;
        let _ = write!(detail, "k={k}: {} vs {ie}; ", b.exact_mass);
    }
    out.push(ConstructionCheck {
        name: "zero-block-mass-vs-inclusion-exclusion",
        outcome: Outcome::from_bool(ok),
        detail,
    });
    Ok(out)
}

/// The construction at one spec: sets, stage masses for normalised Lebesgue
/// measure on `cfg.side`, both branches of the dichotomy at every stage.
pub fn construct(cfg: &ConstructConfig) -> Result<Construction> {
    let spec = cfg.spec.load()?;
    let a = cylinder_decompose(&spec, &Predicate::FEven)?;
    let b = cylinder_decompose(&spec, &Predicate::FOdd)?;
    let partition_exact = a.cell_count() + b.cell_count() == 1u64 << spec.depth() && a.is_disjoint_from(&b);
    let infinite_stage_bounds =
        (1..=spec.stage_count()).map(|k| mass_of_f_infinite_bound(&spec, k)).collect::<Result<Vec<_>>>()?;

    let candidate = Candidate::Side(cfg.side);
    let mu = candidate_measure(&spec, candidate)?;
    let report = dichotomy(&mu, &spec, cfg.side, cfg.r_max)?;
    let rows = stage_rows(&report);

    let mut checks = vec![
        ConstructionCheck {
            name: "partition",
            outcome: Outcome::from_bool(partition_exact),
            detail: format!("{} + {} cells of {}", a.cell_count(), b.cell_count(), 1u64 << spec.depth()),
        },
        ConstructionCheck {
            name: "stage-bookkeeping",
            outcome: Outcome::from_bool(report.masses.stages.iter().all(|s| s.exact && s.residual == 0.0)),
            detail: "alpha_k = sum_j alpha_k^j + residual, summed exactly".into(),
        },
        ConstructionCheck {
            name: "zero-block-union-bound",
            outcome: Outcome::from_bool(infinite_stage_bounds.iter().all(|b| b.holds)),
            detail: infinite_stage_bounds
                .iter()
                .map(|b| format!("k={}: {} <= {}", b.from_stage, b.exact_mass, b.union_bound))
                .collect::<Vec<_>>()
                .join("; "),
        },
        ConstructionCheck {
            name: "one-branch-per-stage",
            outcome: Outcome::from_bool(report.every_stage_fires_once()),
            detail: report.stages.iter().map(|s| format!("k={}: {:?}", s.k, s.branch)).collect::<Vec<_>>().join("; "),
        },
        ConstructionCheck {
            name: "energy-dominates-cell-bound",
            outcome: Outcome::from_bool(report.energy_dominates()),
            detail: format!("I_s = {}", report.energy),
        },
    ];
    let uncertified: Vec<usize> =
        report.stages.iter().filter_map(|s| s.witness.as_ref()).filter(|w| !w.certified).map(|w| w.k).collect();
    checks.push(ConstructionCheck {
        name: "witness-certified",
        outcome: if uncertified.is_empty() { Outcome::Pass } else { Outcome::Inconclusive },
        detail: if uncertified.is_empty() {
            "every witness scan reached its target".into()
        } else {
            format!("r_max = {} exhausted at stages {uncertified:?}", cfg.r_max)
        },
    });
    if cfg.oracle {
        checks.extend(oracle_checks(&spec, cfg.side, &report.masses)?);
    }
    let outcome = checks.iter().fold(Outcome::Pass, |acc, c| acc.and(c.outcome));
    let summary = ConstructionSummary {
        side: cfg.side,
        candidate: candidate.label(),
        lambda_a: a.lebesgue_mass(),
        lambda_b: b.lebesgue_mass(),
        lambda_sum: a.lebesgue_mass() + b.lebesgue_mass(),
        partition_exact,
        infinite_stage_bounds,
        energy: report.energy,
        branches: report.stages.iter().map(|s| (s.k, s.branch)).collect(),
        checks,
        outcome,
    };
    Ok(Construction { spec, rows, dichotomy: report, summary })
}

/// Sets listed in `sets.json`: `A`, `B`, every `A_k` and `A_k^j`. Each gets
/// its block zero-patterns and Lebesgue measure; the explicit dyadic runs
/// are included only when there are at most this many.
const SET_RUNS_LIMIT: usize = 4096;

fn sets_json(spec: &DigitBlockSpec, side: Side) -> Result<Value> {
    let mut named: Vec<(String, Predicate)> =
        vec![("A".into(), Predicate::FEven), ("B".into(), Predicate::FOdd)];
    let name = if side == Side::A { "A" } else { "B" };
    for k in side.stages(spec) {
        named.push((format!("{name}_{k}"), stage_predicate(side, k)));
        for j in side.branches(spec, k) {
            named.push((format!("{name}_{k}^{j}"), Predicate::BlockZero(k).and(Predicate::FEquals(j))));
        }
    }
    let mut sets = Vec::new();
    for (label, pred) in named {
        let set = cylinder_decompose(spec, &pred)?;
        let patterns: Vec<String> = block_patterns(spec, &pred)
            .iter()
            .map(|z| z.iter().map(|&b| if b { '0' } else { '*' }).collect())
            .collect();
        let mut entry = json!({
            "name": label,
            "predicate": pred,
            "block_patterns": patterns,
            "lebesgue": set.lebesgue_mass(),
            "cells": set.cell_count(),
            "run_count": set.runs().len(),
        });
        if set.runs().len() <= SET_RUNS_LIMIT {
            entry["cylinder"] = serde_json::to_value(&set)?;
        }
        sets.push(entry);
    }
    Ok(json!({
        "depth": spec.depth(),
        "pattern_legend": "one character per stage: 0 = block all zero, * = block not all zero",
        "sets": sets,
    }))
}

/// Writes `stages.csv`, `sets.json` and `summary.json`.
pub fn cmd_construct(cfg: &ConstructConfig) -> Result<Run> {
    let c = construct(cfg)?;
    let h = header(
        "construct",
        json!({ "spec": c.spec.to_file(), "m": c.spec.m(), "side": cfg.side, "oracle": cfg.oracle, "r_max": cfg.r_max }),
    );
    std::fs::create_dir_all(&cfg.out_dir)?;
    let stages = cfg.out_dir.join("stages.csv");
    let sets = cfg.out_dir.join("sets.json");
    let summary = cfg.out_dir.join("summary.json");
    write_csv(&stages, &h, &c.rows)?;
    write_json(&sets, &h, sets_json(&c.spec, cfg.side)?)?;
    write_json(
        &summary,
        &h,
        json!({ "summary": c.summary, "ratios": c.spec.ratio_table(), "dichotomy": c.dichotomy }),
    )?;
    let mut report = format!(
        "lambda(A) = {}, lambda(B) = {}, sum = {}\n",
        c.summary.lambda_a, c.summary.lambda_b, c.summary.lambda_sum
    );
    for ch in &c.summary.checks {
        let _ = writeln!(report, "{:<40} {:?}  {}", ch.name, ch.outcome, ch.detail);
    }
    Ok(Run { outcome: c.summary.outcome, report, files: vec![stages, sets, summary] })
}

// ---------------------------------------------------------------- decay

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    Lebesgue,
    Cantor,
    ConstructionA,
    ConstructionB,
    #[serde(rename = "construction-AuB")]
    ConstructionAuB,
}

impl Builtin {
    pub const ALL: [Builtin; 5] =
        [Builtin::Lebesgue, Builtin::Cantor, Builtin::ConstructionA, Builtin::ConstructionB, Builtin::ConstructionAuB];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Lebesgue => "lebesgue",
            Builtin::Cantor => "cantor",
            Builtin::ConstructionA => "construction-A",
            Builtin::ConstructionB => "construction-B",
            Builtin::ConstructionAuB => "construction-AuB",
        }
    }

    pub fn parse(s: &str) -> Result<Builtin> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown builtin {s:?}")))
    }

    /// Integer frequencies for the Cantor measure, where `3^k` is an
    /// integer; half-integers elsewhere, since Lebesgue measure on a union
    /// of dyadic intervals vanishes at most integers.
    pub fn default_grid(self) -> FrequencyGrid {
        match self {
            Builtin::Cantor => FrequencyGrid::Integer,
            _ => FrequencyGrid::HalfInteger,
        }
    }
}

/// Measure file contents: a dyadic measure (`{"depth", "weights" | "blocks"}`)
/// or point masses (`{"atoms": [[x, m], ...], "support": [a, b]}`).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureFile {
    Dyadic(DyadicMeasure),
    Atomic(AtomicMeasure),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecaySource {
    Builtin(Builtin),
    File(PathBuf),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayConfig {
    pub source: DecaySource,
    pub j_max: u64,
    /// Defaults per builtin; integer for measure files.
    pub grid: Option<FrequencyGrid>,
    pub out_dir: PathBuf,
}

/// The comparison between `A u B` and the candidates on `A` alone.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NonStability {
    pub j_max: u64,
    pub grid: FrequencyGrid,
    pub union_estimate: f64,
    #[serde(with = "extended_float")]
    pub union_exponent: f64,
    pub best_candidate: String,
    pub best_estimate: f64,
    #[serde(with = "extended_float")]
    pub best_exponent: f64,
    /// `2 beta` without the cap at 1, for `A u B` and the best candidate.
    #[serde(with = "extended_float")]
    pub union_uncapped: f64,
    #[serde(with = "extended_float")]
    pub best_uncapped: f64,
    pub candidates: Vec<(String, f64)>,
    /// Capped estimates differ by at least the margin.
    pub margin_met: bool,
    /// Uncapped union rate exceeds every candidate's.
    pub direction_holds: bool,
    pub outcome: Outcome,
}

/// Decay of Lebesgue measure on `A u B` against every natural candidate on
/// `A` at the default spec. The capped estimates saturate at 1 once
/// `2 beta >= 1`, so the direction is judged on `2 beta` itself.
pub fn nonstability(j_max: u64, grid: FrequencyGrid) -> Result<NonStability> {
    let spec = DigitBlockSpec::default_spec();
    let union = estimate_decay_dyadic(&candidate_measure(&spec, Candidate::Union)?, j_max, None, grid)?;
    let mut candidates = Vec::new();
    let mut best: Option<(String, DecayReport)> = None;
    for c in Candidate::on_side(&spec, Side::A) {
        let r = estimate_decay_dyadic(&candidate_measure(&spec, c)?, j_max, None, grid)?;
        candidates.push((c.label(), 2.0 * r.fitted_exponent));
        if best.as_ref().is_none_or(|(_, b)| r.fitted_exponent > b.fitted_exponent) {
            best = Some((c.label(), r));
        }
    }
    let (best_candidate, best) = best.expect("at least one candidate");
    let margin_met = union.fourier_dim_estimate >= best.fourier_dim_estimate + NONSTABILITY_MARGIN;
    let direction_holds = union.fitted_exponent > best.fitted_exponent;
    let outcome = match (margin_met, direction_holds) {
        (true, true) => Outcome::Pass,
        (_, false) => Outcome::Violation,
        (false, true) => Outcome::Inconclusive,
    };
    Ok(NonStability {
        j_max,
        grid,
        union_estimate: union.fourier_dim_estimate,
        union_exponent: union.fitted_exponent,
        best_candidate,
        best_estimate: best.fourier_dim_estimate,
        best_exponent: best.fitted_exponent,
        union_uncapped: 2.0 * union.fitted_exponent,
        best_uncapped: 2.0 * best.fitted_exponent,
        candidates,
        margin_met,
        direction_holds,
        outcome,
    })
}

pub fn builtin_decay(b: Builtin, j_max: u64, grid: FrequencyGrid) -> Result<DecayReport> {
    let spec = DigitBlockSpec::default_spec;
    match b {
        Builtin::Lebesgue => estimate_decay(&DyadicMeasure::lebesgue(0)?, j_max, None, grid),
        Builtin::Cantor => estimate_decay(&CantorMeasure::prefractal(12), j_max, None, grid),
        Builtin::ConstructionA => {
            estimate_decay_dyadic(&candidate_measure(&spec(), Candidate::Side(Side::A))?, j_max, None, grid)
        }
        Builtin::ConstructionB => {
            estimate_decay_dyadic(&candidate_measure(&spec(), Candidate::Side(Side::B))?, j_max, None, grid)
        }
        Builtin::ConstructionAuB => estimate_decay_dyadic(&candidate_measure(&spec(), Candidate::Union)?, j_max, None, grid),
    }
}

fn file_decay(path: &Path, j_max: u64, grid: FrequencyGrid) -> Result<DecayReport> {
    let text = std::fs::read_to_string(path)?;
    match serde_json::from_str::<MeasureFile>(&text)? {
        MeasureFile::Dyadic(mu) => estimate_decay_dyadic(&mu, j_max, None, grid),
        MeasureFile::Atomic(mu) => {
            if mu.total_mass() <= 0.0 {
                return Err(Error::InvalidArgument("measure file has no mass".into()));
            }
            estimate_decay(&mu, j_max, None, grid)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
struct DecayRow {
    band_lo: u64,
    band_hi: u64,
    sup_abs: f64,
    j_star: u64,
}

/// Writes `decay.csv` (one row per band) and `decay.json`. Builtins with a
/// known answer are checked: Cantor below 0.05, Lebesgue above 0.9, and
/// `construction-AuB` against every candidate on `A`.
pub fn cmd_decay(cfg: &DecayConfig) -> Result<Run> {
    let (label, grid, report) = match &cfg.source {
        DecaySource::Builtin(b) => {
            let grid = cfg.grid.unwrap_or(b.default_grid());
            (b.name().to_string(), grid, builtin_decay(*b, cfg.j_max, grid)?)
        }
        DecaySource::File(p) => {
            let grid = cfg.grid.unwrap_or(FrequencyGrid::Integer);
            (p.display().to_string(), grid, file_decay(p, cfg.j_max, grid)?)
        }
    };
    let mut outcome = Outcome::Pass;
    let mut report_text =
        format!("{label}: beta = {}, estimate = {} over {} bands\n", report.fitted_exponent, report.fourier_dim_estimate, report.bands_fitted);
    let mut comparison = None;
    match cfg.source {
        DecaySource::Builtin(Builtin::Cantor) => outcome = Outcome::from_bool(report.fourier_dim_estimate < 0.05),
        DecaySource::Builtin(Builtin::Lebesgue) => outcome = Outcome::from_bool(report.fourier_dim_estimate > 0.9),
        DecaySource::Builtin(Builtin::ConstructionAuB) => {
            let ns = nonstability(cfg.j_max, grid)?;
            let _ = writeln!(
                report_text,
                "best candidate on A: {} with 2 beta = {}; A u B has 2 beta = {}; margin met: {}",
                ns.best_candidate, ns.best_uncapped, ns.union_uncapped, ns.margin_met
            );
            outcome = ns.outcome;
            comparison = Some(ns);
        }
        _ => {}
    }
    if report.aliased {
        let _ = writeln!(report_text, "note: bands above 2^depth see the shape of single cells, not the measure's structure");
    }
    let h = header("decay", json!({ "source": label, "jmax": cfg.j_max, "grid": grid }));
    std::fs::create_dir_all(&cfg.out_dir)?;
    let csv_path = cfg.out_dir.join("decay.csv");
    let json_path = cfg.out_dir.join("decay.json");
    let rows: Vec<DecayRow> = report
        .windows
        .iter()
        .map(|w| DecayRow { band_lo: w.band_lo, band_hi: w.band_hi, sup_abs: w.sup_abs, j_star: w.j_star })
        .collect();
    write_csv(&csv_path, &h, &rows)?;
    write_json(&json_path, &h, json!({ "measure": label, "report": report, "comparison": comparison, "outcome": outcome }))?;
    Ok(Run { outcome, report: report_text, files: vec![csv_path, json_path] })
}

// --------------------------------------------------------------- oracle

/// Runs the oracle suite, printing one line per check, and writes
/// `oracle.json` when `out_dir` is given.
pub fn cmd_oracle(config: &OracleConfig, out_dir: Option<&Path>) -> Result<Run> {
    let checks: Vec<OracleCheck> = oracle::run_suite(config);
    let mut report = String::new();
    for c in &checks {
        let _ = writeln!(report, "{} {:<40} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    let _ = writeln!(report, "{passed}/{} checks passed", checks.len());
    let mut files = Vec::new();
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("oracle.json");
        let h = header("oracle", json!({ "seed": config.seed }));
        write_json(&path, &h, json!({ "checks": checks }))?;
        files.push(path);
    }
    Ok(Run { outcome: Outcome::from_bool(passed == checks.len()), report, files })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_precedence() {
        assert_eq!(Outcome::Pass.and(Outcome::Inconclusive), Outcome::Inconclusive);
        assert_eq!(Outcome::Inconclusive.and(Outcome::Violation), Outcome::Violation);
        assert_eq!(Outcome::Violation.exit_code(), 1);
    }

    #[test]
    fn builtin_names_round_trip() {
        for b in Builtin::ALL {
            assert_eq!(Builtin::parse(b.name()).unwrap(), b);
        }
        assert!(Builtin::parse("sierpinski").is_err());
    }

    #[test]
    fn pattern_masses_default_spec() {
        let spec = DigitBlockSpec::default_spec();
        let rows = pattern_stage_masses(&spec, Side::A);
        assert_eq!(rows.len(), 1);
        let (k, alpha, branches) = &rows[0];
        assert_eq!(*k, 1);
        // A_1 = {block 1 zero, block 2 zero}: 2^{-8} over 193/256.
        assert!((alpha - 1.0 / 193.0).abs() < 1e-15);
        assert_eq!(branches[0].0, 2);
    }
}
