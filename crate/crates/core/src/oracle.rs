//! Independent reference computations for the crate's closed forms.
//!
//! Every check recomputes a quantity by a different route (quadrature,
//! brute-force enumeration, direct summation, exhaustive search) and
//! compares. [`run_suite`] runs them all; [`OracleConfig::sinc`] lets a test
//! swap in a broken `sinc` to confirm the kernel checks notice.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cantor::CantorMeasure;
use crate::construction::{
    candidate_measure, classify_f, classify_index, cylinder_decompose, dichotomy, mass_of_f_infinite_bound,
    stage_masses, stage_predicate, validate_parameters, witness_frequency_bound, Candidate, DigitBlockSpec, Predicate,
    Side,
};
use crate::cylinder::CylinderSet;
use crate::energy::{riesz_energy, verify_energy_dominates_bound, RieszKernel};
use crate::fourier::{
    batch_integer_transform, estimate_decay, estimate_decay_dyadic, sinc, sup_abs_transform, turn, FrequencyGrid,
    SpectralMeasure,
};
use crate::lemma::{
    duality_lower_bound, grid_points, infsup_lower_bound, minimize_sup_transform_with, pulse_sum_bound,
};
use crate::measure::{AtomicMeasure, DyadicMeasure};
use crate::quadrature::{cell_pair_kernel, integrate, unit_square_energy};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl OracleCheck {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        OracleCheck { name: name.to_string(), passed, detail }
    }

    fn from_result(name: &str, check: impl FnOnce() -> Result<(bool, String)>) -> Self {
        match check() {
            Ok((passed, detail)) => Self::new(name, passed, detail),
            Err(e) => Self::new(name, false, format!("error: {e}")),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    pub seed: u64,
    /// `sinc` used wherever a check evaluates a closed form built from it.
    pub sinc: fn(f64) -> f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { seed: 2024, sinc }
    }
}

fn random_measure(rng: &mut ChaCha8Rng, depth: u32) -> DyadicMeasure {
    let w: Vec<f64> = (0..1u64 << depth).map(|_| rng.gen::<f64>()).collect();
    DyadicMeasure::from_weights(depth, &w).expect("valid random weights")
}

/// `sum_p w_p e^{-2 pi i xi c_p} sinc(pi xi h)` with a caller-supplied `sinc`.
fn cell_transform_with(weights: &[f64], xi: f64, sinc_fn: fn(f64) -> f64) -> Complex64 {
    let h = 1.0 / weights.len() as f64;
    let env = sinc_fn(PI * xi * h);
    weights.iter().enumerate().map(|(p, &w)| turn(xi * (p as f64 + 0.5) * h) * (w * env)).sum()
}

/// `\int_a^b g(x) e^{-2 pi i xi x} dx` by quadrature of both parts.
fn fourier_quadrature(g: impl Fn(f64) -> f64 + Copy, xi: f64, a: f64, b: f64) -> Result<Complex64> {
    let re = integrate(|x| g(x) * (2.0 * PI * xi * x).cos(), a, b, 1e-14)?;
    let im = integrate(|x| -g(x) * (2.0 * PI * xi * x).sin(), a, b, 1e-14)?;
    Ok(Complex64::new(re, im))
}

fn tiny_spec() -> DigitBlockSpec {
    validate_parameters(0.9, 0.3, &[2, 6]).and_then(|s| s.with_depth(12)).expect("tiny spec is valid")
}

/// `f` from explicit digit strings, written independently of the crate.
fn naive_f(bits: &str, l: &[u32], m: &[u32]) -> u32 {
    let mut f = 0;
    for k in 0..l.len() {
        let block: String = bits.chars().skip(l[k] as usize).take(m[k] as usize).collect();
        if block == "0".repeat(m[k] as usize) {
            f = k as u32 + 1;
        }
    }
    f
}

fn naive_block_zero(bits: &str, l: u32, m: u32) -> bool {
    !bits[l as usize..(l + m) as usize].contains('1')
}

/// Measures with pairwise-distinct sets and sums of inclusion-exclusion terms
/// for independent events `{block j zero}`, `j >= k`.
pub fn inclusion_exclusion(m: &[u32], from_stage: usize) -> f64 {
    let ms = &m[from_stage - 1..];
    let mut total = 0.0;
    for mask in 1u32..1 << ms.len() {
        let bits: u32 = (0..ms.len()).filter(|i| mask >> i & 1 == 1).map(|i| ms[i]).sum();
        let sign = if mask.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * (-(bits as f64)).exp2();
    }
    total
}

/// Exhaustive minimum over the simplex (step `1/steps`) of
/// `max_{j, r} Re(e^{i theta_r} sum_q w_q e^{-2 pi i j x_q})` for three atoms,
/// with the same objective evaluated without rotations alongside.
pub fn exhaustive_three_atom_minimax(eps: f64, j_max: usize, rotations: usize, steps: usize) -> (f64, f64) {
    let xs = grid_points(eps, 3);
    let phases: Vec<[Complex64; 3]> =
        (1..=j_max).map(|j| [0, 1, 2].map(|q| turn(j as f64 * xs[q]))).collect();
    let rot: Vec<Complex64> =
        (0..rotations).map(|r| Complex64::from_polar(1.0, 2.0 * PI * r as f64 / rotations as f64)).collect();
    let (mut best_rot, mut best_abs) = (f64::INFINITY, f64::INFINITY);
    for a in 0..=steps {
        for b in 0..=steps - a {
            let w = [a as f64 / steps as f64, b as f64 / steps as f64, (steps - a - b) as f64 / steps as f64];
            let (mut v_rot, mut v_abs) = (f64::NEG_INFINITY, 0.0f64);
            for ph in &phases {
                let z = ph[0] * w[0] + ph[1] * w[1] + ph[2] * w[2];
                v_abs = v_abs.max(z.norm());
                for e in &rot {
                    v_rot = v_rot.max((e * z).re);
                }
            }
            best_rot = best_rot.min(v_rot);
            best_abs = best_abs.min(v_abs);
        }
    }
    (best_rot, best_abs)
}

pub fn run_suite(config: &OracleConfig) -> Vec<OracleCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Vec::new();
    out.extend(measure_checks(&mut rng));
    out.extend(fourier_checks(&mut rng, config.sinc));
    out.extend(energy_checks(&mut rng));
    out.extend(lemma_checks(&mut rng, config.sinc));
    out.extend(construction_checks());
    out
}

fn measure_checks(rng: &mut ChaCha8Rng) -> Vec<OracleCheck> {
    let mut out = Vec::new();
    out.push(OracleCheck::from_result(
        "restrict-stage-mass-vs-enumeration",
        || {
            let spec = tiny_spec();
            let mu = candidate_measure(&spec, Candidate::Side(Side::A))?;
            let a1 = cylinder_decompose(&spec, &stage_predicate(Side::A, 1))?;
            let got = mu.restrict(&a1)?.total_mass();
            let (l, m) = (spec.l(), spec.m());
            let (mut in_a, mut in_a1) = (0u64, 0u64);
            for p in 0..1u64 << 12 {
                let bits = format!("{p:012b}");
                if naive_f(&bits, l, m) % 2 == 0 {
                    in_a += 1;
                    if naive_block_zero(&bits, l[0], m[0]) {
                        in_a1 += 1;
                    }
                }
            }
            let want = in_a1 as f64 / in_a as f64;
            Ok(((got - want).abs() < 1e-15, format!("mu(A_1) = {got}, enumeration {want}")))
        },
    ));
    out.push(OracleCheck::from_result(
        "pushforward-frequency-identity",
        || {
            let mu = random_measure(rng, 8);
            let nu = mu.dyadic_pushforward(4)?;
            let mut dev = 0.0f64;
            for j in 1..=16 {
                dev = dev.max((nu.transform(j as f64) - mu.transform(16.0 * j as f64)).norm());
            }
            Ok((dev < 1e-12, format!("max |nu^(j) - mu^(16 j)| = {dev:e}")))
        },
    ));
    out.push(OracleCheck::from_result(
        "normalized-restriction-mass",
        || {
            let spec = tiny_spec();
            let a = cylinder_decompose(&spec, &Predicate::FEven)?;
            let mu = DyadicMeasure::lebesgue(12)?.restrict(&a)?.normalize()?;
            let w: f64 = mu.weights()?.iter().sum();
            Ok(((w - 1.0).abs() < 1e-12, format!("sum of weights {w}")))
        },
    ));
    out.push(OracleCheck::from_result(
        "refine-preserves-transform",
        || {
            let mu = random_measure(rng, 6);
            let fine = DyadicMeasure::from_weights(
                9,
                &mu.weights()?.iter().flat_map(|&w| std::iter::repeat_n(w / 8.0, 8)).collect::<Vec<_>>(),
            )?;
            let mut dev = 0.0f64;
            for j in 1..=64 {
                dev = dev.max((mu.transform(j as f64) - fine.transform(j as f64)).norm());
            }
            Ok((dev < 1e-12, format!("max deviation over j <= 64: {dev:e}")))
        },
    ));
    out.push(OracleCheck::from_result(
        "refine-pushforward-commute",
        || {
            let mu = random_measure(rng, 7);
            let a = mu.refine(9)?.dyadic_pushforward(3)?.weights()?;
            let b = mu.dyadic_pushforward(3)?.refine(6)?.weights()?;
            let dev = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            Ok((a.len() == b.len() && dev < 1e-15, format!("max weight difference {dev:e}")))
        },
    ));
    out
}

fn fourier_checks(rng: &mut ChaCha8Rng, sinc_fn: fn(f64) -> f64) -> Vec<OracleCheck> {
    let mut out = Vec::new();
    out.push(OracleCheck::from_result(
        "sinc-kernel-vs-quadrature",
        || {
            // Uniform measure and a random step density, both against
            // quadrature of the defining integral.
            let mut dev = 0.0f64;
            let mut report = String::new();
            let uniform = cell_transform_with(&[1.0], 0.5, sinc_fn);
            let q = fourier_quadrature(|_| 1.0, 0.5, 0.0, 1.0)?;
            dev = dev.max((uniform - q).norm());
            report.push_str(&format!("|uniform^(1/2)| = {:.12} (2/pi = {:.12}); ", uniform.norm(), 2.0 / PI));
            let w: Vec<f64> = (0..8).map(|_| rng.gen::<f64>()).collect();
            for xi in [0.3, 1.5, 7.25, 20.0] {
                let closed = cell_transform_with(&w, xi, sinc_fn);
                let mut quad = Complex64::new(0.0, 0.0);
                for (p, &wp) in w.iter().enumerate() {
                    let (a, b) = (p as f64 / 8.0, (p + 1) as f64 / 8.0);
                    quad += fourier_quadrature(|_| 8.0 * wp, xi, a, b)?;
                }
                dev = dev.max((closed - quad).norm());
            }
            report.push_str(&format!("max deviation {dev:e}"));
            Ok((dev < 1e-10, report))
        },
    ));
    out.push(OracleCheck::from_result(
        "batch-vs-direct-transform",
        || {
            let mu = random_measure(rng, 8);
            let batch = batch_integer_transform(&mu, 256);
            let mut dev = 0.0f64;
            for j in 0..=256u64 {
                let direct: Complex64 = mu
                    .cells()
                    .map(|(p, w)| turn(j as f64 * (p as f64 + 0.5) / 256.0) * (w * sinc(PI * j as f64 / 256.0)))
                    .sum();
                dev = dev.max((batch.values[j as usize] - direct).norm());
            }
            Ok((dev < 1e-10, format!("max |batch - direct| over j <= 256: {dev:e}")))
        },
    ));
    out.push(OracleCheck::from_result(
        "sup-scan-vs-loop",
        || {
            let mu = DyadicMeasure::lebesgue(8)?
                .restrict(&CylinderSet::from_runs(8, vec![(128, 256)])?)?
                .normalize()?;
            let (j, v) = sup_abs_transform(&mu, 1, 128)?;
            let mut best = (1u64, -1.0);
            for k in 1..=128u64 {
                let a = mu.transform(k as f64).norm();
                if a > best.1 {
                    best = (k, a);
                }
            }
            let bound = infsup_lower_bound(0.5);
            Ok((
                j == best.0 && (v - best.1).abs() < 1e-14 && v >= bound,
                format!("sup at j = {j}: {v:.6} (loop {:.6}, lemma bound {bound:.6})", best.1),
            ))
        },
    ));
    out.push(OracleCheck::from_result(
        "cantor-decay-estimate",
        || {
            let r = estimate_decay(&CantorMeasure::prefractal(12), 1 << 16, None, FrequencyGrid::Integer)?;
            Ok((r.fourier_dim_estimate < 0.05, format!("estimate {:.6}", r.fourier_dim_estimate)))
        },
    ));
    out.push(OracleCheck::from_result(
        "lebesgue-half-integer-decay",
        || {
            let r = estimate_decay_dyadic(&DyadicMeasure::lebesgue(12)?, 1 << 12, None, FrequencyGrid::HalfInteger)?;
            Ok((
                (r.fitted_exponent - 1.0).abs() < 0.05 && r.fourier_dim_estimate == 1.0,
                format!("exponent {:.6}, estimate {}", r.fitted_exponent, r.fourier_dim_estimate),
            ))
        },
    ));
    out
}

fn energy_checks(rng: &mut ChaCha8Rng) -> Vec<OracleCheck> {
    let mut out = Vec::new();
    out.push(OracleCheck::from_result(
        "lebesgue-energy-vs-2d-quadrature",
        || {
            let e = riesz_energy(&DyadicMeasure::lebesgue(10)?, 0.5)?.value;
            let q = unit_square_energy(0.5, 1e-12)?;
            let closed = 2.0 / (0.5 * 1.5);
            Ok((
                (e - q).abs() < 1e-9 && (e - closed).abs() < 1e-9,
                format!("energy {e:.12}, quadrature {q:.12}, 2/((1-s)(2-s)) = {closed:.12}"),
            ))
        },
    ));
    out.push(OracleCheck::from_result(
        "kernel-vs-quadrature",
        || {
            let mut worst = 0.0f64;
            for _ in 0..10_000 {
                let s = rng.gen_range(0.05..0.95);
                let d = if rng.gen_bool(0.3) { rng.gen_range(0..4u64) } else { (rng.gen_range(0.0..20.0f64)).exp2() as u64 };
                let closed = RieszKernel::new(s).cell_pair(d);
                let quad = cell_pair_kernel(s, d, 1e-13 * closed)?;
                worst = worst.max(((closed - quad) / quad).abs());
            }
            Ok((worst < 1e-8, format!("worst relative deviation over 10^4 pairs {worst:e}")))
        },
    ));
    out.push(OracleCheck::from_result(
        "energy-dominates-cell-bound",
        || {
            let r = verify_energy_dominates_bound(&DyadicMeasure::lebesgue(8)?, &CylinderSet::full(4)?, 0.5)?;
            Ok((
                r.holds && (r.cell_bound - 0.25).abs() < 1e-15,
                format!("energy {:.6} >= {:.6}", r.energy, r.cell_bound),
            ))
        },
    ));
    out
}

fn lemma_checks(rng: &mut ChaCha8Rng, sinc_fn: fn(f64) -> f64) -> Vec<OracleCheck> {
    let mut out = Vec::new();
    // Triangle pulse of width eps as an explicit density.
    let triangle = |eps: f64| move |x: f64| (4.0 / (eps * eps)) * (eps / 2.0 - (x - eps / 2.0).abs()).max(0.0);
    out.push(OracleCheck::from_result(
        "pulse-coefficient-vs-quadrature",
        || {
            let eps = 0.5;
            let q = fourier_quadrature(triangle(eps), 1.0, 0.0, eps / 2.0)?
                + fourier_quadrature(triangle(eps), 1.0, eps / 2.0, eps)?;
            let x = sinc_fn(PI * eps / 2.0);
            let closed = x * x;
            Ok(((q.norm() - closed).abs() < 1e-10, format!("|phi^(1)| = {:.12}, sinc^2(pi/4) = {closed:.12}", q.norm())))
        },
    ));
    out.push(OracleCheck::from_result(
        "pulse-sum-vs-quadrature",
        || {
            let eps = 1.0;
            let p = pulse_sum_bound(eps, 100)?;
            let mut quad = 0.0;
            for k in 1..=100 {
                let c = fourier_quadrature(triangle(eps), k as f64, 0.0, eps / 2.0)?
                    + fourier_quadrature(triangle(eps), k as f64, eps / 2.0, eps)?;
                quad += c.norm();
            }
            let closed: f64 = (1..=100)
                .map(|k| {
                    let x = sinc_fn(PI * k as f64 * eps / 2.0);
                    x * x
                })
                .sum();
            Ok((
                (p.numeric_sum - quad).abs() < 1e-8 && (closed - quad).abs() < 1e-8,
                format!("sum {:.12}, quadrature {quad:.12}, bound {:.6}", p.numeric_sum, p.bound),
            ))
        },
    ));
    out.push(OracleCheck::from_result(
        "pairing-identity-and-mu-independence",
        || {
            let eps = 0.5;
            let mut residual_ok = true;
            let mut bounds = Vec::new();
            let mut worst = 0.0f64;
            for _ in 0..5 {
                let n = rng.gen_range(1..20);
                let mut atoms: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(eps..=1.0), rng.gen::<f64>() + 0.01)).collect();
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                atoms.iter_mut().for_each(|a| a.1 /= total);
                let mut mu = AtomicMeasure::new(atoms, (eps, 1.0))?;
                // Renormalise exactly after merging.
                let t = mu.total_mass();
                mu = AtomicMeasure::new(mu.atoms().iter().map(|&(x, m)| (x, m / t)).collect(), (eps, 1.0))?;
                let c = duality_lower_bound(&mu, eps)?;
                residual_ok &= c.residual_ok;
                worst = worst.max(c.pairing_residual);
                bounds.push(c.lower_bound);
            }
            let same = bounds.iter().all(|b| *b == bounds[0]);
            Ok((
                residual_ok && same && bounds[0] >= infsup_lower_bound(eps),
                format!("lower bound {:.6} for every mu, worst pairing residual {worst:e}", bounds[0]),
            ))
        },
    ));
    out.push(OracleCheck::from_result(
        "small-minimax-vs-exhaustive",
        || {
            let r = minimize_sup_transform_with(0.25, 3, 2, 32)?;
            let (brute_rot, brute_abs) = exhaustive_three_atom_minimax(0.25, 2, 32, 1000);
            Ok((
                (r.optimal_value - brute_rot).abs() < 0.005 && brute_abs >= r.optimal_value - 1e-9
                    && brute_abs <= r.corrected_value + 0.005,
                format!("LP {:.6}, exhaustive {brute_rot:.6} (modulus {brute_abs:.6})", r.optimal_value),
            ))
        },
    ));
    out.push(OracleCheck::new(
        "lemma-bound-arithmetic",
        (infsup_lower_bound(0.25) - 0.25 * PI / (8.0 + 0.5 * PI)).abs() < 1e-15
            && (infsup_lower_bound(0.25) - 0.08206).abs() < 1e-4,
        format!("pi eps / (8 + 2 pi eps) at eps = 1/4: {:.6}", infsup_lower_bound(0.25)),
    ));
    out
}

fn construction_checks() -> Vec<OracleCheck> {
    let mut out = Vec::new();
    out.push(OracleCheck::from_result(
        "classify-vs-naive",
        || {
            let spec = tiny_spec();
            let mut mismatches = 0;
            for p in 0..1u64 << 12 {
                let bits = format!("{p:012b}");
                let naive = naive_f(&bits, spec.l(), spec.m());
                if classify_f(&bits, &spec)? != naive || classify_index(&spec, p) != naive {
                    mismatches += 1;
                }
            }
            Ok((mismatches == 0, format!("{mismatches} mismatches over 4096 strings")))
        },
    ));
    out.push(OracleCheck::from_result(
        "tiny-partition-enumeration",
        || {
            let spec = validate_parameters(0.9, 0.3, &[1])?.with_depth(2)?;
            let a = cylinder_decompose(&spec, &Predicate::FEven)?;
            let b = cylinder_decompose(&spec, &Predicate::FOdd)?;
            let want_a: Vec<u64> =
                (0..4u64).filter(|p| naive_f(&format!("{p:02b}"), &[1], &[1]) % 2 == 0).collect();
            let got_a: Vec<u64> = a.indices().collect();
            Ok((
                got_a == want_a && a.lebesgue_mass() + b.lebesgue_mass() == 1.0 && a.is_disjoint_from(&b),
                format!("A = {got_a:?}, lambda(A) + lambda(B) = {}", a.lebesgue_mass() + b.lebesgue_mass()),
            ))
        },
    ));
    out.push(OracleCheck::from_result(
        "union-bound-vs-inclusion-exclusion",
        || {
            let spec = validate_parameters(0.8, 0.3, &[4, 9, 13])?;
            let mut ok = true;
            let mut detail = String::new();
            for k in 1..=3 {
                let b = mass_of_f_infinite_bound(&spec, k)?;
                let ie = inclusion_exclusion(spec.m(), k);
                ok &= b.exact_mass == ie && b.holds;
                detail.push_str(&format!("k={k}: {} vs {ie} <= {}; ", b.exact_mass, b.union_bound));
            }
            Ok((ok, detail))
        },
    ));
    out.push(OracleCheck::from_result("stage-masses-vs-enumeration", || stage_mass_enumeration(&tiny_spec())));
    out.push(OracleCheck::from_result(
        "witness-pushforward-identity",
        || {
            let spec = DigitBlockSpec::default_spec();
            let mu = candidate_measure(&spec, Candidate::Side(Side::A))?;
            let w = witness_frequency_bound(&mu, &spec, Side::A, 1, 64)?;
            let arithmetic = (w.paper_exponent - (0.8 * 4.0 / 2.0 - 2.0)).abs() < 1e-12;
            Ok((
                w.pushforward_deviation < 1e-10 && arithmetic,
                format!(
                    "max |nu_1^(r) - mu_1^(16 r)| = {:e}, exponent s l_1 / 2 - m_1 = {:.3}",
                    w.pushforward_deviation, w.paper_exponent
                ),
            ))
        },
    ));
    out.push(OracleCheck::from_result(
        "energy-branch-full-chain",
        || {
            let spec = DigitBlockSpec::default_spec();
            let mu = candidate_measure(&spec, Candidate::Stage(2))?;
            let d = dichotomy(&mu, &spec, Side::A, 16)?;
            let e = &d.stages[0].energy[0];
            Ok((
                d.energy_dominates() && e.cover_cells == 1 << 18 && e.cell_bound > 0.0,
                format!("I_s = {:.6} >= cell bound {:.6} over {} cells", e.energy, e.cell_bound, e.cover_cells),
            ))
        },
    ));
    out
}

/// `alpha_k` and `alpha_k^j` of normalised Lebesgue measure on `A` against a
/// digit-string enumeration.
pub fn stage_mass_enumeration(spec: &DigitBlockSpec) -> Result<(bool, String)> {
    let n = spec.depth();
    if n > 20 {
        return Err(crate::Error::TooLarge(format!("enumeration at depth {n}")));
    }
    let mu = candidate_measure(spec, Candidate::Side(Side::A))?;
    let masses = stage_masses(&mu, spec, Side::A)?;
    let (l, m) = (spec.l(), spec.m());
    let mut ok = true;
    let mut detail = String::new();
    for st in &masses.stages {
        let k = st.k;
        let (mut alpha, mut branch) = (0.0, vec![0.0; spec.stage_count() + 1]);
        for (p, w) in mu.cells() {
            let bits = format!("{p:0width$b}", width = n as usize);
            let f = naive_f(&bits, l, m);
            if f % 2 == 0 && naive_block_zero(&bits, l[k - 1], m[k - 1]) {
                alpha += w;
                branch[f as usize] += w;
            }
        }
        ok &= (alpha - st.alpha).abs() < 1e-12;
        for b in &st.branches {
            ok &= (branch[b.j] - b.alpha).abs() < 1e-12;
        }
        detail.push_str(&format!("k={k}: alpha {} vs {alpha}; ", st.alpha));
    }
    Ok((ok, detail))
}

/// `(k, alpha_k, [(j, alpha_k^j)])`.
pub type StageMassRow = (usize, f64, Vec<(usize, f64)>);

/// Normalised Lebesgue stage masses on `side` by enumerating only the
/// `sum m_k` block digits; the other digits do not affect `f` and carry equal
/// weight under Lebesgue measure.
pub fn block_digit_enumeration(spec: &DigitBlockSpec, side: Side) -> Result<Vec<StageMassRow>> {
    let (l, m) = (spec.l(), spec.m());
    let bits: u32 = m.iter().sum();
    if bits > 24 {
        return Err(crate::Error::TooLarge(format!("{bits} block digits to enumerate")));
    }
    let width = spec.depth() as usize;
    let mut fs = Vec::with_capacity(1 << bits);
    for code in 0u64..1 << bits {
        let mut digits = vec!['1'; width];
        let mut bit = 0;
        for k in 0..l.len() {
            for d in 0..m[k] {
                digits[(l[k] + d) as usize] = if code >> bit & 1 == 1 { '1' } else { '0' };
                bit += 1;
            }
        }
        let s: String = digits.into_iter().collect();
        let zeros: Vec<bool> = (0..l.len()).map(|k| naive_block_zero(&s, l[k], m[k])).collect();
        fs.push((naive_f(&s, l, m) as usize, zeros));
    }
    let on_side = fs.iter().filter(|(f, _)| f % 2 == side.parity()).count() as f64;
    Ok(side
        .stages(spec)
        .into_iter()
        .map(|k| {
            let count = |pred: &dyn Fn(usize) -> bool| {
                fs.iter().filter(|(f, z)| z[k - 1] && pred(*f)).count() as f64 / on_side
            };
            let alpha = count(&|f| f % 2 == side.parity());
            let branches = side.branches(spec, k).into_iter().map(|j| (j, count(&|f| f == j))).collect();
            (k, alpha, branches)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusion_exclusion_three_events() {
        assert_eq!(inclusion_exclusion(&[2, 3, 4], 1), 0.384765625);
        assert_eq!(inclusion_exclusion(&[2, 3, 4], 3), 0.0625);
    }
}
