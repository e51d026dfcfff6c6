use fourier_lab::construction::{
    candidate_measure, classify_f, cylinder_decompose, dichotomy, mass_of_f_infinite_bound, parameter_window,
    stage_masses, validate_parameters, Branch, Candidate, DigitBlockSpec, Predicate, Side, SpecFile, SpecViolation,
};
use fourier_lab::harness::pattern_stage_masses;
use fourier_lab::oracle::{block_digit_enumeration, stage_mass_enumeration};
use proptest::prelude::*;

#[test]
fn default_spec_shape() {
    let spec = DigitBlockSpec::default_spec();
    assert_eq!(spec.l(), &[4, 20]);
    assert_eq!(spec.m(), &[2, 6]);
    assert_eq!(spec.depth(), 26);
}

#[test]
fn default_partition_is_exact() {
    let spec = DigitBlockSpec::default_spec();
    let a = cylinder_decompose(&spec, &Predicate::FEven).unwrap();
    let b = cylinder_decompose(&spec, &Predicate::FOdd).unwrap();
    assert_eq!(a.cell_count() + b.cell_count(), 1 << 26);
    assert!(a.is_disjoint_from(&b));
    assert_eq!(a.lebesgue_mass(), 193.0 / 256.0);
    assert_eq!(b.lebesgue_mass(), 63.0 / 256.0);
}

#[test]
fn zero_block_union_bound() {
    let spec = DigitBlockSpec::default_spec();
    let b = mass_of_f_infinite_bound(&spec, 1).unwrap();
    assert_eq!(b.union_bound, 0.25 + 1.0 / 64.0);
    assert!(b.holds && b.exact_mass <= b.union_bound);
}

#[test]
fn named_rejections() {
    assert!(matches!(validate_parameters(0.5, 0.3, &[4]), Err(SpecViolation::ExponentOutOfRange { .. })));
    assert!(matches!(validate_parameters(0.8, 0.45, &[4]), Err(SpecViolation::BlockRatioOutOfWindow { .. })));
    assert!(matches!(validate_parameters(0.8, 0.3, &[]), Err(SpecViolation::NoStages)));
    assert!(matches!(validate_parameters(0.8, 0.3, &[9, 4]), Err(SpecViolation::NotIncreasing { .. })));
    assert!(matches!(validate_parameters(0.8, 0.3, &[4, 6]), Err(SpecViolation::OverlappingBlocks { .. })));
    let spec = validate_parameters(0.8, 0.3, &[4, 20]).unwrap();
    assert!(matches!(spec.clone().with_depth(10), Err(SpecViolation::DepthTooShallow { .. })));
    assert!(matches!(spec.with_depth(40), Err(SpecViolation::DepthTooLarge { .. })));
}

#[test]
fn window_endpoints() {
    let (lo, hi) = parameter_window(0.8);
    assert!((lo - 0.25).abs() < 1e-15 && (hi - 0.4).abs() < 1e-15);
    assert!(validate_parameters(0.8, 0.25, &[4]).is_err());
    assert!(validate_parameters(0.8, 0.4, &[4]).is_err());
}

#[test]
fn spec_file_round_trip() {
    let spec = DigitBlockSpec::default_spec();
    let text = serde_json::to_string(&spec.to_file()).unwrap();
    let back: SpecFile = serde_json::from_str(&text).unwrap();
    assert_eq!(DigitBlockSpec::from_file(&back).unwrap(), spec);
    assert!(serde_json::from_str::<SpecFile>(r#"{"s":0.8,"b":0.3,"l":[4],"extra":1}"#).is_err());
}

#[test]
fn classify_rejects_bad_strings() {
    let spec = DigitBlockSpec::default_spec();
    assert!(classify_f("0101", &spec).is_err());
    assert!(classify_f(&"2".repeat(26), &spec).is_err());
    assert_eq!(classify_f(&"0".repeat(26), &spec).unwrap(), 2);
}

#[test]
fn dichotomy_default_lebesgue_on_a() {
    let spec = DigitBlockSpec::default_spec();
    let mu = candidate_measure(&spec, Candidate::Side(Side::A)).unwrap();
    let d = dichotomy(&mu, &spec, Side::A, 64).unwrap();
    assert!(d.every_stage_fires_once());
    assert!(d.energy_dominates());
    let st = &d.stages[0];
    assert_eq!(st.branch, Some(Branch::Witness));
    let w = st.witness.as_ref().unwrap();
    assert!(w.certified && w.chain_holds);
    assert_eq!(w.leaked_mass, 0.0);
}

#[test]
fn dichotomy_single_stage_takes_energy_branch() {
    let spec = DigitBlockSpec::default_spec();
    let mu = candidate_measure(&spec, Candidate::Stage(2)).unwrap();
    let d = dichotomy(&mu, &spec, Side::A, 64).unwrap();
    assert_eq!(d.stages[0].branch, Some(Branch::Energy));
    let e = &d.stages[0].energy[0];
    assert_eq!(e.alpha, 0.25);
    assert!(e.violates_threshold && e.dominated);
}

#[test]
fn masses_agree_three_ways() {
    let spec = validate_parameters(0.9, 0.3, &[2, 6, 12]).unwrap().with_depth(16).unwrap();
    let mu = candidate_measure(&spec, Candidate::Side(Side::A)).unwrap();
    let exact = stage_masses(&mu, &spec, Side::A).unwrap();
    let patterns = pattern_stage_masses(&spec, Side::A);
    let digits = block_digit_enumeration(&spec, Side::A).unwrap();
    for ((st, p), d) in exact.stages.iter().zip(&patterns).zip(&digits) {
        assert!((st.alpha - p.1).abs() < 1e-14 && (st.alpha - d.1).abs() < 1e-14);
        assert!(st.exact && st.residual == 0.0);
    }
    assert!(stage_mass_enumeration(&spec).unwrap().0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sides_partition_every_spec(l1 in 2u32..6, gap in 1u32..6) {
        let spec = validate_parameters(0.9, 0.3, &[l1, l1 + gap + 3]).unwrap();
        let a = cylinder_decompose(&spec, &Predicate::FEven).unwrap();
        let b = cylinder_decompose(&spec, &Predicate::FOdd).unwrap();
        prop_assert_eq!(a.cell_count() + b.cell_count(), 1u64 << spec.depth());
        prop_assert!(a.is_disjoint_from(&b));
        for k in 1..=spec.stage_count() {
            prop_assert!(mass_of_f_infinite_bound(&spec, k).unwrap().holds);
        }
    }
}
