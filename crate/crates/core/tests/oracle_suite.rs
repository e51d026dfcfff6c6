use std::time::{Duration, Instant};

use fourier_lab::fourier::sinc;
use fourier_lab::oracle::{exhaustive_three_atom_minimax, run_suite, OracleConfig};

fn off_by_a_little(x: f64) -> f64 {
    sinc(x) * (1.0 + 1e-4)
}

#[test]
fn suite_is_green_and_fast() {
    let start = Instant::now();
    let checks = run_suite(&OracleConfig::default());
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
    assert!(failed.is_empty(), "{failed:#?}");
    assert!(start.elapsed() < Duration::from_secs(300));
}

#[test]
fn other_seeds_pass() {
    for seed in [1, 99] {
        let checks = run_suite(&OracleConfig { seed, ..OracleConfig::default() });
        assert!(checks.iter().all(|c| c.passed), "seed {seed}");
    }
}

#[test]
fn perturbed_sinc_is_caught() {
    let checks = run_suite(&OracleConfig { sinc: off_by_a_little, ..OracleConfig::default() });
    let kernel = checks.iter().find(|c| c.name == "sinc-kernel-vs-quadrature").unwrap();
    assert!(!kernel.passed, "{}", kernel.detail);
    let pulse = checks.iter().find(|c| c.name == "pulse-coefficient-vs-quadrature").unwrap();
    assert!(!pulse.passed);
}

#[test]
fn exhaustive_minimax_single_point() {
    // eps = 1 leaves only the point 1, where every coefficient is 1.
    let (rot, abs) = exhaustive_three_atom_minimax(1.0, 3, 8, 20);
    assert!((abs - 1.0).abs() < 1e-12);
    assert!((rot - 1.0).abs() < 1e-12);
}
