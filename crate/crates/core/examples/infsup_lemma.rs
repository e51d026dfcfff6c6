//! How small can `sup_j |mu^(j)|` be for a probability measure on `[eps, 1]`?
//! The triangle-pulse pairing gives `pi eps / (8 + 2 pi eps)`; a linear
//! minimax over grid measures shows how far above that the truth sits.

use fourier_lab::lemma::{
    duality_lower_bound, infsup_lower_bound, minimize_sup_transform, pulse_sum_bound, default_pulse_terms,
};
use fourier_lab::measure::AtomicMeasure;

fn main() -> fourier_lab::Result<()> {
    for eps in [0.125, 0.25, 0.5, 1.0] {
        let p = pulse_sum_bound(eps, default_pulse_terms(eps))?;
        let r = minimize_sup_transform(eps, 128, 128)?;
        println!(
            "eps {eps:<6} bound {:.5}  eps/5 {:.5}  minimax {:.5} (+{:.5})  pulse sum {:.5} <= {:.5}",
            infsup_lower_bound(eps),
            eps / 5.0,
            r.corrected_value,
            r.slack,
            p.numeric_sum,
            p.bound
        );
    }

    // The pairing bound does not depend on the measure.
    let mu = AtomicMeasure::new(vec![(0.3, 0.5), (0.65, 0.25), (1.0, 0.25)], (0.25, 1.0))?;
    let c = duality_lower_bound(&mu, 0.25)?;
    println!("three atoms: sup >= {:.5}, pairing residual {:.2e}", c.lower_bound, c.pairing_residual);
    Ok(())
}
