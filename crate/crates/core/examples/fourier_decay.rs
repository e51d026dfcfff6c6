//! Band-wise decay fits for Lebesgue measure, the middle-thirds Cantor
//! measure and a random dyadic measure.

use fourier_lab::cantor::CantorMeasure;
use fourier_lab::fourier::{estimate_decay, estimate_decay_dyadic, FrequencyGrid, SpectralMeasure};
use fourier_lab::measure::DyadicMeasure;
use rand::{Rng, SeedableRng};

fn main() -> fourier_lab::Result<()> {
    let j_max = 1 << 14;

    // |mu^(xi)| = |sin(pi xi)| / (pi |xi|) vanishes at the integers, so
    // Lebesgue decay shows up on half-integers.
    let leb = estimate_decay(&DyadicMeasure::lebesgue(0)?, j_max, None, FrequencyGrid::HalfInteger)?;
    println!("lebesgue   beta {:.4}  estimate {:.4}", leb.fitted_exponent, leb.fourier_dim_estimate);

    let cantor = CantorMeasure::prefractal(12);
    let c = estimate_decay(&cantor, j_max, None, FrequencyGrid::Integer)?;
    println!("cantor     beta {:.4}  estimate {:.4}", c.fitted_exponent, c.fourier_dim_estimate);
    for k in 0..=6 {
        let xi = 3f64.powi(k);
        println!("  |mu^(3^{k})| = {:.12}", cantor.transform(xi).norm());
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let w: Vec<f64> = (0..1 << 10).map(|_| rng.gen::<f64>()).collect();
    let mu = DyadicMeasure::from_weights(10, &w)?.normalize()?;
    let r = estimate_decay_dyadic(&mu, j_max, None, FrequencyGrid::HalfInteger)?;
    println!("random     beta {:.4}  estimate {:.4}  aliased {}", r.fitted_exponent, r.fourier_dim_estimate, r.aliased);
    for w in &r.windows {
        println!("  [{:>6}, {:>6})  sup {:.3e} at {}", w.band_lo, w.band_hi, w.sup_abs, w.j_star);
    }
    Ok(())
}
