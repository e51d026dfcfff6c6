//! Dyadic pushforward `x -> 2^l x mod 1` and what it does to Fourier
//! coefficients: `nu^(j) = mu^(2^l j)`.

use fourier_lab::cylinder::CylinderSet;
use fourier_lab::fourier::SpectralMeasure;
use fourier_lab::measure::DyadicMeasure;

fn main() -> fourier_lab::Result<()> {
    // Lebesgue measure on three uneven runs of depth-6 cells.
    let set = CylinderSet::from_runs(6, vec![(16, 21), (33, 35), (50, 60)])?;
    let mu = DyadicMeasure::lebesgue_on(&set).normalize()?;
    let l = 3;
    let nu = mu.dyadic_pushforward(l)?;
    println!("mu at depth {}, nu at depth {}", mu.depth(), nu.depth());
    println!("{:>4} {:>22} {:>22}", "j", "|nu^(j)|", "|mu^(2^l j)|");
    for j in 1..=8 {
        let a = nu.transform(j as f64);
        let b = mu.transform((j << l) as f64);
        println!("{j:>4} {:>22.15} {:>22.15}", a.norm(), b.norm());
    }

    // Refining does not change the measure, so it commutes with pushing
    // forward.
    let fine = mu.refine(9)?.dyadic_pushforward(l)?;
    assert_eq!(fine.refine(fine.depth())?, nu.refine(fine.depth())?);
    println!("refine then push forward == push forward then refine");
    Ok(())
}
