//! Riesz energies `I_s(mu)` of dyadic measures and the cell-counting lower
//! bound `I_s(mu) >= |I|^{-s} mu(E)^2 / N` for a cover of `E` by `N` cells.

use fourier_lab::cylinder::CylinderSet;
use fourier_lab::energy::{riesz_energy, verify_energy_dominates_bound};
use fourier_lab::measure::DyadicMeasure;

fn main() -> fourier_lab::Result<()> {
    let leb = DyadicMeasure::lebesgue(10)?;
    for s in [0.1, 0.5, 0.9, 1.0] {
        let e = riesz_energy(&leb, s)?;
        let closed = if s < 1.0 { 2.0 / ((1.0 - s) * (2.0 - s)) } else { f64::INFINITY };
        println!("lebesgue  s = {s:<4} I_s = {:<20} 2/((1-s)(2-s)) = {closed}", e.value);
    }

    // Concentrating mass raises the energy: uniform on 2^8 of the 2^10
    // cells, spread out versus packed together.
    let spread = CylinderSet::from_indices(10, (0..1024).step_by(4))?;
    let packed = CylinderSet::from_runs(10, vec![(0, 256)])?;
    for (name, set) in [("spread", &spread), ("packed", &packed)] {
        let mu = DyadicMeasure::lebesgue_on(set).normalize()?;
        let r = verify_energy_dominates_bound(&mu, set, 0.5)?;
        println!("{name:<7} I_1/2 = {:.6}  cell bound {:.6}  holds {}", r.energy, r.cell_bound, r.holds);
    }
    Ok(())
}
