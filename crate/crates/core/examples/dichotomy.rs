//! Both branches of the stage argument for the default spec: a measure on
//! `A` either charges little of each `A_k^j` and then has a large Fourier
//! coefficient at some `2^{l_k} r`, or it charges some `A_k^j` heavily and
//! then has large Riesz energy.

use fourier_lab::construction::{candidate_measure, dichotomy, Candidate, DigitBlockSpec, Side};

fn main() -> fourier_lab::Result<()> {
    let spec = DigitBlockSpec::default_spec();
    println!("s {} b {} l {:?} m {:?} depth {}", spec.s(), spec.b(), spec.l(), spec.m(), spec.depth());
    for c in [Candidate::Side(Side::A), Candidate::Stage(2)] {
        let mu = candidate_measure(&spec, c)?;
        let d = dichotomy(&mu, &spec, Side::A, 256)?;
        println!("\n{}  I_s = {:.4}", c.label(), d.energy);
        for st in &d.stages {
            println!("  stage {}  in P: {}  branch {:?}", st.k, st.in_p, st.branch);
            if let Some(w) = &st.witness {
                println!(
                    "    witness r = {}: |nu^| = {:.4} vs target {:.4}, |mu^(2^l r)| (2^l r)^(s/2) = {:.4} >= {:.4}",
                    w.r_star, w.nu_sup, w.target, w.direct_value, w.paper_bound
                );
            }
            for e in &st.energy {
                println!(
                    "    j = {}: alpha {:.5} threshold {:.5}  cells {}  bound {:.4} <= I_s {}",
                    e.j, e.alpha, e.threshold, e.cover_cells, e.cell_bound, e.dominated
                );
            }
        }
    }
    Ok(())
}
