//! The sets `A = {f even}` and `B = {f odd}` for a small spec, with the
//! block patterns behind them.

use fourier_lab::construction::{
    block_patterns, classify_f, cylinder_decompose, mass_of_f_infinite_bound, validate_parameters, Predicate,
};

fn main() -> fourier_lab::Result<()> {
    let spec = validate_parameters(0.8, 0.3, &[4, 9, 13])?;
    println!("l = {:?}, m = {:?}, depth {}", spec.l(), spec.m(), spec.depth());
    for row in spec.ratio_table() {
        println!("  {row:?}");
    }

    for (name, pred) in [("A", Predicate::FEven), ("B", Predicate::FOdd)] {
        let set = cylinder_decompose(&spec, &pred)?;
        println!("{name}: lambda = {}  runs {}  patterns {:?}", set.lebesgue_mass(), set.runs().len(), block_patterns(&spec, &pred));
    }

    for x in ["11111111111111111", "11110011111111111", "11110011100011111", "00000000000000000"] {
        println!("f({x}) = {}", classify_f(x, &spec)?);
    }

    for k in 1..=spec.stage_count() {
        let b = mass_of_f_infinite_bound(&spec, k)?;
        println!("zero block at stage >= {k}: {} <= {}", b.exact_mass, b.union_bound);
    }
    Ok(())
}
