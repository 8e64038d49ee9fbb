//! Second-order resource bound over a finite set of free states.

use smoothdiv::operator::{random_state, seeded_rng, DensityOperator};
use smoothdiv::randomness::generic_resource_bound;

fn main() -> smoothdiv::Result<()> {
    let mut rng = seeded_rng(7);
    let rho = random_state(&mut rng, 2);
    let mut free: Vec<_> = (0..5)
        .map(|_| random_state(&mut rng, 2).into_op())
        .collect();
    free.push(DensityOperator::maximally_mixed(2).into_op());
    for eps in [0.1, 0.5, 0.9] {
        let b = generic_resource_bound(&rho, &free, eps, 1000)?;
        println!(
            "eps {eps}: {:.6} bits per copy (first order {:.6}, variance {:.6}, argmin {:?})",
            b.bits_per_copy, b.first_order, b.variance, b.argmin
        );
    }
    Ok(())
}
