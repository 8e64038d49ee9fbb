//! Two-term expansions against the exact i.i.d. Neyman-Pearson value.

use smoothdiv::asymptotics::{
    moderate_deviation, second_order, DeviationDirection, ExpansionTarget,
};
use smoothdiv::operator::{DensityOperator, HermitianOperator};
use smoothdiv::oracles::{iid_neyman_pearson, ClassicalDistribution};

fn main() -> smoothdiv::Result<()> {
    let (p, q) = ([0.5, 0.5], [0.9, 0.1]);
    let rho = DensityOperator::classical(&p)?;
    let sigma = HermitianOperator::diag(&q);
    let (pd, qd) = (
        ClassicalDistribution::new(p.to_vec())?,
        ClassicalDistribution::new(q.to_vec())?,
    );

    println!("    n  exact/n     two-term");
    for n in [10u64, 100, 1000, 5000] {
        let exact = iid_neyman_pearson(&pd, &qd, n as usize, 0.2)? / n as f64;
        let two = second_order(&rho, &sigma, 0.2, n, ExpansionTarget::Hypothesis)?;
        println!("{n:5}  {exact:.6}  {:.6}", two.value_per_copy);
    }

    let n = 1_000_000u64;
    let a_n = (n as f64).powf(-1.0 / 3.0);
    let md = moderate_deviation(&rho, &sigma, a_n, n, DeviationDirection::Dminf)?;
    println!("moderate deviation at n = {n}: {md:.6} bits per copy");
    Ok(())
}
