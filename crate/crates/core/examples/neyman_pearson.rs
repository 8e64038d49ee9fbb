//! Classical Neyman-Pearson oracle.

use smoothdiv::oracles::{neyman_pearson, ClassicalDistribution};

fn main() -> smoothdiv::Result<()> {
    let p = ClassicalDistribution::new(vec![0.5, 0.3, 0.2])?;
    let q = ClassicalDistribution::new(vec![0.1, 0.3, 0.6])?;
    for eps in [0.0, 0.2, 0.5, 0.8] {
        let np = neyman_pearson(&p, &q, eps)?;
        println!("eps {eps}: {:.6} bits, test {:?}", np.bits, np.test);
    }
    Ok(())
}
