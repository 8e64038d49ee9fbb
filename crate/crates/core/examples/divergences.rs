//! The closed-form divergences of a random qubit pair.

use smoothdiv::divergence::{
    d_max, d_min_f, d_min_projector, petz_renyi, relative_entropy, relative_entropy_variance,
    sandwiched_renyi,
};
use smoothdiv::operator::{random_state, seeded_rng};

fn main() -> smoothdiv::Result<()> {
    let mut rng = seeded_rng(2);
    let rho = random_state(&mut rng, 2);
    let sigma = random_state(&mut rng, 2).into_op();

    println!("D        {:.6}", relative_entropy(&rho, &sigma)?.bits);
    println!(
        "V        {:.6}",
        relative_entropy_variance(&rho, &sigma)?.bits
    );
    println!("D_max    {:.6}", d_max(rho.op(), &sigma)?.bits);
    println!("D_min    {:.6}", d_min_projector(&rho, &sigma)?.bits);
    println!("D_min,F  {:.6}", d_min_f(rho.op(), &sigma)?.bits);
    for alpha in [0.5, 0.9, 1.5, 2.0] {
        println!(
            "alpha {alpha}: sandwiched {:.6}, petz {:.6}",
            sandwiched_renyi(&rho, &sigma, alpha)?.bits,
            petz_renyi(&rho, &sigma, alpha)?.bits
        );
    }
    Ok(())
}
