//! Basic operator toolkit: states, fidelity, partial trace and channels.

use smoothdiv::operator::{
    fidelity, random_channel, random_state, seeded_rng, BipartiteLabel, DensityOperator, Subsystem,
};

fn main() -> smoothdiv::Result<()> {
    let mut rng = seeded_rng(1);
    let rho = random_state(&mut rng, 3);
    let sigma = random_state(&mut rng, 3);
    println!("F(rho, sigma) = {:.6}", fidelity(rho.op(), sigma.op())?);

    let ch = random_channel(&mut rng, 3, 2, 3);
    let (a, b) = (ch.apply_state(&rho)?, ch.apply_state(&sigma)?);
    println!("F(N(rho), N(sigma)) = {:.6}", fidelity(a.op(), b.op())?);

    let label = BipartiteLabel::new(2, 2)?;
    let bell = DensityOperator::pure(&[
        smoothdiv::operator::c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        smoothdiv::operator::c(0.0, 0.0),
        smoothdiv::operator::c(0.0, 0.0),
        smoothdiv::operator::c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
    ])?;
    let reduced = bell.partial_trace(label, Subsystem::A)?;
    println!(
        "Tr_B of a Bell state: eigenvalues {:?}",
        reduced.op().eigenvalues()
    );
    Ok(())
}
