//! Root fidelity and hypothesis testing as semidefinite programs.

use smoothdiv::conic::{hypothesis_testing, root_fidelity_sdp, SolverOptions};
use smoothdiv::operator::{random_state, root_fidelity, seeded_rng};

fn main() -> smoothdiv::Result<()> {
    let mut rng = seeded_rng(3);
    let rho = random_state(&mut rng, 3).into_op();
    let sigma = random_state(&mut rng, 3).into_op();
    let opts = SolverOptions::default();

    let f = root_fidelity_sdp(&rho, &sigma, &opts)?;
    println!(
        "root fidelity: sdp {:.10} dual {:.10} spectral {:.10}",
        f.primal,
        f.dual,
        root_fidelity(&rho, &sigma)?
    );

    for eps in [0.01, 0.1, 0.5] {
        let h = hypothesis_testing(&rho, &sigma, eps, &opts)?;
        println!(
            "D_H^{eps}: {:.8} bits (gap {:.1e}, {:?})",
            h.bits, h.gap, h.status
        );
    }
    Ok(())
}
