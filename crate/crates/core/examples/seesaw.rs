//! Seesaw lower bound with per-restart traces.

use smoothdiv::conic::SolverOptions;
use smoothdiv::operator::{random_state, seeded_rng};
use smoothdiv::smoothing::{seesaw_dminf_lower, SeesawOptions};

fn main() -> smoothdiv::Result<()> {
    let mut rng = seeded_rng(5);
    let rho = random_state(&mut rng, 3);
    let sigma = random_state(&mut rng, 3).into_op();
    let (best, traces) = seesaw_dminf_lower(
        &rho,
        &sigma,
        0.2,
        &SeesawOptions::default(),
        &SolverOptions::default(),
    )?;
    for t in &traces {
        println!(
            "restart {}: {} iterates, converged {}, {:.8} bits",
            t.restart_id,
            t.iterates.len(),
            t.converged,
            t.best_value_bits
        );
    }
    println!(
        "lower bound {:.8} bits, witness fidelity {:.8}",
        best.value_bits, best.witness_fidelity
    );
    Ok(())
}
