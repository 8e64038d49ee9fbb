//! Distillable-randomness bounds for the isotropic state.

use smoothdiv::conic::SolverOptions;
use smoothdiv::operator::seeded_rng;
use smoothdiv::randomness::{
    dephase_to_cq, fig3_rows, isotropic_state, log_spaced_n, max_product_fidelity, one_shot_lower,
};

fn main() -> smoothdiv::Result<()> {
    let (rho, label) = isotropic_state(2, 0.3)?;
    let cq = dephase_to_cq(&rho, label)?;
    let one_shot = one_shot_lower(&cq, 0.2, 0.1, &SolverOptions::default())?;
    println!("one-shot lower bound at eps 0.2: {one_shot} bits");

    for r in fig3_rows(2, 0.3, 1e-4, &log_spaced_n(100, 1_000_000, 5))? {
        println!(
            "n {:8}: lower {:.6} upper {:.6} (asymptotes {:.6}, {:.6})",
            r.n, r.lower_curve, r.upper_curve, r.lower_asymptote, r.upper_asymptote
        );
    }

    let mut rng = seeded_rng(6);
    for d in 2..=4 {
        println!(
            "d {d}: best product fidelity {:.6}",
            max_product_fidelity(&mut rng, d, 500)?
        );
    }
    Ok(())
}
