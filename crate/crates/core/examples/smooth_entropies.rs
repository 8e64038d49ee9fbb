//! Smooth max-relative entropy and smooth conditional min-entropy with
//! their dual certificates.

use smoothdiv::conic::SolverOptions;
use smoothdiv::operator::{random_state, seeded_rng, BipartiteLabel};
use smoothdiv::smoothing::{smooth_dmax, smooth_hmin, SmoothingSet};

fn main() -> smoothdiv::Result<()> {
    let mut rng = seeded_rng(4);
    let rho = random_state(&mut rng, 2);
    let sigma = random_state(&mut rng, 2).into_op();
    let opts = SolverOptions::default();

    for eps in [0.0, 0.05, 0.2] {
        for set in [SmoothingSet::Subnormalized, SmoothingSet::Normalized] {
            let r = smooth_dmax(&rho, &sigma, eps, set, &opts)?;
            println!(
                "D_max^{eps} {set:?}: primal {:.8} dual {:.8} fidelity {:.6}",
                r.value_bits,
                r.dual_bits.unwrap_or(f64::NAN),
                r.witness_fidelity
            );
        }
    }

    let rho_ab = random_state(&mut rng, 4);
    let label = BipartiteLabel::new(2, 2)?;
    for eps in [0.0, 0.1, 0.3] {
        let h = smooth_hmin(&rho_ab, label, eps, &opts)?;
        println!(
            "H_min^{eps}(A|B) = {:.8} (gap {:.1e})",
            h.value_bits,
            h.gap.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
