//! Lower and upper bounds on the smooth F-min-relative entropy of a random
//! pair, swept over ε.

use smoothdiv::operator::{random_state, seeded_rng};
use smoothdiv::smoothing::{bracket_sweep, BracketOptions};

fn main() -> smoothdiv::Result<()> {
    let dim = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(2);
    let mut rng = seeded_rng(11);
    let rho = random_state(&mut rng, dim);
    let sigma = random_state(&mut rng, dim).into_op();

    let grid: Vec<f64> = (1..=10).map(|k| 0.05 * k as f64).collect();
    let start = std::time::Instant::now();
    let brackets = bracket_sweep(&rho, &sigma, &grid, &BracketOptions::default())?;
    println!("eps      lower      upper      delta*");
    for b in &brackets {
        println!(
            "{:.2}  {:9.6}  {:9.6}  {:.3e}",
            b.eps, b.lower_bits, b.upper_bits, b.delta_star
        );
    }
    println!("dim {dim}: {:.1?}", start.elapsed());
    Ok(())
}
