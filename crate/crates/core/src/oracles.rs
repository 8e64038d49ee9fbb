//! Brute-force references: classical Neyman–Pearson tests, their i.i.d.
//! extension over type classes, and a multistart search for feasible points
//! of the smooth F-min program.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::conic::SolverOptions;
use crate::error::{Error, Result};
use crate::operator::{fidelity, random_state, seeded_rng, DensityOperator, HermitianOperator};
use crate::smoothing::{optimal_y, prepare, rho_block_step};

const NORMALIZATION_TOL: f64 = 1e-9;
const POLISH_STEPS: usize = 25;
/// Likelihood ratios closer than this (relatively) form one class.
const RATIO_TIE: f64 = 1e-12;

/// Nonnegative masses summing to at most one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalDistribution {
    masses: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::Domain(format!(
                "mass {m} is not a nonnegative number"
            )));
        }
        let total: f64 = masses.iter().sum();
        if total > 1.0 + NORMALIZATION_TOL {
            return Err(Error::TraceViolation {
                trace: total,
                kind: "sub-distribution",
            });
        }
        Ok(Self { masses })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total() - 1.0).abs() <= NORMALIZATION_TOL
    }

    pub fn to_state(&self) -> Result<DensityOperator> {
        DensityOperator::classical(&self.masses)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeymanPearson {
    pub bits: f64,
    /// Acceptance probability of the optimal test on each outcome.
    pub test: Vec<f64>,
    pub type_two: f64,
}

fn check_pair(p: &ClassicalDistribution, q: &ClassicalDistribution, eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain(format!("epsilon {eps} outside [0, 1)")));
    }
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(p.len(), q.len()));
    }
    if !p.is_normalized() {
        return Err(Error::Domain(format!("p has total mass {}", p.total())));
    }
    Ok(())
}

fn same_ratio(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= RATIO_TIE * a.abs().max(b.abs())
}

/// A group of outcomes sharing one likelihood ratio, in log domain.
struct Class {
    log_ratio: f64,
    p_mass: f64,
    log_q: f64,
    members: Vec<usize>,
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Greedy likelihood-ratio fill to `1 − ε`. Returns `ln` of the accepted
/// q-mass and the acceptance fraction of each class.
fn greedy_fill(mut classes: Vec<Class>, eps: f64) -> (f64, Vec<(Vec<usize>, f64)>) {
    classes.retain(|c| c.p_mass > 0.0);
    classes.sort_by(|a, b| b.log_ratio.total_cmp(&a.log_ratio));
    let mut merged: Vec<Class> = Vec::with_capacity(classes.len());
    for c in classes {
        match merged.last_mut() {
            Some(last) if same_ratio(last.log_ratio, c.log_ratio) => {
                last.p_mass += c.p_mass;
                last.log_q = log_add(last.log_q, c.log_q);
                last.members.extend(c.members);
            }
            _ => merged.push(c),
        }
    }
    let mut need = 1.0 - eps;
    let mut log_q = f64::NEG_INFINITY;
    let mut taken = Vec::new();
    for c in merged {
        if need <= 1e-15 {
            break;
        }
        let frac = (need / c.p_mass).min(1.0);
        log_q = log_add(log_q, frac.ln() + c.log_q);
        need -= frac * c.p_mass;
        taken.push((c.members, frac));
    }
    (log_q, taken)
}

fn neg_log2_from_ln(log_q: f64) -> f64 {
    -log_q / std::f64::consts::LN_2
}

/// Optimal classical test for `p` against `q` at type-I error `ε`.
pub fn neyman_pearson(
    p: &ClassicalDistribution,
    q: &ClassicalDistribution,
    eps: f64,
) -> Result<NeymanPearson> {
    check_pair(p, q, eps)?;
    let classes = p
        .masses
        .iter()
        .zip(&q.masses)
        .enumerate()
        .map(|(x, (&px, &qx))| Class {
            log_ratio: px.ln() - qx.ln(),
            p_mass: px,
            log_q: qx.ln(),
            members: vec![x],
        })
        .collect();
    let (log_q, taken) = greedy_fill(classes, eps);
    let mut test = vec![0.0; p.len()];
    for (members, frac) in taken {
        for x in members {
            test[x] = frac;
        }
    }
    Ok(NeymanPearson {
        bits: neg_log2_from_ln(log_q),
        test,
        type_two: log_q.exp(),
    })
}

fn compositions(n: usize, parts: usize, out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>) {
    if parts == 1 {
        cur.push(n);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for k in 0..=n {
        cur.push(k);
        compositions(n - k, parts - 1, out, cur);
        cur.pop();
    }
}

/// Neyman–Pearson for `p^{⊗n}` against `q^{⊗n}`, exact up to float
/// arithmetic, by aggregating sequences into type classes.
pub fn iid_neyman_pearson(
    p: &ClassicalDistribution,
    q: &ClassicalDistribution,
    n: usize,
    eps: f64,
) -> Result<f64> {
    check_pair(p, q, eps)?;
    let k = p.len();
    let fits = match k {
        1 | 2 => n <= 5000,
        3 | 4 => n <= 12,
        _ => false,
    };
    if n == 0 || !fits {
        return Err(Error::TooLarge(format!(
            "alphabet {k} with n = {n}; supported: binary up to 5000 copies, alphabet up to 4 up to 12"
        )));
    }
    let ln_p: Vec<f64> = p.masses.iter().map(|v| v.ln()).collect();
    let ln_q: Vec<f64> = q.masses.iter().map(|v| v.ln()).collect();
    let mut types = Vec::new();
    compositions(n, k, &mut types, &mut Vec::with_capacity(k));
    let ln_n = ln_factorial(n as u64);
    let classes = types
        .into_iter()
        .enumerate()
        .filter_map(|(id, t)| {
            let mut count = ln_n;
            let (mut lp, mut lq) = (0.0, 0.0);
            for (x, &c) in t.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                count -= ln_factorial(c as u64);
                lp += c as f64 * ln_p[x];
                lq += c as f64 * ln_q[x];
            }
            if lp == f64::NEG_INFINITY {
                return None;
            }
            Some(Class {
                log_ratio: lp - lq,
                p_mass: (count + lp).exp(),
                log_q: count + lq,
                members: vec![id],
            })
        })
        .collect();
    let (log_q, _) = greedy_fill(classes, eps);
    Ok(neg_log2_from_ln(log_q))
}

/// Best certified lower bound on `D^ε_{min,F}(ρ‖σ)` from random feasible
/// points. Each start mixes `ρ` with a random state, is rescaled onto
/// `F(ρ̃, ρ) = 1 − ε`, then polished by `ρ̃`-block steps until the objective stalls.
pub fn multistart_dminf(
    rho: &DensityOperator,
    sigma: &HermitianOperator,
    eps: f64,
    samples: usize,
    seed: u64,
    solver: &SolverOptions,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Domain("at least one sample is required".into()));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain(format!("epsilon {eps} outside [0, 1)")));
    }
    rho.require_same_dim(sigma)?;
    let roots: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|s| -> Result<f64> {
            let start = if s == 0 {
                prepare(rho, rho, eps)?
            } else {
                let mut rng = seeded_rng(seed ^ (s as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
                let tau = random_state(&mut rng, rho.dim());
                let w: f64 = rng.random_range(0.0..1.0);
                prepare(&rho.scale(1.0 - w).add(&tau.scale(w)), rho, eps)?
            };
            let mut best = fidelity(&start, sigma)?.sqrt();
            if eps == 0.0 {
                return Ok(best);
            }
            let mut cur = start;
            for _ in 0..POLISH_STEPS {
                let polished = optimal_y(&cur, sigma)
                    .and_then(|y| rho_block_step(&y, rho, eps, solver))
                    .and_then(|t| prepare(&t, rho, eps));
                let Ok(next) = polished else { break };
                let a = fidelity(&next, sigma)?.sqrt();
                if a >= best {
                    break;
                }
                let gain = best - a;
                best = a;
                cur = next;
                if gain <= 1e-8 {
                    break;
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let best = roots.into_iter().fold(f64::INFINITY, f64::min);
    Ok(if best > 0.0 {
        -2.0 * best.log2()
    } else {
        f64::INFINITY
    })
}
