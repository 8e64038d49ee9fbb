//! Bounds on distillable randomness: classical-quantum states, the one-shot
//! position-based-coding lower bound, two-term rate curves, and the generic
//! resource-theory bound over a finite set of free states.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{expansion_from_moments, gaussian_quantile, ExpansionTarget};
use crate::conic::{hypothesis_testing_blocks, SolverOptions};
use crate::divergence::{
    mutual_information_and_variance, relative_entropy, relative_entropy_variance,
};
use crate::error::{Error, Result};
use crate::operator::{
    c, fidelity, random_subnormalized, BipartiteLabel, CMatrix, DensityOperator, HermitianOperator,
    StateKind,
};

const PROB_TOL: f64 = 1e-12;
/// Largest joint dimension for which the n-copy program is assembled.
pub const MAX_JOINT_DIM: usize = 4096;
/// Free states whose relative entropy is this close to the minimum are
/// treated as minimizers.
pub const ARGMIN_TOL: f64 = 1e-9;

/// `(1−p) Φ^d + p I/d²` on `d ⊗ d`.
pub fn isotropic_state(d: usize, p: f64) -> Result<(DensityOperator, BipartiteLabel)> {
    if d < 2 || !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "isotropic state needs d ≥ 2 and p in [0, 1], got d = {d}, p = {p}"
        )));
    }
    let n = d * d;
    let mut m = CMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = c((1.0 - p) / d as f64, 0.0);
        }
    }
    for k in 0..n {
        m[(k, k)] += c(p / n as f64, 0.0);
    }
    let label = BipartiteLabel::new(d, d)?;
    let op = HermitianOperator::new(m)?;
    Ok((DensityOperator::new(op, StateKind::Normalized)?, label))
}

/// `Φ̄^d = (1/d) Σ_i |ii⟩⟨ii|`, the maximally classically correlated state.
pub fn maximally_correlated(d: usize) -> Result<(DensityOperator, BipartiteLabel)> {
    if d == 0 {
        return Err(Error::Empty);
    }
    let mut probs = vec![0.0; d * d];
    for i in 0..d {
        probs[i * d + i] = 1.0 / d as f64;
    }
    Ok((
        DensityOperator::classical(&probs)?,
        BipartiteLabel::new(d, d)?,
    ))
}

/// `ρ_XB = Σ_x p(x) |x⟩⟨x| ⊗ ρ_B^x`, with `X` the first tensor factor.
#[derive(Debug, Clone)]
pub struct CqState {
    pub probs: Vec<f64>,
    pub conditionals: Vec<DensityOperator>,
    pub uniform: bool,
}

impl CqState {
    pub fn new(probs: Vec<f64>, conditionals: Vec<DensityOperator>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Empty);
        }
        if probs.len() != conditionals.len() {
            return Err(Error::DimensionMismatch(probs.len(), conditionals.len()));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Domain("probabilities must be nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::TraceViolation {
                trace: total,
                kind: "probability vector",
            });
        }
        let db = conditionals[0].dim();
        for rho in &conditionals {
            if rho.dim() != db {
                return Err(Error::DimensionMismatch(db, rho.dim()));
            }
            if rho.kind() != StateKind::Normalized {
                return Err(Error::Domain(
                    "conditional states must be normalized".into(),
                ));
            }
        }
        let first = probs[0];
        let uniform = probs.iter().all(|p| (p - first).abs() <= PROB_TOL);
        Ok(Self {
            probs,
            conditionals,
            uniform,
        })
    }

    pub fn uniform(conditionals: Vec<DensityOperator>) -> Result<Self> {
        let m = conditionals.len().max(1);
        Self::new(vec![1.0 / m as f64; conditionals.len()], conditionals)
    }

    pub fn dim_x(&self) -> usize {
        self.probs.len()
    }

    pub fn dim_b(&self) -> usize {
        self.conditionals[0].dim()
    }

    pub fn label(&self) -> BipartiteLabel {
        BipartiteLabel {
            dim_a: self.dim_x(),
            dim_b: self.dim_b(),
        }
    }

    /// `Σ_x p(x) ρ_B^x`.
    pub fn marginal_b(&self) -> HermitianOperator {
        let mut acc = HermitianOperator::zeros(self.dim_b());
        for (p, rho) in self.probs.iter().zip(&self.conditionals) {
            acc = acc.add(&rho.scale(*p));
        }
        acc
    }

    /// The block-diagonal joint operator.
    pub fn joint(&self) -> Result<DensityOperator> {
        let db = self.dim_b();
        let n = self.dim_x() * db;
        let mut m = CMatrix::zeros(n, n);
        for (x, (p, rho)) in self.probs.iter().zip(&self.conditionals).enumerate() {
            m.view_mut((x * db, x * db), (db, db))
                .copy_from(&(rho.matrix() * c(*p, 0.0)));
        }
        DensityOperator::new(HermitianOperator::new(m)?, StateKind::Normalized)
    }

    /// `I(X;B)` and `V(X;B)`.
    pub fn mutual_information_and_variance(&self) -> Result<(f64, f64)> {
        mutual_information_and_variance(&self.joint()?, self.label())
    }

    /// `ρ_XB^{⊗n}` regrouped as a cq state over `X^n`.
    pub fn n_copies(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        let joint = (self.dim_x() * self.dim_b()).checked_pow(n as u32);
        if joint.is_none_or(|d| d > MAX_JOINT_DIM) {
            return Err(Error::TooLarge(format!(
                "{n} copies of a {}×{} cq state exceed dimension {MAX_JOINT_DIM}",
                self.dim_x(),
                self.dim_b()
            )));
        }
        let mut probs = self.probs.clone();
        let mut conds = self.conditionals.clone();
        for _ in 1..n {
            let mut p2 = Vec::with_capacity(probs.len() * self.dim_x());
            let mut c2 = Vec::with_capacity(probs.len() * self.dim_x());
            for (p, rho) in probs.iter().zip(&conds) {
                for (q, tau) in self.probs.iter().zip(&self.conditionals) {
                    p2.push(p * q);
                    c2.push(rho.kron(tau));
                }
            }
            probs = p2;
            conds = c2;
        }
        let uniform = self.uniform;
        let mut out = Self::new(probs, conds)?;
        out.uniform = uniform;
        Ok(out)
    }
}

/// Measure `A` in the computational basis: `ρ_XB` with
/// `p(x) ρ_B^x = (⟨x| ⊗ I) ρ_AB (|x⟩ ⊗ I)`.
pub fn dephase_to_cq(rho_ab: &DensityOperator, label: BipartiteLabel) -> Result<CqState> {
    label.check(rho_ab.dim())?;
    let db = label.dim_b;
    let mut probs = Vec::with_capacity(label.dim_a);
    let mut conds = Vec::with_capacity(label.dim_a);
    for x in 0..label.dim_a {
        let block = rho_ab
            .matrix()
            .view((x * db, x * db), (db, db))
            .into_owned();
        let op = HermitianOperator::new(block)?;
        let p = op.trace().max(0.0);
        probs.push(p);
        conds.push(if p > 0.0 {
            DensityOperator::new(op.scale(1.0 / p), StateKind::Normalized)?
        } else {
            DensityOperator::maximally_mixed(db)
        });
    }
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    CqState::new(probs, conds)
}

fn check_eta(eps: f64, eta: f64) -> Result<()> {
    if !(0.0 < eta && eta < eps && eps < 1.0) {
        return Err(Error::Domain(format!(
            "need 0 < eta < eps < 1, got eta = {eta}, eps = {eps}"
        )));
    }
    Ok(())
}

/// `I^ε_min(X;B)` of a cq state, solved blockwise over `x`.
pub fn cq_min_mutual_info(cq: &CqState, eps: f64, opts: &SolverOptions) -> Result<f64> {
    let rho_b = cq.marginal_b();
    let rhos: Vec<HermitianOperator> = cq
        .probs
        .iter()
        .zip(&cq.conditionals)
        .map(|(p, r)| r.scale(*p))
        .collect();
    let sigmas: Vec<HermitianOperator> = cq.probs.iter().map(|p| rho_b.scale(*p)).collect();
    Ok(hypothesis_testing_blocks(&rhos, &sigmas, eps, opts)?.bits)
}

/// `⌊I^{ε−η}_min(X;B) − log2(4ε/η²)⌋` for a uniform cq state; may be negative.
pub fn one_shot_lower(cq: &CqState, eps: f64, eta: f64, opts: &SolverOptions) -> Result<f64> {
    if !cq.uniform {
        return Err(Error::NonUniformInput);
    }
    check_eta(eps, eta)?;
    let i = cq_min_mutual_info(cq, eps - eta, opts)?;
    Ok((i - (4.0 * eps / (eta * eta)).log2()).floor())
}

/// `η = 1/√n`, or `ε/2` for a single copy.
pub fn default_eta(eps: f64, n: usize) -> f64 {
    if n <= 1 {
        eps / 2.0
    } else {
        1.0 / (n as f64).sqrt()
    }
}

/// The one-shot lower bound applied to `ρ_XB^{⊗n}`, in bits per copy.
pub fn one_shot_lower_n_copies(
    cq: &CqState,
    eps: f64,
    eta: f64,
    n: usize,
    opts: &SolverOptions,
) -> Result<f64> {
    let big = cq.n_copies(n)?;
    Ok(one_shot_lower(&big, eps, eta, opts)? / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBound {
    pub n: u64,
    /// Matched two-term lower curve; present only for uniform cq inputs.
    pub lower_bits_per_copy: Option<f64>,
    pub upper_bits_per_copy: f64,
    pub eps: f64,
}

#[derive(Debug, Clone)]
pub enum RateInput {
    Bipartite(DensityOperator, BipartiteLabel),
    Cq(CqState),
}

/// The first- and second-order terms behind each curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveMoments {
    pub upper_mean: f64,
    pub upper_variance: f64,
    pub lower: Option<(f64, f64)>,
}

/// Moments for [`rate_curves`]. A bipartite input gets the product-state
/// relaxation `I(A;B)`, `V(A;B)` for the upper curve, and the lower curve of
/// its computational-basis dephasing on `A` when that cq state is uniform.
pub fn curve_moments(input: &RateInput) -> Result<CurveMoments> {
    match input {
        RateInput::Bipartite(rho, label) => {
            let (i, v) = mutual_information_and_variance(rho, *label)?;
            let cq = dephase_to_cq(rho, *label)?;
            let lower = if cq.uniform {
                Some(cq.mutual_information_and_variance()?)
            } else {
                None
            };
            Ok(CurveMoments {
                upper_mean: i,
                upper_variance: v,
                lower,
            })
        }
        RateInput::Cq(cq) => {
            let (i, v) = cq.mutual_information_and_variance()?;
            Ok(CurveMoments {
                upper_mean: i,
                upper_variance: v,
                lower: cq.uniform.then_some((i, v)),
            })
        }
    }
}

/// Two-term per-copy curves `I + √(V/n) Φ⁻¹(ε)` at each `n`.
pub fn rate_curves(input: &RateInput, eps: f64, n_list: &[u64]) -> Result<Vec<RateBound>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("epsilon {eps} outside (0, 1)")));
    }
    let m = curve_moments(input)?;
    n_list
        .iter()
        .map(|&n| {
            let upper = expansion_from_moments(
                m.upper_mean,
                m.upper_variance,
                eps,
                n,
                ExpansionTarget::Dminf,
            )?
            .value_per_copy;
            let lower = match (input, m.lower) {
                // same formula for uniform cq inputs, so the value is copied
                (RateInput::Cq(_), Some(_)) => Some(upper),
                (_, Some((i, v))) => Some(
                    expansion_from_moments(i, v, eps, n, ExpansionTarget::Dminf)?.value_per_copy,
                ),
                (_, None) => None,
            };
            Ok(RateBound {
                n,
                lower_bits_per_copy: lower,
                upper_bits_per_copy: upper,
                eps,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceBound {
    pub bits_per_copy: f64,
    pub first_order: f64,
    pub variance: f64,
    /// Indices of the free states attaining the first-order minimum.
    pub argmin: Vec<usize>,
}

/// `min_σ D(ρ‖σ) + √(V/n) Φ⁻¹(ε)` over a finite free set, with `V` the
/// infimum over minimizers when `ε ≥ 1/2` and the supremum otherwise.
pub fn generic_resource_bound(
    rho: &DensityOperator,
    free_states: &[HermitianOperator],
    eps: f64,
    n: u64,
) -> Result<ResourceBound> {
    if free_states.is_empty() {
        return Err(Error::EmptyFreeSet);
    }
    if !(eps > 0.0 && eps < 1.0) || n == 0 {
        return Err(Error::Domain(format!(
            "need eps in (0, 1) and n ≥ 1, got {eps}, {n}"
        )));
    }
    let ds: Vec<f64> = free_states
        .iter()
        .map(|s| relative_entropy(rho, s).map(|d| d.bits))
        .collect::<Result<_>>()?;
    let min = ds.iter().copied().fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Ok(ResourceBound {
            bits_per_copy: f64::INFINITY,
            first_order: f64::INFINITY,
            variance: f64::NAN,
            argmin: (0..free_states.len()).collect(),
        });
    }
    let argmin: Vec<usize> = (0..ds.len())
        .filter(|&k| ds[k] <= min + ARGMIN_TOL)
        .collect();
    let vs: Vec<f64> = argmin
        .iter()
        .map(|&k| relative_entropy_variance(rho, &free_states[k]).map(|v| v.bits))
        .collect::<Result<_>>()?;
    let variance = if eps >= 0.5 {
        vs.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        vs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    let bits = min + (variance.max(0.0) / n as f64).sqrt() * gaussian_quantile(eps)?;
    Ok(ResourceBound {
        bits_per_copy: bits,
        first_order: min,
        variance,
        argmin,
    })
}

/// Largest `F(Φ̄^d, σ_A ⊗ σ_B)` over random subnormalized product pairs.
pub fn max_product_fidelity<R: Rng + ?Sized>(rng: &mut R, d: usize, samples: usize) -> Result<f64> {
    let (phi, _) = maximally_correlated(d)?;
    let mut best = 0.0f64;
    for _ in 0..samples {
        let a = random_subnormalized(rng, d);
        let b = random_subnormalized(rng, d);
        best = best.max(fidelity(&phi, &a.op().kron(b.op()))?);
    }
    Ok(best)
}

/// Points of the isotropic-state rate figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Row {
    pub n: u64,
    pub lower_curve: f64,
    pub upper_curve: f64,
    pub lower_asymptote: f64,
    pub upper_asymptote: f64,
}

/// Rate curves of the isotropic state at `n_list`. The upper line uses the
/// product-state relaxation, `I(A;B)`.
pub fn fig3_rows(d: usize, p: f64, eps: f64, n_list: &[u64]) -> Result<Vec<Fig3Row>> {
    let (rho, label) = isotropic_state(d, p)?;
    let input = RateInput::Bipartite(rho, label);
    let m = curve_moments(&input)?;
    let lower_asymptote = m
        .lower
        .map(|l| l.0)
        .ok_or_else(|| Error::Domain("dephased isotropic state is not uniform".into()))?;
    Ok(rate_curves(&input, eps, n_list)?
        .into_iter()
        .map(|r| Fig3Row {
            n: r.n,
            lower_curve: r.lower_bits_per_copy.unwrap_or(f64::NAN),
            upper_curve: r.upper_bits_per_copy,
            lower_asymptote,
            upper_asymptote: m.upper_mean,
        })
        .collect())
}

/// `count` integers log-spaced between `lo` and `hi`, deduplicated.
pub fn log_spaced_n(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    if count <= 1 || lo >= hi {
        return vec![lo];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<u64> = (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp().round() as u64)
        .collect();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::hypothesis_testing;
    use crate::divergence::entropy;
    use crate::operator::{random_state, seeded_rng, Subsystem};
    use crate::oracles::{neyman_pearson, ClassicalDistribution};

    fn h2(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    #[test]
    fn isotropic_examples() {
        let (rho, _) = isotropic_state(2, 0.3).unwrap();
        assert!((rho.max_eigenvalue() - 0.775).abs() < 1e-12);
        let (phi, _) = isotropic_state(3, 0.0).unwrap();
        assert!((phi.max_eigenvalue() - 1.0).abs() < 1e-12);
        let (mixed, _) = isotropic_state(2, 1.0).unwrap();
        assert!(mixed.max_abs_diff(&HermitianOperator::identity(4).scale(0.25)) < 1e-15);
        assert!(isotropic_state(1, 0.3).is_err());
        assert!(isotropic_state(2, 1.5).is_err());
    }

    #[test]
    fn dephasing_examples() {
        let (rho, label) = isotropic_state(2, 0.3).unwrap();
        let cq = dephase_to_cq(&rho, label).unwrap();
        assert!(cq.uniform);
        for c in &cq.conditionals {
            let e = c.eigenvalues();
            assert!((e[0] - 0.15).abs() < 1e-12 && (e[1] - 0.85).abs() < 1e-12);
        }
        let (i, _) = cq.mutual_information_and_variance().unwrap();
        assert!((i - (1.0 - h2(0.15))).abs() < 1e-10);

        let mut rng = seeded_rng(81);
        let a = random_state(&mut rng, 2);
        let b = random_state(&mut rng, 3);
        let cq = dephase_to_cq(&a.kron(&b), BipartiteLabel::new(2, 3).unwrap()).unwrap();
        for c in &cq.conditionals {
            assert!(c.max_abs_diff(&b) < 1e-12);
        }

        let (phi, l) = maximally_correlated(2).unwrap();
        let cq = dephase_to_cq(&phi, l).unwrap();
        assert!(cq.joint().unwrap().max_abs_diff(&phi) < 1e-15);
        assert!(matches!(
            dephase_to_cq(&phi, BipartiteLabel::new(3, 2).unwrap()),
            Err(Error::BadFactorization { .. }) | Err(Error::DimensionMismatch(..))
        ));
    }

    #[test]
    fn one_shot_examples() {
        let opts = SolverOptions::default();
        let (phi, l) = maximally_correlated(2).unwrap();
        let cq = dephase_to_cq(&phi, l).unwrap();
        let v = one_shot_lower(&cq, 0.2, 0.1, &opts).unwrap();
        let p = ClassicalDistribution::new(vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let q = ClassicalDistribution::new(vec![0.25; 4]).unwrap();
        let np = neyman_pearson(&p, &q, 0.1).unwrap().bits;
        assert_eq!(v, (np - 80f64.log2()).floor());

        let mut rng = seeded_rng(82);
        let b = random_state(&mut rng, 2);
        let prod = CqState::uniform(vec![b.clone(), b]).unwrap();
        let (eps, eta) = (0.3, 0.05);
        let v = one_shot_lower(&prod, eps, eta, &opts).unwrap();
        let expect = ((1.0 / (1.0 - eps + eta)).log2() - (4.0 * eps / (eta * eta)).log2()).floor();
        assert_eq!(v, expect);
        assert!(v <= 0.0);

        let skewed = CqState::new(vec![0.3, 0.7], cq.conditionals.clone()).unwrap();
        assert!(matches!(
            one_shot_lower(&skewed, 0.2, 0.1, &opts),
            Err(Error::NonUniformInput)
        ));
        assert!(matches!(
            one_shot_lower(&cq, 0.2, 0.2, &opts),
            Err(Error::Domain(_))
        ));
        // the penalty log2(4ε/η²) grows without bound only as η → 0
        let tiny = one_shot_lower(&cq, 0.2, 1e-6, &opts).unwrap();
        let moderate = one_shot_lower(&cq, 0.2, 0.1, &opts).unwrap();
        assert!(tiny < moderate - 20.0);
    }

    #[test]
    fn n_copy_program_guards_dimension() {
        let (rho, l) = isotropic_state(2, 0.3).unwrap();
        let cq = dephase_to_cq(&rho, l).unwrap();
        let opts = SolverOptions::default();
        let v1 = one_shot_lower_n_copies(&cq, 0.3, default_eta(0.3, 1), 1, &opts).unwrap();
        let v2 = one_shot_lower_n_copies(&cq, 0.3, 0.1, 2, &opts).unwrap();
        assert!(v1.is_finite() && v2.is_finite());
        assert!(matches!(cq.n_copies(7), Err(Error::TooLarge(_))));
        assert_eq!(cq.n_copies(3).unwrap().dim_x(), 8);
    }

    #[test]
    fn rate_curve_examples() {
        let (rho, label) = isotropic_state(2, 0.3).unwrap();
        let rows = fig3_rows(2, 0.3, 1e-4, &[100, 1000, 1_000_000]).unwrap();
        let lower = 1.0 - h2(0.15);
        let ab = rho.partial_trace(label, Subsystem::A).unwrap();
        let upper = 2.0 * entropy(&ab) - entropy(&rho);
        assert!((rows[0].lower_asymptote - lower).abs() < 1e-10);
        assert!((rows[0].upper_asymptote - upper).abs() < 1e-10);
        assert!((upper - 0.8742).abs() < 1e-4);
        for w in rows.windows(2) {
            assert!(w[1].lower_curve > w[0].lower_curve);
        }
        assert!(rows.iter().all(|r| r.lower_curve < r.lower_asymptote));

        let cq = dephase_to_cq(&rho, label).unwrap();
        for r in rate_curves(&RateInput::Cq(cq), 0.1, &[10, 100]).unwrap() {
            assert_eq!(
                r.lower_bits_per_copy.unwrap().to_bits(),
                r.upper_bits_per_copy.to_bits()
            );
        }
        assert!(rate_curves(&RateInput::Bipartite(rho, label), 1.0, &[10]).is_err());
    }

    #[test]
    fn generic_bound_examples() {
        let mut rng = seeded_rng(83);
        let rho = random_state(&mut rng, 2);
        let only = generic_resource_bound(&rho, &[rho.op().clone()], 0.2, 50).unwrap();
        assert!(only.bits_per_copy.abs() < 1e-9);

        let (ab, label) = isotropic_state(2, 0.3).unwrap();
        let prod = crate::divergence::product_of_marginals(&ab, label).unwrap();
        let g = generic_resource_bound(&ab, &[prod.op().clone()], 0.1, 200).unwrap();
        let r = rate_curves(&RateInput::Bipartite(ab, label), 0.1, &[200]).unwrap();
        assert!((g.bits_per_copy - r[0].upper_bits_per_copy).abs() < 1e-12);

        let s1 = random_state(&mut rng, 2);
        let s2 = random_state(&mut rng, 2);
        let g = generic_resource_bound(&rho, &[s1.op().clone(), s2.op().clone()], 0.3, 10).unwrap();
        let d1 = relative_entropy(&rho, &s1).unwrap().bits;
        let d2 = relative_entropy(&rho, &s2).unwrap().bits;
        assert_eq!(g.argmin, vec![if d1 < d2 { 0 } else { 1 }]);
        assert!((g.first_order - d1.min(d2)).abs() < 1e-15);
        assert!(matches!(
            generic_resource_bound(&rho, &[], 0.3, 10),
            Err(Error::EmptyFreeSet)
        ));
    }

    #[test]
    fn product_fidelity_is_at_most_one_over_d() {
        let mut rng = seeded_rng(84);
        for d in 2..=4 {
            assert!(max_product_fidelity(&mut rng, d, 200).unwrap() <= 1.0 / d as f64 + 1e-9);
        }
    }

    /// Operator `σ_A ⊗ σ_{XB}` laid out on `X ⊗ A ⊗ B`.
    fn interleave(
        sigma_a: &HermitianOperator,
        sigma_xb: &HermitianOperator,
        dx: usize,
        db: usize,
    ) -> HermitianOperator {
        let da = sigma_a.dim();
        let n = dx * da * db;
        let idx = |x: usize, a: usize, b: usize| (x * da + a) * db + b;
        let mut m = CMatrix::zeros(n, n);
        for x in 0..dx {
            for a in 0..da {
                for b in 0..db {
                    for x2 in 0..dx {
                        for a2 in 0..da {
                            for b2 in 0..db {
                                m[(idx(x, a, b), idx(x2, a2, b2))] = sigma_a.matrix()[(a, a2)]
                                    * sigma_xb.matrix()[(x * db + b, x2 * db + b2)];
                            }
                        }
                    }
                }
            }
        }
        HermitianOperator::new(m).unwrap()
    }

    #[test]
    fn classical_register_costs_at_most_log_dx() {
        let mut rng = seeded_rng(85);
        let opts = SolverOptions::default();
        let (dx, da, db) = (2, 2, 2);
        for _ in 0..5 {
            let probs = [0.35, 0.65];
            let mut joint = HermitianOperator::zeros(dx * da * db);
            for (x, p) in probs.iter().enumerate() {
                let mut reg = vec![0.0; dx];
                reg[x] = *p;
                let part = HermitianOperator::diag(&reg).kron(&random_state(&mut rng, da * db));
                joint = joint.add(&part);
            }
            let rho = DensityOperator::new(joint, StateKind::Normalized).unwrap();
            let sa = random_subnormalized(&mut rng, da);
            let sxb = random_subnormalized(&mut rng, dx * db);
            let lhs_sigma = interleave(&sa, &sxb, dx, db);
            let xb = BipartiteLabel::new(dx, db).unwrap();
            let sb = sxb.partial_trace(xb, Subsystem::B).unwrap();
            let rhs_sigma = HermitianOperator::identity(dx)
                .scale(1.0 / dx as f64)
                .kron(&sa)
                .kron(&sb);
            let eps = 0.2;
            let lhs = hypothesis_testing(&rho, &lhs_sigma, eps, &opts)
                .unwrap()
                .bits
                + (dx as f64).log2();
            let rhs = hypothesis_testing(&rho, &rhs_sigma, eps, &opts)
                .unwrap()
                .bits;
            assert!(lhs >= rhs - 1e-6, "{lhs} < {rhs}");
        }
    }

    #[test]
    fn log_spaced_n_endpoints() {
        let v = log_spaced_n(100, 1_000_000, 50);
        assert_eq!(v[0], 100);
        assert_eq!(*v.last().unwrap(), 1_000_000);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }
}
