//! Closed-form divergences evaluated from spectra. All values are in bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{fidelity, BipartiteLabel, DensityOperator, HermitianOperator, Subsystem};

/// Projector leakage above which `supp(ρ) ⊄ supp(σ)`.
pub const SUPPORT_TOL: f64 = 1e-9;

/// A divergence in bits, possibly `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceValue {
    pub bits: f64,
    pub support_condition_met: bool,
}

impl DivergenceValue {
    fn finite(bits: f64) -> Self {
        Self {
            bits,
            support_condition_met: true,
        }
    }

    fn infinite() -> Self {
        Self {
            bits: f64::INFINITY,
            support_condition_met: false,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.bits.is_infinite()
    }
}

/// True when `(I − Π_σ) ρ (I − Π_σ)` is negligible.
pub fn support_contained(rho: &HermitianOperator, sigma: &HermitianOperator) -> bool {
    let n = sigma.dim();
    let complement = HermitianOperator::identity(n).sub(&sigma.support_projector());
    let leak = rho.congruence(complement.matrix());
    leak.eigenvalues()
        .iter()
        .fold(0.0f64, |a, &l| a.max(l.abs()))
        <= SUPPORT_TOL
}

fn check_pair(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<()> {
    rho.require_same_dim(sigma)?;
    sigma.require_psd()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        Err(Error::BadAlpha(alpha))
    } else {
        Ok(())
    }
}

/// von Neumann entropy in bits.
pub fn entropy(rho: &HermitianOperator) -> f64 {
    rho.eigenvalues()
        .iter()
        .filter(|&&l| l > crate::operator::CLIP)
        .map(|&l| -l * l.log2())
        .sum()
}

/// The operator `log2 ρ − log2 σ` (logs on supports).
fn log_likelihood(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<HermitianOperator> {
    let (lr, _) = rho.log2_on_support()?;
    let (ls, _) = sigma.log2_on_support()?;
    Ok(lr.sub(&ls))
}

/// `D(ρ‖σ) = Tr[ρ (log2 ρ − log2 σ)]`, `+∞` when the support condition fails.
pub fn relative_entropy(
    rho: &DensityOperator,
    sigma: &HermitianOperator,
) -> Result<DivergenceValue> {
    check_pair(rho, sigma)?;
    if !support_contained(rho, sigma) {
        return Ok(DivergenceValue::infinite());
    }
    let l = log_likelihood(rho, sigma)?;
    Ok(DivergenceValue::finite(rho.inner(&l)))
}

/// `V(ρ‖σ) = Tr[ρ (log2 ρ − log2 σ)²] − D(ρ‖σ)²`.
pub fn relative_entropy_variance(
    rho: &DensityOperator,
    sigma: &HermitianOperator,
) -> Result<DivergenceValue> {
    check_pair(rho, sigma)?;
    if !support_contained(rho, sigma) {
        return Err(Error::SupportViolation);
    }
    let l = log_likelihood(rho, sigma)?;
    let mean = rho.inner(&l);
    let l2 = HermitianOperator::from_hermitian_unchecked(l.matrix() * l.matrix());
    Ok(DivergenceValue::finite(rho.inner(&l2) - mean * mean))
}

/// Sandwiched Rényi relative entropy of order `α ∈ (0,1) ∪ (1,∞)`.
pub fn sandwiched_renyi(
    rho: &DensityOperator,
    sigma: &HermitianOperator,
    alpha: f64,
) -> Result<DivergenceValue> {
    check_alpha(alpha)?;
    check_pair(rho, sigma)?;
    let contained = support_contained(rho, sigma);
    if alpha > 1.0 && !contained {
        return Ok(DivergenceValue::infinite());
    }
    let gamma = (1.0 - alpha) / (2.0 * alpha);
    let s = sigma.power(gamma)?;
    let inner = rho.congruence(s.matrix()).psd_part();
    let q: f64 = inner
        .eigenvalues()
        .iter()
        .map(|&l| if l > 0.0 { l.powf(alpha) } else { 0.0 })
        .sum();
    Ok(DivergenceValue {
        bits: q.log2() / (alpha - 1.0),
        support_condition_met: contained,
    })
}

/// Petz–Rényi relative entropy `(1/(α−1)) log2 Tr[ρ^α σ^{1−α}]`.
pub fn petz_renyi(
    rho: &DensityOperator,
    sigma: &HermitianOperator,
    alpha: f64,
) -> Result<DivergenceValue> {
    check_alpha(alpha)?;
    check_pair(rho, sigma)?;
    let contained = support_contained(rho, sigma);
    if alpha > 1.0 && !contained {
        return Ok(DivergenceValue::infinite());
    }
    let q = rho.power(alpha)?.inner(&sigma.power(1.0 - alpha)?);
    Ok(DivergenceValue {
        bits: q.log2() / (alpha - 1.0),
        support_condition_met: contained,
    })
}

/// Max-relative entropy: log2 of the largest eigenvalue of
/// `σ^{-1/2} ρ σ^{-1/2}` on the support of `σ`.
pub fn d_max(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<DivergenceValue> {
    check_pair(rho, sigma)?;
    if !support_contained(rho, sigma) {
        return Ok(DivergenceValue::infinite());
    }
    let inv_sqrt = sigma.power(-0.5)?;
    let ratio = rho.congruence(inv_sqrt.matrix());
    Ok(DivergenceValue::finite(ratio.max_eigenvalue().log2()))
}

/// `−log2 Tr[Π_ρ σ]`.
pub fn d_min_projector(
    rho: &DensityOperator,
    sigma: &HermitianOperator,
) -> Result<DivergenceValue> {
    check_pair(rho, sigma)?;
    let overlap = rho.support_projector().inner(sigma);
    Ok(if overlap > 0.0 {
        DivergenceValue::finite(-overlap.log2())
    } else {
        DivergenceValue::infinite()
    })
}

/// `D_{min,F}(ρ‖σ) = −log2 F(ρ,σ)`.
pub fn d_min_f(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<DivergenceValue> {
    check_pair(rho, sigma)?;
    let f = fidelity(rho, sigma)?;
    Ok(if f > 0.0 {
        DivergenceValue::finite(-f.log2())
    } else {
        DivergenceValue::infinite()
    })
}

/// Product of marginals `ρ_A ⊗ ρ_B`.
pub fn product_of_marginals(
    rho_ab: &DensityOperator,
    label: BipartiteLabel,
) -> Result<DensityOperator> {
    let a = rho_ab.partial_trace(label, Subsystem::A)?;
    let b = rho_ab.partial_trace(label, Subsystem::B)?;
    Ok(a.kron(&b))
}

/// Mutual information and mutual information variance,
/// `D(ρ_AB‖ρ_A⊗ρ_B)` and `V(ρ_AB‖ρ_A⊗ρ_B)`.
pub fn mutual_information_and_variance(
    rho_ab: &DensityOperator,
    label: BipartiteLabel,
) -> Result<(f64, f64)> {
    let prod = product_of_marginals(rho_ab, label)?;
    let i = relative_entropy(rho_ab, &prod)?.bits;
    let v = relative_entropy_variance(rho_ab, &prod)?.bits;
    Ok((i, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{
        c, random_channel, random_psd, random_state, seeded_rng, StateKind, C64,
    };
    use proptest::prelude::*;

    fn diag_state(p: &[f64]) -> DensityOperator {
        DensityOperator::classical(p).unwrap()
    }

    fn kl(p: &[f64], q: &[f64]) -> f64 {
        p.iter()
            .zip(q)
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, b)| a * (a / b).log2())
            .sum()
    }

    fn kl_variance(p: &[f64], q: &[f64]) -> f64 {
        let d = kl(p, q);
        p.iter()
            .zip(q)
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, b)| a * ((a / b).log2() - d).powi(2))
            .sum()
    }

    #[test]
    fn relative_entropy_examples() {
        let mut rng = seeded_rng(1);
        let rho = random_state(&mut rng, 3);
        assert!(relative_entropy(&rho, &rho).unwrap().bits.abs() < 1e-10);

        let p = [0.5, 0.5];
        let q = [0.25, 0.75];
        let d = relative_entropy(&diag_state(&p), &HermitianOperator::diag(&q)).unwrap();
        assert!((d.bits - kl(&p, &q)).abs() < 1e-12);
        assert!((d.bits - 0.2075).abs() < 1e-4);

        let zero = diag_state(&[1.0, 0.0]);
        let one = HermitianOperator::diag(&[0.0, 1.0]);
        let inf = relative_entropy(&zero, &one).unwrap();
        assert!(inf.is_infinite() && !inf.support_condition_met);
    }

    #[test]
    fn variance_examples() {
        let mut rng = seeded_rng(2);
        let rho = random_state(&mut rng, 3);
        assert!(relative_entropy_variance(&rho, &rho).unwrap().bits.abs() < 1e-10);

        let p = [0.5, 0.5];
        let q = [0.9, 0.1];
        let v = relative_entropy_variance(&diag_state(&p), &HermitianOperator::diag(&q)).unwrap();
        assert!((v.bits - kl_variance(&p, &q)).abs() < 1e-12);
        assert!((v.bits - 2.512).abs() < 1e-3);

        let sigma = random_state(&mut rng, 2);
        let rho = random_state(&mut rng, 2);
        let v1 = relative_entropy_variance(&rho, &sigma).unwrap().bits;
        let v2 = relative_entropy_variance(&rho.kron(&rho), &sigma.kron(&sigma))
            .unwrap()
            .bits;
        assert!((v2 - 2.0 * v1).abs() < 1e-8);

        let zero = diag_state(&[1.0, 0.0]);
        assert!(matches!(
            relative_entropy_variance(&zero, &HermitianOperator::diag(&[0.0, 1.0])),
            Err(Error::SupportViolation)
        ));
    }

    #[test]
    fn sandwiched_examples() {
        let mut rng = seeded_rng(3);
        for _ in 0..10 {
            let rho = random_state(&mut rng, 3);
            let sigma = random_psd(&mut rng, 3);
            let half = sandwiched_renyi(&rho, &sigma, 0.5).unwrap().bits;
            let dminf = d_min_f(&rho, &sigma).unwrap().bits;
            assert!((half - dminf).abs() < 1e-9);

            let d = relative_entropy(&rho, &sigma).unwrap().bits;
            let below = sandwiched_renyi(&rho, &sigma, 0.999).unwrap().bits;
            let above = sandwiched_renyi(&rho, &sigma, 1.001).unwrap().bits;
            assert!(below <= d + 1e-9 && d <= above + 1e-9);
            assert!((below - d).abs() < 1e-2 && (above - d).abs() < 1e-2);
        }
        let p = [0.3, 0.7];
        let q = [0.6, 0.4];
        let oracle: f64 = p.iter().zip(&q).map(|(a, b)| a * a / b).sum::<f64>().log2();
        let d2 = sandwiched_renyi(&diag_state(&p), &HermitianOperator::diag(&q), 2.0).unwrap();
        assert!((d2.bits - oracle).abs() < 1e-12);

        assert!(matches!(
            sandwiched_renyi(&diag_state(&p), &HermitianOperator::diag(&q), 1.0),
            Err(Error::BadAlpha(_))
        ));
        let pure = diag_state(&[1.0, 0.0]);
        let inf = sandwiched_renyi(&pure, &HermitianOperator::diag(&[0.0, 1.0]), 2.0).unwrap();
        assert!(inf.is_infinite());
    }

    #[test]
    fn petz_examples() {
        let p = [0.5, 0.5];
        let q = [0.9, 0.1];
        let rho = diag_state(&p);
        let sigma = HermitianOperator::diag(&q);
        for alpha in [0.3, 0.5, 1.5, 2.0] {
            let a = petz_renyi(&rho, &sigma, alpha).unwrap().bits;
            let b = sandwiched_renyi(&rho, &sigma, alpha).unwrap().bits;
            assert!((a - b).abs() < 1e-12);
        }
        let half = petz_renyi(&rho, &sigma, 0.5).unwrap().bits;
        let oracle = -2.0 * (0.45f64.sqrt() + 0.05f64.sqrt()).log2();
        assert!((half - oracle).abs() < 1e-12);

        let mut rng = seeded_rng(4);
        let r = random_state(&mut rng, 3);
        assert!(petz_renyi(&r, &r, 0.7).unwrap().bits.abs() < 1e-10);
    }

    #[test]
    fn d_max_examples() {
        let zero = diag_state(&[1.0, 0.0]);
        let mixed = HermitianOperator::identity(2).scale(0.5);
        assert!((d_max(&zero, &mixed).unwrap().bits - 1.0).abs() < 1e-12);

        let mut rng = seeded_rng(5);
        let r = random_state(&mut rng, 3);
        assert!(d_max(&r, &r).unwrap().bits.abs() < 1e-9);

        let v = d_max(
            &diag_state(&[0.5, 0.5]),
            &HermitianOperator::diag(&[0.25, 0.75]),
        )
        .unwrap();
        assert!((v.bits - 1.0).abs() < 1e-12);
        assert!(d_max(&zero, &HermitianOperator::diag(&[0.0, 1.0]))
            .unwrap()
            .is_infinite());
    }

    #[test]
    fn d_min_examples() {
        let mut rng = seeded_rng(6);
        let full = random_state(&mut rng, 2);
        let sigma = random_psd(&mut rng, 2);
        let v = d_min_projector(&full, &sigma).unwrap().bits;
        assert!((v + sigma.trace().log2()).abs() < 1e-10);

        let zero = diag_state(&[1.0, 0.0]);
        let s = HermitianOperator::diag(&[0.9, 0.1]);
        assert!((d_min_projector(&zero, &s).unwrap().bits + 0.9f64.log2()).abs() < 1e-12);

        let ket = [c(0.6, 0.0), C64::new(0.0, 0.8)];
        let pure = DensityOperator::pure(&ket).unwrap();
        let sigma = random_psd(&mut rng, 2);
        let a = d_min_projector(&pure, &sigma).unwrap().bits;
        let b = d_min_f(&pure, &sigma).unwrap().bits;
        assert!((a - b).abs() < 1e-10);

        let r = random_state(&mut rng, 3);
        assert!(d_min_f(&r, &r).unwrap().bits.abs() < 1e-9);
        let v = d_min_f(
            &diag_state(&[0.5, 0.5]),
            &HermitianOperator::diag(&[0.9, 0.1]),
        )
        .unwrap();
        assert!((v.bits + 0.8f64.log2()).abs() < 1e-12);
        assert!((v.bits - 0.3219).abs() < 1e-4);
    }

    #[test]
    fn mutual_information_examples() {
        let label = BipartiteLabel::new(2, 3).unwrap();
        let mut rng = seeded_rng(7);
        let prod = random_state(&mut rng, 2).kron(&random_state(&mut rng, 3));
        let (i, v) = mutual_information_and_variance(&prod, label).unwrap();
        assert!(i.abs() < 1e-9 && v.abs() < 1e-9);

        let l2 = BipartiteLabel::new(2, 2).unwrap();
        let phibar = diag_state(&[0.5, 0.0, 0.0, 0.5]);
        let (i, _) = mutual_information_and_variance(&phibar, l2).unwrap();
        assert!((i - 1.0).abs() < 1e-12);

        // dephased isotropic d=2, p=0.3: diag((1-p)/2 + p/4, p/4, p/4, (1-p)/2 + p/4)
        let p = 0.3;
        let big = (1.0 - p) / 2.0 + p / 4.0;
        let small = p / 4.0;
        let cq = diag_state(&[big, small, small, big]);
        let h2 = |x: f64| -x * x.log2() - (1.0 - x) * (1.0 - x).log2();
        let (i, _) = mutual_information_and_variance(&cq, l2).unwrap();
        assert!((i - (1.0 - h2(0.15))).abs() < 1e-12);
        assert!((i - 0.3902).abs() < 1e-4);
    }

    #[test]
    fn d_min_f_scaling_is_exact() {
        let mut rng = seeded_rng(8);
        let rho = random_state(&mut rng, 3);
        let sigma = random_psd(&mut rng, 3);
        for cst in [0.1, 0.5, 3.0] {
            let a = d_min_f(&rho, &sigma.scale(cst)).unwrap().bits;
            let b = d_min_f(&rho, &sigma).unwrap().bits - cst.log2();
            assert!((a - b).abs() < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn alpha_monotone_and_bounded_by_dmax(seed in any::<u64>(), dim in 2usize..4) {
            let mut rng = seeded_rng(seed);
            let rho = random_state(&mut rng, dim);
            let sigma = random_psd(&mut rng, dim);
            let alphas = [0.5, 0.8, 1.2, 2.0, 5.0];
            let vals: Vec<f64> = alphas
                .iter()
                .map(|&a| sandwiched_renyi(&rho, &sigma, a).unwrap().bits)
                .collect();
            for w in vals.windows(2) {
                prop_assert!(w[0] <= w[1] + 1e-9);
            }
            let dm = d_max(&rho, &sigma).unwrap().bits;
            for v in vals {
                prop_assert!(v <= dm + 1e-9);
            }
        }

        #[test]
        fn data_processing(seed in any::<u64>(), dim in 2usize..4, rank in 1usize..4) {
            let mut rng = seeded_rng(seed);
            let rho = random_state(&mut rng, dim);
            let sigma = random_psd(&mut rng, dim);
            let ch = random_channel(&mut rng, dim, 2, rank);
            let nr = ch.apply_state(&rho).unwrap();
            let ns = ch.apply(&sigma).unwrap();
            let before = relative_entropy(&rho, &sigma).unwrap().bits;
            let after = relative_entropy(&nr, &ns).unwrap().bits;
            prop_assert!(after <= before + 1e-8);
            for alpha in [0.5, 0.75, 1.5, 3.0] {
                let b = sandwiched_renyi(&rho, &sigma, alpha).unwrap().bits;
                let a = sandwiched_renyi(&nr, &ns, alpha).unwrap().bits;
                prop_assert!(a <= b + 1e-8);
            }
            prop_assert!(d_max(&nr, &ns).unwrap().bits <= d_max(&rho, &sigma).unwrap().bits + 1e-8);
        }
    }

    #[test]
    fn subnormalized_input_is_accepted_as_first_argument() {
        let sub = HermitianOperator::diag(&[0.2, 0.3])
            .into_density(StateKind::Subnormalized)
            .unwrap();
        let v = d_max(&sub, &HermitianOperator::diag(&[0.5, 0.5])).unwrap();
        assert!((v.bits - 0.6f64.log2()).abs() < 1e-12);
    }
}
