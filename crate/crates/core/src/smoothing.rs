//! Smoothed quantities defined by optimization: smooth max-relative
//! entropy, smooth conditional min-entropy, and a certified bracket on the
//! smooth F-min-relative entropy.
//!
//! Every reported bound is evaluated spectrally at a witness that has been
//! revalidated outside the solver, so solver slack never leaks into a bound.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::f_eps_delta;
use crate::conic::{ConicProgram, MatExpr, SolveStatus, SolverOptions};
use crate::divergence::{d_max, d_min_f};
use crate::error::{Error, Result};
use crate::operator::{
    fidelity, random_pure_state, seeded_rng, BipartiteLabel, CMatrix, DensityOperator,
    HermitianOperator, StateKind, Subsystem,
};

/// Slack allowed on the fidelity constraint of a returned witness.
pub const WITNESS_FIDELITY_TOL: f64 = 1e-6;
/// Slack allowed on the trace of a returned witness.
pub const WITNESS_TRACE_TOL: f64 = 1e-8;
/// Slack for `lower ≤ upper` inside a bracket.
pub const BRACKET_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothingSet {
    Subnormalized,
    Normalized,
}

#[derive(Debug, Clone)]
pub struct SmoothingResult {
    pub value_bits: f64,
    /// Value of the separately solved dual program, in bits.
    pub dual_bits: Option<f64>,
    /// Objective evaluated spectrally at the validated witness.
    pub certified_bits: Option<f64>,
    pub witness_state: DensityOperator,
    /// `F(ρ̃, ρ)` recomputed from the witness.
    pub witness_fidelity: f64,
    pub aux_witnesses: BTreeMap<String, CMatrix>,
    pub status: SolveStatus,
    /// Relative primal/dual gap of the underlying programs.
    pub gap: Option<f64>,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain(format!("epsilon {eps} outside [0, 1)")));
    }
    Ok(())
}

fn check_inputs(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<()> {
    rho.require_same_dim(sigma)?;
    rho.require_psd()?;
    sigma.require_psd()
}

fn relative_gap(p: f64, d: f64) -> f64 {
    (p - d).abs() / (1.0 + p.abs())
}

fn scalar_matrix(v: f64) -> CMatrix {
    CMatrix::from_element(1, 1, crate::operator::c(v, 0.0))
}

/// Project a solver matrix into `D_≤` (or onto unit trace) and push its
/// fidelity with `rho` up to `target` by mixing toward `rho`. Root
/// fidelity is concave, so `t = (√target − √F)/(1 − √F)` suffices.
pub fn repair_witness(
    raw: &HermitianOperator,
    rho: &HermitianOperator,
    target: f64,
    kind: StateKind,
) -> Result<(DensityOperator, f64)> {
    let mut t = raw.psd_part();
    let tr = t.trace();
    match kind {
        StateKind::Normalized if tr > 0.0 => t = t.scale(1.0 / tr),
        StateKind::Normalized => t = rho.clone(),
        StateKind::Subnormalized if tr > 1.0 => t = t.scale(1.0 / tr),
        StateKind::Subnormalized => {}
    }
    let mut f = fidelity(&t, rho)?;
    if f < target && kind == StateKind::Subnormalized {
        let room = 1.0 / t.trace().max(f64::MIN_POSITIVE);
        let up = (target / f.max(f64::MIN_POSITIVE)).min(room);
        if up > 1.0 {
            t = t.scale(up);
            f = fidelity(&t, rho)?;
        }
    }
    if f < target {
        let (rf, rt) = (f.sqrt(), target.sqrt());
        let mut mix = ((rt - rf) / (1.0 - rf)).clamp(0.0, 1.0);
        for _ in 0..60 {
            let cand = t.scale(1.0 - mix).add(&rho.scale(mix));
            let fc = fidelity(&cand, rho)?;
            if fc >= target || mix >= 1.0 {
                t = cand;
                f = fc;
                break;
            }
            mix = (mix * 2.0 + 1e-15).min(1.0);
        }
    }
    if kind == StateKind::Subnormalized && t.trace() > 1.0 {
        t = t.scale(1.0 / t.trace());
        f = fidelity(&t, rho)?;
    }
    let state = match kind {
        StateKind::Normalized => {
            let tr = t.trace();
            DensityOperator::new(t.scale(1.0 / tr), StateKind::Normalized)?
        }
        StateKind::Subnormalized => DensityOperator::new(t, StateKind::Subnormalized)?,
    };
    Ok((state, f))
}

/// Rescale a feasible witness so that `F(ρ̃, ρ) = 1 − ε` exactly. The
/// factor is at most one, so the objective `F(ρ̃, σ)` cannot increase.
pub fn rescale_to_constraint(
    tilde: &DensityOperator,
    rho: &HermitianOperator,
    eps: f64,
) -> Result<(DensityOperator, f64)> {
    let f = fidelity(tilde, rho)?;
    let target = 1.0 - eps;
    if f <= target {
        return Ok((tilde.clone(), f));
    }
    let c = target / f;
    let scaled = DensityOperator::new(tilde.scale(c), StateKind::Subnormalized)?;
    let fs = fidelity(&scaled, rho)?;
    Ok((scaled, fs))
}

fn validate_witness(w: &DensityOperator, rho: &HermitianOperator, target: f64) -> Result<f64> {
    let f = fidelity(w, rho)?;
    if f < target - WITNESS_FIDELITY_TOL || w.trace() > 1.0 + WITNESS_TRACE_TOL {
        return Err(Error::SolverFailure(format!(
            "witness failed validation: F = {f}, target {target}, trace {}",
            w.trace()
        )));
    }
    Ok(f)
}

/// `[[a, X], [X†, b]] ⪰ 0` with constant or variable diagonal blocks.
fn coupling(a: &MatExpr, x: &MatExpr, b: &MatExpr) -> Result<MatExpr> {
    MatExpr::block(a, x, &x.adjoint(), b)
}

/// Smooth max-relative entropy with fidelity smoothing:
/// `log2 inf λ` over `ρ̃ ≤ λσ`, `F(ρ̃, ρ) ≥ 1 − ε` and the chosen trace
/// condition. The dual program is solved separately and reported.
pub fn smooth_dmax(
    rho: &DensityOperator,
    sigma: &HermitianOperator,
    eps: f64,
    set: SmoothingSet,
    opts: &SolverOptions,
) -> Result<SmoothingResult> {
    smooth_dmax_impl(rho, sigma, eps, set, opts, true)
}

pub(crate) fn smooth_dmax_impl(
    rho: &DensityOperator,
    sigma: &HermitianOperator,
    eps: f64,
    set: SmoothingSet,
    opts: &SolverOptions,
    with_dual: bool,
) -> Result<SmoothingResult> {
    check_eps(eps)?;
    check_inputs(rho, sigma)?;
    let n = rho.dim();
    let kind = match set {
        SmoothingSet::Subnormalized => StateKind::Subnormalized,
        SmoothingSet::Normalized => StateKind::Normalized,
    };
    let target = 1.0 - eps;

    // best achievable fidelity with a state supported on supp(σ) is Tr[Π_σ ρ]
    let overlap = sigma.support_projector().inner(rho);
    if overlap < target - 1e-9 {
        return Ok(SmoothingResult {
            value_bits: f64::INFINITY,
            dual_bits: None,
            certified_bits: None,
            witness_state: rho.clone(),
            witness_fidelity: 1.0,
            aux_witnesses: BTreeMap::new(),
            status: SolveStatus::Infeasible,
            gap: None,
        });
    }

    if eps == 0.0 {
        // F(ρ̃, ρ) ≥ 1 with Tr ρ̃ ≤ 1 forces ρ̃ = ρ
        let v = d_max(rho, sigma)?.bits;
        let lam = v.exp2();
        let mut aux = BTreeMap::new();
        aux.insert("lambda".into(), scalar_matrix(lam));
        let (dual_bits, gap, status) = if with_dual && v.is_finite() {
            let (dv, st) = dmax_dual(rho, sigma, opts)?;
            (Some(dv.log2()), Some(relative_gap(lam, dv)), st)
        } else {
            (None, None, SolveStatus::Optimal)
        };
        let witness = match kind {
            StateKind::Normalized => rho.clone(),
            StateKind::Subnormalized => DensityOperator::new(rho.op().clone(), kind)?,
        };
        return Ok(SmoothingResult {
            value_bits: v,
            dual_bits,
            certified_bits: Some(v),
            witness_state: witness,
            witness_fidelity: 1.0,
            aux_witnesses: aux,
            status,
            gap,
        });
    }

    let mut p = ConicProgram::new();
    let tilde = p.hermitian("rho_tilde", n, true);
    let lam = p.scalar("lambda", true);
    let x = p.general("X", n, n);
    p.psd("order", MatExpr::times(&lam, sigma.matrix()).sub(&tilde)?)?;
    match set {
        SmoothingSet::Subnormalized => p.nonneg(-tilde.re_trace() + 1.0),
        SmoothingSet::Normalized => p.equal_zero(tilde.re_trace() - 1.0),
    }
    p.nonneg(x.re_trace() - target.sqrt());
    p.psd(
        "coupling",
        coupling(&MatExpr::from_operator(rho), &x, &tilde)?,
    )?;
    p.minimize(lam.clone());
    let sol = p.solve(opts)?;
    match sol.status {
        SolveStatus::Infeasible | SolveStatus::Unbounded => return Err(Error::InfeasibleSmoothing),
        _ => {}
    }
    let lam_v = sol.primal_value;
    let (witness, wf) = repair_witness(&sol.operator(&tilde), rho, target, kind)?;
    validate_witness(&witness, rho, target)?;
    let certified = d_max(&witness, sigma)?.bits;

    let mut aux = BTreeMap::new();
    aux.insert("lambda".into(), scalar_matrix(lam_v));
    aux.insert("X".into(), sol.matrix(&x));
    if with_dual {
        // the explicit dual is only used for its witnesses; its value carries
        // large cancelling terms, so the certified gap comes from the primal solve
        if let Ok(daux) = smooth_dmax_dual(rho, sigma, eps, set, opts) {
            aux.extend(daux);
        }
    }
    Ok(SmoothingResult {
        value_bits: lam_v.log2(),
        dual_bits: Some(sol.dual_value.log2()),
        certified_bits: Some(certified),
        witness_state: witness,
        witness_fidelity: wf,
        aux_witnesses: aux,
        status: sol.status,
        gap: Some(sol.gap),
    })
}

/// Dual of the smooth max program. Subnormalized:
/// `sup −μ + 2ν√(1−ε) − Tr[Zρ]` with `[[Z, νI], [νI, W + μI]] ⪰ 0`, `μ ≥ 0`;
/// normalized: `sup μ + 2ν√(1−ε) − Tr[Zρ]` with `W − μI` and `μ` free.
fn smooth_dmax_dual(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    eps: f64,
    set: SmoothingSet,
    opts: &SolverOptions,
) -> Result<BTreeMap<String, CMatrix>> {
    let n = rho.dim();
    let mut d = ConicProgram::new();
    let w = d.hermitian("W", n, true);
    let z = d.hermitian("Z", n, true);
    let nu = d.scalar("nu", true);
    let sub = set == SmoothingSet::Subnormalized;
    let mu = d.scalar("mu", sub);
    d.nonneg(-w.inner(sigma)? + 1.0);
    let id = CMatrix::identity(n, n);
    let nu_i = MatExpr::times(&nu, &id);
    let shift = MatExpr::times(&mu, &id);
    let corner = if sub { w.add(&shift)? } else { w.sub(&shift)? };
    d.psd("coupling", MatExpr::block(&z, &nu_i, &nu_i, &corner)?)?;
    let sign = if sub { -1.0 } else { 1.0 };
    d.maximize(mu.clone() * sign + nu.clone() * (2.0 * (1.0 - eps).sqrt()) - z.inner(rho)?);
    let sol = d.solve(opts)?;
    if !sol.is_solved() {
        return Err(Error::SolverFailure(format!(
            "dual status {:?}",
            sol.status
        )));
    }
    let mut aux = BTreeMap::new();
    aux.insert("W".into(), sol.matrix(&w));
    aux.insert("Z".into(), sol.matrix(&z));
    aux.insert("nu".into(), scalar_matrix(sol.value(&nu)));
    aux.insert("mu".into(), scalar_matrix(sol.value(&mu)));
    aux.insert("explicit_dual".into(), scalar_matrix(sol.primal_value));
    Ok(aux)
}

/// `inf λ` over `ρ ≤ λσ`, solved for the dual certificate `sup Tr[Wρ]`
/// over `W ⪰ 0`, `Tr[Wσ] ≤ 1`.
fn dmax_dual(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    opts: &SolverOptions,
) -> Result<(f64, SolveStatus)> {
    let mut p = ConicProgram::new();
    let lam = p.scalar("lambda", true);
    p.psd(
        "order",
        MatExpr::times(&lam, sigma.matrix()).sub(&MatExpr::from_operator(rho))?,
    )?;
    p.minimize(lam);
    let sol = p.solve(opts)?;
    if !sol.is_solved() {
        return Err(Error::SolverFailure(format!(
            "dual status {:?}",
            sol.status
        )));
    }
    Ok((sol.dual_value, sol.status))
}

/// Smooth conditional min-entropy `H^ε_min(A|B)`, smoothing radius `ε²`
/// in fidelity: `−log2 inf Tr[S_B]` over `ρ̃ ≤ I_A ⊗ S_B`, `Tr ρ̃ ≤ 1`,
/// `F(ρ̃, ρ) ≥ 1 − ε²`.
pub fn smooth_hmin(
    rho_ab: &DensityOperator,
    label: BipartiteLabel,
    eps: f64,
    opts: &SolverOptions,
) -> Result<SmoothingResult> {
    check_eps(eps)?;
    label.check(rho_ab.dim())?;
    let n = label.dim();
    let db = label.dim_b;
    let target = 1.0 - eps * eps;
    let id_a = CMatrix::identity(label.dim_a, label.dim_a);

    let mut p = ConicProgram::new();
    let s = p.hermitian("S_B", db, true);
    let lifted = s.kron_left(&id_a);
    let (tilde, x) = if eps == 0.0 {
        // ρ̃ = ρ is forced; keep the program strictly feasible
        p.psd("order", lifted.sub(&MatExpr::from_operator(rho_ab))?)?;
        (None, None)
    } else {
        let tilde = p.hermitian("rho_tilde", n, true);
        let x = p.general("X", n, n);
        p.psd("order", lifted.sub(&tilde)?)?;
        p.nonneg(-tilde.re_trace() + 1.0);
        p.nonneg(x.re_trace() - target.sqrt());
        p.psd(
            "coupling",
            coupling(&MatExpr::from_operator(rho_ab), &x, &tilde)?,
        )?;
        (Some(tilde), Some(x))
    };
    p.minimize(s.re_trace());
    let sol = p.solve(opts)?;
    if !sol.is_solved() {
        return Err(Error::InfeasibleSmoothing);
    }
    let primal = sol.primal_value;

    let dual = sol.dual_value;

    let (witness, wf) = match &tilde {
        Some(t) => repair_witness(&sol.operator(t), rho_ab, target, StateKind::Subnormalized)?,
        None => (rho_ab.clone(), 1.0),
    };
    validate_witness(&witness, rho_ab, target)?;

    let mut aux = BTreeMap::new();
    aux.insert("S_B".into(), sol.matrix(&s));
    if let Some(x) = &x {
        aux.insert("X".into(), sol.matrix(x));
    }
    if let Ok(daux) = smooth_hmin_dual(rho_ab, label, target, opts) {
        aux.extend(daux);
    }
    Ok(SmoothingResult {
        value_bits: -primal.log2(),
        dual_bits: Some(-dual.log2()),
        certified_bits: None,
        witness_state: witness,
        witness_fidelity: wf,
        aux_witnesses: aux,
        status: sol.status,
        gap: Some(sol.gap),
    })
}

/// Explicit dual `sup −μ + 2ν√(1−ε²) − Tr[Zρ]` over `Tr_A W ≤ I_B`,
/// `[[Z, νI], [νI, W + μI]] ⪰ 0`, solved for its witnesses.
fn smooth_hmin_dual(
    rho_ab: &HermitianOperator,
    label: BipartiteLabel,
    target: f64,
    opts: &SolverOptions,
) -> Result<BTreeMap<String, CMatrix>> {
    let n = label.dim();
    let db = label.dim_b;
    let mut d = ConicProgram::new();
    let w = d.hermitian("W", n, true);
    let z = d.hermitian("Z", n, true);
    let nu = d.scalar("nu", true);
    let mu = d.scalar("mu", true);
    d.psd(
        "marginal",
        MatExpr::identity(db).sub(&w.partial_trace(label, Subsystem::B)?)?,
    )?;
    let id = CMatrix::identity(n, n);
    let nu_i = MatExpr::times(&nu, &id);
    d.psd(
        "coupling",
        MatExpr::block(&z, &nu_i, &nu_i, &w.add(&MatExpr::times(&mu, &id))?)?,
    )?;
    d.maximize(-mu.clone() + nu.clone() * (2.0 * target.sqrt()) - z.inner(rho_ab)?);
    let dsol = d.solve(opts)?;
    if !dsol.is_solved() {
        return Err(Error::SolverFailure(format!(
            "dual status {:?}",
            dsol.status
        )));
    }
    let mut aux = BTreeMap::new();
    aux.insert("W".into(), dsol.matrix(&w));
    aux.insert("Z".into(), dsol.matrix(&z));
    aux.insert("nu".into(), scalar_matrix(dsol.value(&nu)));
    aux.insert("mu".into(), scalar_matrix(dsol.value(&mu)));
    aux.insert("explicit_dual".into(), scalar_matrix(dsol.primal_value));
    Ok(aux)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iters: 50,
            tol: 1e-7,
            seed: 0,
        }
    }
}

impl SeesawOptions {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Domain("restarts must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Domain("seesaw tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeesawTrace {
    pub restart_id: usize,
    /// Objective `a_k = √F(ρ̃_k, σ)` of every accepted iterate.
    pub iterates: Vec<f64>,
    pub converged: bool,
    pub best_value_bits: f64,
    pub failure: Option<String>,
}

fn bits_from_root(a: f64) -> f64 {
    if a > 0.0 {
        -2.0 * a.log2()
    } else {
        f64::INFINITY
    }
}

/// `Y = ρ̃^{-1/2} (ρ̃^{1/2} σ ρ̃^{1/2})^{1/2} ρ̃^{-1/2}`: the minimizer of
/// `½(Tr[Yρ̃] + Tr[Y^{-1}σ])`, scaled to unit largest eigenvalue. Singular
/// inputs are regularized by a tiny multiple of the identity.
pub(crate) fn optimal_y(
    tilde: &HermitianOperator,
    sigma: &HermitianOperator,
) -> Result<HermitianOperator> {
    let n = tilde.dim();
    let kappa = 1e-9 * (tilde.trace() + sigma.trace()).max(1e-300);
    let reg = |m: &HermitianOperator| {
        if m.min_eigenvalue() > kappa {
            m.clone()
        } else {
            m.psd_part()
                .add(&HermitianOperator::identity(n).scale(kappa))
        }
    };
    let t = reg(tilde);
    let s = reg(sigma);
    let half = t.sqrt()?;
    let inv_half = t.power(-0.5)?;
    let mid = s.congruence(half.matrix()).sqrt()?;
    let y = mid.congruence(inv_half.matrix());
    let top = y.max_eigenvalue();
    Ok(if top > 0.0 { y.scale(1.0 / top) } else { y })
}

/// The ρ̃ block of the bilinear program with `Y` fixed:
/// `min Tr[Yρ̃]` over `[[ρ̃, X], [X†, ρ]] ⪰ 0`, `Re Tr X ≥ √(1−ε)`, `Tr ρ̃ ≤ 1`.
pub(crate) fn rho_block_step(
    y: &HermitianOperator,
    rho: &HermitianOperator,
    eps: f64,
    opts: &SolverOptions,
) -> Result<HermitianOperator> {
    let n = rho.dim();
    let mut p = ConicProgram::new();
    let tilde = p.hermitian("rho_tilde", n, true);
    let x = p.general("X", n, n);
    p.psd(
        "coupling",
        coupling(&tilde, &x, &MatExpr::from_operator(rho))?,
    )?;
    p.nonneg(x.re_trace() - (1.0 - eps).sqrt());
    p.nonneg(-tilde.re_trace() + 1.0);
    p.minimize(tilde.inner(y)?);
    let sol = p.solve(opts)?;
    if !sol.is_solved() {
        return Err(Error::SolverFailure(format!(
            "rho block status {:?}",
            sol.status
        )));
    }
    Ok(sol.operator(&tilde))
}

/// Feasible, constraint-tight version of a candidate.
pub(crate) fn prepare(
    candidate: &HermitianOperator,
    rho: &HermitianOperator,
    eps: f64,
) -> Result<DensityOperator> {
    let (w, _) = repair_witness(candidate, rho, 1.0 - eps, StateKind::Subnormalized)?;
    Ok(rescale_to_constraint(&w, rho, eps)?.0)
}

struct RestartOutcome {
    trace: SeesawTrace,
    best: Option<(f64, DensityOperator, HermitianOperator)>,
}

fn run_restart(
    id: usize,
    start: DensityOperator,
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    eps: f64,
    opts: &SeesawOptions,
    solver: &SolverOptions,
) -> RestartOutcome {
    let mut current = start;
    let mut a = match fidelity(&current, sigma) {
        Ok(f) => f.sqrt(),
        Err(e) => {
            return RestartOutcome {
                trace: SeesawTrace {
                    restart_id: id,
                    iterates: vec![],
                    converged: false,
                    best_value_bits: f64::NAN,
                    failure: Some(e.to_string()),
                },
                best: None,
            }
        }
    };
    let mut iterates = vec![a];
    let mut converged = false;
    let mut failure = None;
    let mut last_y = HermitianOperator::identity(rho.dim());
    for _ in 0..opts.max_iters {
        let step = optimal_y(&current, sigma).and_then(|y| {
            let next = rho_block_step(&y, rho, eps, solver)?;
            let next = prepare(&next, rho, eps)?;
            let a_next = fidelity(&next, sigma)?.sqrt();
            Ok((y, next, a_next))
        });
        let (y, next, a_next) = match step {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        };
        last_y = y;
        if a_next > a {
            // an ascent step is rejected; the previous iterate stands
            converged = a_next - a <= opts.tol;
            break;
        }
        let drop = a - a_next;
        current = next;
        a = a_next;
        iterates.push(a);
        if drop <= opts.tol {
            converged = true;
            break;
        }
    }
    let trace = SeesawTrace {
        restart_id: id,
        iterates,
        converged,
        best_value_bits: bits_from_root(a),
        failure: failure.clone(),
    };
    let best = if failure.is_none() {
        Some((a, current, last_y))
    } else {
        None
    };
    RestartOutcome { trace, best }
}

fn restart_start(id: usize, rho: &DensityOperator, eps: f64, seed: u64) -> Result<DensityOperator> {
    if id == 0 {
        return prepare(rho, rho, eps);
    }
    let mut rng = seeded_rng(seed.wrapping_add((id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    let psi = random_pure_state(&mut rng, rho.dim());
    let s: f64 = rng.random_range(0.05..0.95);
    let mix = rho.scale(1.0 - s).add(&psi.scale(s));
    prepare(&mix, rho, eps)
}

/// Seesaw lower bound on `D^ε_{min,F}(ρ‖σ)`. Each restart alternates the
/// two blocks of the bilinear program; every iterate is a feasible `ρ̃`,
/// so `−log2 F(ρ̃, σ)` of the best one is a certified lower bound.
pub fn seesaw_dminf_lower(
    rho: &DensityOperator,
    sigma: &HermitianOperator,
    eps: f64,
    opts: &SeesawOptions,
    solver: &SolverOptions,
) -> Result<(SmoothingResult, Vec<SeesawTrace>)> {
    seesaw_dminf_lower_warm(rho, sigma, eps, None, opts, solver)
}

/// As [`seesaw_dminf_lower`], with an extra start point. Any witness for a
/// smaller `ε` is feasible here after rescaling.
pub fn seesaw_dminf_lower_warm(
    rho: &DensityOperator,
    sigma: &HermitianOperator,
    eps: f64,
    warm: Option<&HermitianOperator>,
    opts: &SeesawOptions,
    solver: &SolverOptions,
) -> Result<(SmoothingResult, Vec<SeesawTrace>)> {
    check_eps(eps)?;
    check_inputs(rho, sigma)?;
    opts.validate()?;

    if eps == 0.0 {
        let f = fidelity(rho, sigma)?;
        let bits = bits_from_root(f.sqrt());
        let trace = SeesawTrace {
            restart_id: 0,
            iterates: vec![f.sqrt()],
            converged: true,
            best_value_bits: bits,
            failure: None,
        };
        let result = SmoothingResult {
            value_bits: bits,
            dual_bits: None,
            certified_bits: Some(bits),
            witness_state: DensityOperator::new(rho.op().clone(), StateKind::Subnormalized)?,
            witness_fidelity: 1.0,
            aux_witnesses: BTreeMap::new(),
            status: SolveStatus::Optimal,
            gap: None,
        };
        return Ok((result, vec![trace]));
    }

    let mut starts = Vec::with_capacity(opts.restarts + 1);
    for id in 0..opts.restarts {
        starts.push((id, restart_start(id, rho, eps, opts.seed)?));
    }
    if let Some(w) = warm {
        starts.push((opts.restarts, prepare(w, rho, eps)?));
    }
    let outcomes: Vec<RestartOutcome> = starts
        .into_par_iter()
        .map(|(id, s)| run_restart(id, s, rho, sigma, eps, opts, solver))
        .collect();

    let mut best: Option<(usize, f64, DensityOperator, HermitianOperator, bool)> = None;
    for o in &outcomes {
        if let Some((a, w, y)) = &o.best {
            if best.as_ref().is_none_or(|b| *a < b.1) {
                best = Some((
                    o.trace.restart_id,
                    *a,
                    w.clone(),
                    y.clone(),
                    o.trace.converged,
                ));
            }
        }
    }
    let traces: Vec<SeesawTrace> = outcomes.into_iter().map(|o| o.trace).collect();
    let Some((_, a, witness, y, converged)) = best else {
        return Err(Error::AllRestartsFailed(traces.len()));
    };
    let wf = validate_witness(&witness, rho, 1.0 - eps)?;
    let bits = bits_from_root(a);
    let mut aux = BTreeMap::new();
    aux.insert("Y".into(), y.into_matrix());
    Ok((
        SmoothingResult {
            value_bits: bits,
            dual_bits: None,
            certified_bits: Some(bits),
            witness_state: witness,
            witness_fidelity: wf,
            aux_witnesses: aux,
            status: if converged {
                SolveStatus::Optimal
            } else {
                SolveStatus::Inaccurate
            },
            gap: None,
        },
        traces,
    ))
}

/// `−log2 F(ρ̃, σ)` for a given witness.
pub fn witness_value_bits(witness: &HermitianOperator, sigma: &HermitianOperator) -> Result<f64> {
    Ok(bits_from_root(fidelity(witness, sigma)?.sqrt()))
}

/// `points` log-spaced values in `[1e-4 (1−ε), 0.999 (1−ε)]`.
pub fn delta_grid(eps: f64, points: usize) -> Result<Vec<f64>> {
    check_eps(eps)?;
    if points == 0 {
        return Err(Error::EmptyGrid);
    }
    let (lo, hi) = (1e-4 * (1.0 - eps), 0.999 * (1.0 - eps));
    if points == 1 {
        return Ok(vec![hi]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp())
        .collect())
}

#[derive(Debug, Clone)]
pub struct UpperBound {
    pub upper_bits: f64,
    pub delta_star: f64,
    /// Smooth max term at `δ★`, certified by its witness.
    pub dmax_bits: f64,
    pub witness_state: DensityOperator,
    /// Grid points that produced a finite term.
    pub evaluated: usize,
}

/// `min_δ D^{1−ε−δ}_max(ρ‖σ) + log2 1/(1 − f(ε, δ))` over the grid, each
/// smooth max term evaluated at its validated witness.
pub fn dminf_upper(
    rho: &DensityOperator,
    sigma: &HermitianOperator,
    eps: f64,
    grid: &[f64],
    solver: &SolverOptions,
) -> Result<UpperBound> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("epsilon {eps} outside (0, 1)")));
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(&d) = grid.iter().find(|&&d| !(d > 0.0 && d < 1.0 - eps)) {
        return Err(Error::Domain(format!("delta {d} outside (0, 1 - eps)")));
    }
    let terms: Vec<Option<(f64, f64, DensityOperator)>> = grid
        .par_iter()
        .map(|&delta| {
            let f = f_eps_delta(eps, delta).ok()?;
            if f >= 1.0 {
                return None;
            }
            let r = smooth_dmax_impl(
                rho,
                sigma,
                1.0 - eps - delta,
                SmoothingSet::Subnormalized,
                solver,
                false,
            )
            .ok()?;
            let dm = r.certified_bits?;
            let total = dm - (1.0 - f).log2();
            total.is_finite().then_some((total, dm, r.witness_state))
        })
        .collect();
    let mut best: Option<(usize, f64, f64, DensityOperator)> = None;
    let mut evaluated = 0;
    for (k, t) in terms.into_iter().enumerate() {
        if let Some((total, dm, w)) = t {
            evaluated += 1;
            if best.as_ref().is_none_or(|b| total < b.1) {
                best = Some((k, total, dm, w));
            }
        }
    }
    let Some((k, total, dm, w)) = best else {
        return Err(Error::SolverFailure(
            "no grid point produced a finite bound".into(),
        ));
    };
    Ok(UpperBound {
        upper_bits: total,
        delta_star: grid[k],
        dmax_bits: dm,
        witness_state: w,
        evaluated,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BracketOptions {
    pub seesaw: SeesawOptions,
    pub delta_points: usize,
    pub solver: SolverOptions,
}

impl Default for BracketOptions {
    fn default() -> Self {
        Self {
            seesaw: SeesawOptions::default(),
            delta_points: 40,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Bracket {
    pub eps: f64,
    pub lower_bits: f64,
    pub upper_bits: f64,
    pub delta_star: f64,
    pub lower_witness: DensityOperator,
    pub traces: Vec<SeesawTrace>,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.upper_bits - self.lower_bits
    }
}

/// Seesaw lower bound and δ-swept upper bound at one `ε`.
pub fn bracket_dminf(
    rho: &DensityOperator,
    sigma: &HermitianOperator,
    eps: f64,
    opts: &BracketOptions,
) -> Result<Bracket> {
    bracket_warm(rho, sigma, eps, None, opts)
}

fn bracket_warm(
    rho: &DensityOperator,
    sigma: &HermitianOperator,
    eps: f64,
    warm: Option<&HermitianOperator>,
    opts: &BracketOptions,
) -> Result<Bracket> {
    let (lower, traces) =
        seesaw_dminf_lower_warm(rho, sigma, eps, warm, &opts.seesaw, &opts.solver)?;
    let (upper, delta_star) = if eps == 0.0 {
        (d_min_f(rho, sigma)?.bits, 0.0)
    } else {
        let grid = delta_grid(eps, opts.delta_points)?;
        let u = dminf_upper(rho, sigma, eps, &grid, &opts.solver)?;
        (u.upper_bits, u.delta_star)
    };
    if lower.value_bits > upper + BRACKET_TOL {
        return Err(Error::SolverFailure(format!(
            "bracket inverted at eps {eps}: lower {} > upper {upper}",
            lower.value_bits
        )));
    }
    Ok(Bracket {
        eps,
        lower_bits: lower.value_bits,
        upper_bits: upper,
        delta_star,
        lower_witness: lower.witness_state,
        traces,
    })
}

/// Brackets over an `ε` grid. Points are processed in increasing `ε`, each
/// seeded with the previous witness, so the lower curve is nondecreasing.
/// Results come back in input order.
pub fn bracket_sweep(
    rho: &DensityOperator,
    sigma: &HermitianOperator,
    eps_grid: &[f64],
    opts: &BracketOptions,
) -> Result<Vec<Bracket>> {
    if eps_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut order: Vec<usize> = (0..eps_grid.len()).collect();
    order.sort_by(|&a, &b| eps_grid[a].total_cmp(&eps_grid[b]));
    let mut out: Vec<Option<Bracket>> = vec![None; eps_grid.len()];
    let mut warm: Option<HermitianOperator> = None;
    for k in order {
        let b = bracket_warm(rho, sigma, eps_grid[k], warm.as_ref(), opts)?;
        warm = Some(b.lower_witness.op().clone());
        out[k] = Some(b);
    }
    Ok(out
        .into_iter()
        .map(|b| b.expect("every point visited"))
        .collect())
}
