//! Dense Hermitian operators, density operators, channels and the spectral
//! toolkit everything else is built on.
//!
//! All operators are stored as dense `nalgebra` complex matrices. Hermitian
//! symmetrization `(A + A†)/2` is applied on construction, and spectral
//! functions treat eigenvalues below [`CLIP`] as exact zeros.
//!
//! Bipartite operators use the A-major convention: the basis vector
//! `|a⟩ ⊗ |b⟩` sits at index `a * dim_b + b`.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Largest entrywise asymmetry accepted when building a Hermitian operator.
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Most negative eigenvalue accepted for a PSD input.
pub const PSD_TOL: f64 = 1e-8;
/// Allowed deviation of a state's trace from its constraint.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues with magnitude below this are exact zeros for spectral functions.
pub const CLIP: f64 = 1e-12;
/// Allowed deviation of `Σ K†K` from the identity.
pub const KRAUS_TOL: f64 = 1e-10;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Eigen-decomposition of a Hermitian operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Spectrum {
    /// Rebuilds `Σ f(λ_i) |v_i⟩⟨v_i|`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let fl = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= fl;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Dense complex self-adjoint matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: CMatrix,
}

fn max_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

impl HermitianOperator {
    /// Validates squareness and Hermiticity (within [`HERMITIAN_TOL`]) and
    /// symmetrizes.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        if mat.nrows() == 0 {
            return Err(Error::Empty);
        }
        let asym = max_asymmetry(&mat);
        if asym > HERMITIAN_TOL {
            return Err(Error::NotHermitian(asym));
        }
        Ok(Self {
            mat: hermitize(&mat),
        })
    }

    /// Symmetrizes without checking; for matrices Hermitian by construction.
    pub(crate) fn from_hermitian_unchecked(mat: CMatrix) -> Self {
        Self {
            mat: hermitize(&mat),
        }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = CMatrix::zeros(n, rows.first().map_or(0, |r| r.len()));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m.ncols() {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = c(v, 0.0);
            }
        }
        Self::new(m)
    }

    pub fn diag(values: &[f64]) -> Self {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&v| c(v, 0.0)));
        Self {
            mat: CMatrix::from_diagonal(&d),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mat: CMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            mat: CMatrix::zeros(n, n),
        }
    }

    /// `|ψ⟩⟨ψ|` for an (unnormalized) vector.
    pub fn projector(ket: &[C64]) -> Self {
        let v = DVector::from_column_slice(ket);
        Self {
            mat: &v * v.adjoint(),
        }
    }

    /// `|i⟩⟨i|` in dimension `n`.
    pub fn basis_projector(n: usize, i: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        m[(i, i)] = c(1.0, 0.0);
        Self { mat: m }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn spectrum(&self) -> Spectrum {
        let eig = self.mat.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMatrix::from_columns(
            &order
                .iter()
                .map(|&k| eig.eigenvectors.column(k).into_owned())
                .collect::<Vec<_>>(),
        );
        Spectrum { values, vectors }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spectrum().values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("nonempty")
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    pub(crate) fn require_psd(&self) -> Result<()> {
        let m = self.min_eigenvalue();
        if m < -PSD_TOL {
            Err(Error::NotPsd(m))
        } else {
            Ok(())
        }
    }

    pub fn require_same_dim(&self, other: &HermitianOperator) -> Result<()> {
        if self.dim() != other.dim() {
            Err(Error::DimensionMismatch(self.dim(), other.dim()))
        } else {
            Ok(())
        }
    }

    /// Applies a real function through the eigenbasis.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_hermitian_unchecked(self.spectrum().map(f))
    }

    /// Projector onto the eigenvectors with eigenvalue above [`CLIP`].
    pub fn support_projector(&self) -> Self {
        self.map_spectrum(|l| if l > CLIP { 1.0 } else { 0.0 })
    }

    /// Clips negative eigenvalues to zero.
    pub fn psd_part(&self) -> Self {
        self.map_spectrum(|l| l.max(0.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            mat: &self.mat * c(s, 0.0),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat - &other.mat,
        }
    }

    /// `Re Tr[self · other]`.
    pub fn inner(&self, other: &Self) -> f64 {
        self.mat
            .zip_fold(&other.mat.transpose(), 0.0, |acc, a, b| acc + (a * b).re)
    }

    /// `A · self · A†` for an arbitrary (possibly rectangular) `A`.
    pub fn congruence(&self, a: &CMatrix) -> Self {
        Self::from_hermitian_unchecked(a * &self.mat * a.adjoint())
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.kronecker(&other.mat),
        }
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        (&self.mat - &other.mat).norm()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.mat - &other.mat)
            .iter()
            .fold(0.0f64, |acc, z| acc.max(z.norm()))
    }

    pub fn matrix_function(&self, f: MatrixFunction) -> Result<Self> {
        self.require_psd()?;
        Ok(match f {
            MatrixFunction::Sqrt => self.map_spectrum(|l| if l > CLIP { l.sqrt() } else { 0.0 }),
            MatrixFunction::Log2OnSupport => {
                self.map_spectrum(|l| if l > CLIP { l.log2() } else { 0.0 })
            }
            MatrixFunction::Power(p) => {
                self.map_spectrum(|l| if l > CLIP { l.powf(p) } else { 0.0 })
            }
        })
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.matrix_function(MatrixFunction::Sqrt)
    }

    pub fn power(&self, p: f64) -> Result<Self> {
        self.matrix_function(MatrixFunction::Power(p))
    }

    /// `log2` on the support together with the support projector.
    pub fn log2_on_support(&self) -> Result<(Self, Self)> {
        Ok((
            self.matrix_function(MatrixFunction::Log2OnSupport)?,
            self.support_projector(),
        ))
    }

    pub fn partial_trace(&self, label: BipartiteLabel, keep: Subsystem) -> Result<Self> {
        label.check(self.dim())?;
        let (da, db) = (label.dim_a, label.dim_b);
        let out = match keep {
            Subsystem::A => CMatrix::from_fn(da, da, |a1, a2| {
                (0..db).map(|b| self.mat[(a1 * db + b, a2 * db + b)]).sum()
            }),
            Subsystem::B => CMatrix::from_fn(db, db, |b1, b2| {
                (0..da).map(|a| self.mat[(a * db + b1, a * db + b2)]).sum()
            }),
        };
        Ok(Self::from_hermitian_unchecked(out))
    }

    /// Exchanges the tensor factors: `A ⊗ B` becomes `B ⊗ A`.
    pub fn swap(&self, label: BipartiteLabel) -> Result<Self> {
        label.check(self.dim())?;
        let (da, db) = (label.dim_a, label.dim_b);
        let idx = |k: usize| {
            let (a, b) = (k / db, k % db);
            b * da + a
        };
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(idx(i), idx(j))] = self.mat[(i, j)];
            }
        }
        Ok(Self { mat: out })
    }

    /// Upgrades to a validated density operator.
    pub fn into_density(self, kind: StateKind) -> Result<DensityOperator> {
        DensityOperator::new(self, kind)
    }
}

/// Spectral functions supported by [`HermitianOperator::matrix_function`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixFunction {
    Sqrt,
    Log2OnSupport,
    Power(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Normalized,
    Subnormalized,
}

/// PSD operator with unit trace (normalized) or trace at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: HermitianOperator,
    kind: StateKind,
}

impl DensityOperator {
    pub fn new(op: HermitianOperator, kind: StateKind) -> Result<Self> {
        op.require_psd()?;
        let tr = op.trace();
        match kind {
            StateKind::Normalized if (tr - 1.0).abs() > TRACE_TOL => {
                return Err(Error::TraceViolation {
                    trace: tr,
                    kind: "normalized",
                })
            }
            StateKind::Subnormalized if tr > 1.0 + TRACE_TOL => {
                return Err(Error::TraceViolation {
                    trace: tr,
                    kind: "subnormalized",
                })
            }
            _ => {}
        }
        Ok(Self { op, kind })
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn into_op(self) -> HermitianOperator {
        self.op
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            op: HermitianOperator::identity(n).scale(1.0 / n as f64),
            kind: StateKind::Normalized,
        }
    }

    /// Normalized pure state from an arbitrary nonzero vector.
    pub fn pure(ket: &[C64]) -> Result<Self> {
        let norm2: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::Domain("zero state vector".into()));
        }
        Self::new(
            HermitianOperator::projector(ket).scale(1.0 / norm2),
            StateKind::Normalized,
        )
    }

    /// Probability vector on the diagonal.
    pub fn classical(probs: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::diag(probs), StateKind::Normalized)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let kind = if self.kind == StateKind::Normalized && other.kind == StateKind::Normalized {
            StateKind::Normalized
        } else {
            StateKind::Subnormalized
        };
        Self {
            op: self.op.kron(&other.op),
            kind,
        }
    }

    pub fn partial_trace(&self, label: BipartiteLabel, keep: Subsystem) -> Result<Self> {
        Ok(Self {
            op: self.op.partial_trace(label, keep)?,
            kind: self.kind,
        })
    }
}

impl Deref for DensityOperator {
    type Target = HermitianOperator;
    fn deref(&self) -> &HermitianOperator {
        &self.op
    }
}

impl AsRef<HermitianOperator> for DensityOperator {
    fn as_ref(&self) -> &HermitianOperator {
        &self.op
    }
}

impl AsRef<HermitianOperator> for HermitianOperator {
    fn as_ref(&self) -> &HermitianOperator {
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Factorization `dim = dim_a * dim_b` of a bipartite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteLabel {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl BipartiteLabel {
    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::BadFactorization {
                dim: dim_a * dim_b,
                dim_a,
                dim_b,
            });
        }
        Ok(Self { dim_a, dim_b })
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        if self.dim_a * self.dim_b != dim || self.dim_a == 0 {
            Err(Error::BadFactorization {
                dim,
                dim_a: self.dim_a,
                dim_b: self.dim_b,
            })
        } else {
            Ok(())
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            dim_a: self.dim_b,
            dim_b: self.dim_a,
        }
    }
}

/// Fidelity `F(A,B) = ‖√A √B‖₁²` of two PSD operators, computed from the
/// spectrum of `√A B √A`.
pub fn fidelity(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    Ok(root_fidelity(a, b)?.powi(2))
}

/// `√F(A,B) = Tr √(√A B √A)`.
pub fn root_fidelity(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    a.require_same_dim(b)?;
    a.require_psd()?;
    b.require_psd()?;
    let sa = a.sqrt()?;
    let inner = b.congruence(sa.matrix());
    Ok(inner
        .eigenvalues()
        .iter()
        .map(|&l| if l > 0.0 { l.sqrt() } else { 0.0 })
        .sum())
}

/// Completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or(Error::Empty)?;
        let (dout, din) = (first.nrows(), first.ncols());
        if din == 0 || dout == 0 {
            return Err(Error::Empty);
        }
        let mut sum = CMatrix::zeros(din, din);
        for k in &kraus {
            if k.nrows() != dout || k.ncols() != din {
                return Err(Error::DimensionMismatch(k.ncols(), din));
            }
            sum += k.adjoint() * k;
        }
        let dev = (sum - CMatrix::identity(din, din))
            .iter()
            .fold(0.0f64, |acc, z| acc.max(z.norm()));
        if dev > KRAUS_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self { kraus })
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn input_dim(&self) -> usize {
        self.kraus[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    pub fn identity(d: usize) -> Self {
        Self {
            kraus: vec![CMatrix::identity(d, d)],
        }
    }

    /// `X ↦ Tr[X] ω`.
    pub fn replacer(input_dim: usize, omega: &DensityOperator) -> Self {
        let spec = omega.spectrum();
        let dout = omega.dim();
        let mut kraus = Vec::new();
        for (k, &lam) in spec.values.iter().enumerate() {
            if lam <= CLIP {
                continue;
            }
            let v = spec.vectors.column(k) * c(lam.sqrt(), 0.0);
            for i in 0..input_dim {
                let mut m = CMatrix::zeros(dout, input_dim);
                m.set_column(i, &v);
                kraus.push(m);
            }
        }
        Self { kraus }
    }

    /// Completely dephasing channel in the computational basis.
    pub fn dephasing(d: usize) -> Self {
        Self {
            kraus: (0..d)
                .map(|i| HermitianOperator::basis_projector(d, i).into_matrix())
                .collect(),
        }
    }

    /// `N ⊗ M` acting on a bipartite input.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(a.kronecker(b));
            }
        }
        Self { kraus }
    }

    pub fn apply(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        if x.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch(x.dim(), self.input_dim()));
        }
        let mut out = CMatrix::zeros(self.output_dim(), self.output_dim());
        for k in &self.kraus {
            out += k * x.matrix() * k.adjoint();
        }
        Ok(HermitianOperator::from_hermitian_unchecked(out))
    }

    pub fn apply_state(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let out = self.apply(rho)?;
        let kind = rho.kind();
        // CPTP preserves positivity and trace; clip rounding noise.
        Ok(DensityOperator {
            op: out.psd_part(),
            kind,
        })
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Hilbert-Schmidt random state `G G† / Tr[G G†]`.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    let g = gaussian_matrix(rng, dim, dim);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator {
        op: HermitianOperator::from_hermitian_unchecked(m / c(tr, 0.0)),
        kind: StateKind::Normalized,
    }
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    let g = gaussian_matrix(rng, dim, 1);
    let ket: Vec<C64> = g.iter().copied().collect();
    DensityOperator::pure(&ket).expect("gaussian vector is nonzero")
}

/// Random PSD operator with trace drawn uniformly from `(0, 2)`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianOperator {
    let state = random_state(rng, dim);
    let t: f64 = rng.random_range(0.05..2.0);
    state.op.scale(t)
}

/// Random subnormalized state with trace drawn uniformly from `(0, 1]`.
pub fn random_subnormalized<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    let state = random_state(rng, dim);
    let t: f64 = 1.0 - rng.random_range(0.0..1.0);
    DensityOperator {
        op: state.op.scale(t),
        kind: StateKind::Subnormalized,
    }
}

/// Random channel from the completion of a Gaussian isometry
/// `C^{input} → C^{output} ⊗ C^{rank}`.
pub fn random_channel<R: Rng + ?Sized>(
    rng: &mut R,
    input_dim: usize,
    output_dim: usize,
    kraus_rank: usize,
) -> QuantumChannel {
    let rank = kraus_rank.max(input_dim.div_ceil(output_dim)).max(1);
    let g = gaussian_matrix(rng, output_dim * rank, input_dim);
    let q = g.qr().q();
    let kraus = (0..rank)
        .map(|k| q.rows(k * output_dim, output_dim).into_owned())
        .collect();
    QuantumChannel { kraus }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    State,
    Psd,
    Channel { kraus_rank: usize },
}

#[derive(Debug, Clone)]
pub enum RandomInstance {
    State(DensityOperator),
    Psd(HermitianOperator),
    Channel(QuantumChannel),
}

/// Deterministic random object for a seed.
pub fn random_instance(seed: u64, dim: usize, kind: InstanceKind) -> RandomInstance {
    let mut rng = seeded_rng(seed);
    match kind {
        InstanceKind::State => RandomInstance::State(random_state(&mut rng, dim)),
        InstanceKind::Psd => RandomInstance::Psd(random_psd(&mut rng, dim)),
        InstanceKind::Channel { kraus_rank } => {
            RandomInstance::Channel(random_channel(&mut rng, dim, dim, kraus_rank))
        }
    }
}
