//! Block-structured semidefinite programs over complex Hermitian data.
//!
//! Variables are Hermitian (or general complex) matrix blocks described by
//! real parameters. Linear matrix inequalities are imposed on affine matrix
//! expressions and handed to the backend through the real symmetric
//! embedding `[[Re M, -Im M], [Im M, Re M]]`. Since the embedding acts on the
//! cone and not on the variables, objective values carry no factor of two.

use std::collections::BTreeMap;
use std::fs;
use std::ops::{Add, Mul, Neg, Sub};
use std::path::PathBuf;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{c, BipartiteLabel, CMatrix, HermitianOperator, Subsystem, C64};

/// Witness LMIs must hold to this tolerance for an `Optimal` status.
pub const LMI_TOL: f64 = 1e-7;
/// Relative primal/dual gap allowed for an `Optimal` status.
pub const GAP_TOL: f64 = 1e-6;
const STRUCT_TOL: f64 = 1e-10;

/// Real affine expression over the program parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    terms: Vec<(usize, f64)>,
    constant: f64,
}

impl LinExpr {
    pub fn constant(value: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: value,
        }
    }

    fn param(index: usize) -> Self {
        Self {
            terms: vec![(index, 1.0)],
            constant: 0.0,
        }
    }

    pub fn constant_part(&self) -> f64 {
        self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|&(_, a)| a == 0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::default();
        }
        Self {
            terms: self.terms.iter().map(|&(i, a)| (i, a * s)).collect(),
            constant: self.constant * s,
        }
    }

    fn add_scaled(&mut self, other: &Self, s: f64) {
        if s == 0.0 {
            return;
        }
        self.terms
            .extend(other.terms.iter().map(|&(i, a)| (i, a * s)));
        self.constant += other.constant * s;
    }

    /// Merge duplicate parameters and drop zero coefficients.
    pub fn compact(mut self) -> Self {
        self.terms.sort_unstable_by_key(|&(i, _)| i);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.terms.len());
        for (i, a) in self.terms {
            match out.last_mut() {
                Some((j, b)) if *j == i => *b += a,
                _ => out.push((i, a)),
            }
        }
        out.retain(|&(_, a)| a != 0.0);
        self.terms = out;
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, a)| a * x[i]).sum::<f64>()
    }

    fn max_abs(&self) -> f64 {
        self.terms
            .iter()
            .fold(self.constant.abs(), |m, &(_, a)| m.max(a.abs()))
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self.add_scaled(&rhs, 1.0);
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: LinExpr) -> LinExpr {
        self.add_scaled(&rhs, -1.0);
        self
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scale(-1.0)
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(self, rhs: f64) -> LinExpr {
        self.scale(rhs)
    }
}

impl Add<f64> for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: f64) -> LinExpr {
        self.constant += rhs;
        self
    }
}

impl Sub<f64> for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: f64) -> LinExpr {
        self.constant -= rhs;
        self
    }
}

/// Complex affine expression.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CExpr {
    pub re: LinExpr,
    pub im: LinExpr,
}

impl CExpr {
    fn constant(z: C64) -> Self {
        Self {
            re: LinExpr::constant(z.re),
            im: LinExpr::constant(z.im),
        }
    }

    fn add_scaled(&mut self, other: &Self, z: C64) {
        self.re.add_scaled(&other.re, z.re);
        self.re.add_scaled(&other.im, -z.im);
        self.im.add_scaled(&other.im, z.re);
        self.im.add_scaled(&other.re, z.im);
    }

    fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: self.im.scale(-1.0),
        }
    }

    pub fn eval(&self, x: &[f64]) -> C64 {
        c(self.re.eval(x), self.im.eval(x))
    }
}

/// Dense matrix of complex affine expressions, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MatExpr {
    rows: usize,
    cols: usize,
    data: Vec<CExpr>,
}

impl MatExpr {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![CExpr::default(); rows * cols],
        }
    }

    pub fn constant(m: &CMatrix) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != C64::new(0.0, 0.0) {
                    out.data[i * m.ncols() + j] = CExpr::constant(m[(i, j)]);
                }
            }
        }
        out
    }

    pub fn from_operator(op: &HermitianOperator) -> Self {
        Self::constant(op.matrix())
    }

    /// `e · M` for a real scalar expression and a constant matrix.
    pub fn times(e: &LinExpr, m: &CMatrix) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        let src = CExpr {
            re: e.clone(),
            im: LinExpr::default(),
        };
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != C64::new(0.0, 0.0) {
                    out.get_mut(i, j).add_scaled(&src, m[(i, j)]);
                }
            }
        }
        out
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(&CMatrix::identity(n, n))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &CExpr {
        &self.data[i * self.cols + j]
    }

    fn get_mut(&mut self, i: usize, j: usize) -> &mut CExpr {
        &mut self.data[i * self.cols + j]
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Model(format!(
                "shape {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            a.add_scaled(b, c(1.0, 0.0));
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|e| CExpr {
                    re: e.re.scale(s),
                    im: e.im.scale(s),
                })
                .collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.get_mut(j, i) = self.get(i, j).conj();
            }
        }
        out
    }

    /// `C · M`.
    pub fn left_mul(&self, cm: &CMatrix) -> Result<Self> {
        if cm.ncols() != self.rows {
            return Err(Error::Model("left multiplication shape".into()));
        }
        let mut out = Self::zeros(cm.nrows(), self.cols);
        for i in 0..cm.nrows() {
            for k in 0..self.rows {
                let z = cm[(i, k)];
                if z == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..self.cols {
                    let src = self.get(k, j).clone();
                    out.get_mut(i, j).add_scaled(&src, z);
                }
            }
        }
        Ok(out)
    }

    /// `M · C`.
    pub fn right_mul(&self, cm: &CMatrix) -> Result<Self> {
        Ok(self.adjoint().left_mul(&cm.adjoint())?.adjoint())
    }

    /// `C · M · C†`.
    pub fn congruence(&self, cm: &CMatrix) -> Result<Self> {
        self.left_mul(cm)?.right_mul(&cm.adjoint())
    }

    /// `C ⊗ M`.
    pub fn kron_left(&self, cm: &CMatrix) -> Self {
        let (r, s) = (self.rows, self.cols);
        let mut out = Self::zeros(cm.nrows() * r, cm.ncols() * s);
        for a in 0..cm.nrows() {
            for b in 0..cm.ncols() {
                let z = cm[(a, b)];
                if z == C64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..r {
                    for j in 0..s {
                        let src = self.get(i, j).clone();
                        out.get_mut(a * r + i, b * s + j).add_scaled(&src, z);
                    }
                }
            }
        }
        out
    }

    /// `M ⊗ C`.
    pub fn kron_right(&self, cm: &CMatrix) -> Self {
        let (r, s) = (cm.nrows(), cm.ncols());
        let mut out = Self::zeros(self.rows * r, self.cols * s);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let src = self.get(i, j);
                for a in 0..r {
                    for b in 0..s {
                        let z = cm[(a, b)];
                        if z != C64::new(0.0, 0.0) {
                            out.get_mut(i * r + a, j * s + b).add_scaled(src, z);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn partial_trace(&self, label: BipartiteLabel, keep: Subsystem) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Model(
                "partial trace of a non-square expression".into(),
            ));
        }
        label.check(self.rows)?;
        let (da, db) = (label.dim_a, label.dim_b);
        let one = c(1.0, 0.0);
        Ok(match keep {
            Subsystem::A => {
                let mut out = Self::zeros(da, da);
                for i in 0..da {
                    for j in 0..da {
                        for k in 0..db {
                            let src = self.get(i * db + k, j * db + k).clone();
                            out.get_mut(i, j).add_scaled(&src, one);
                        }
                    }
                }
                out
            }
            Subsystem::B => {
                let mut out = Self::zeros(db, db);
                for k in 0..db {
                    for l in 0..db {
                        for i in 0..da {
                            let src = self.get(i * db + k, i * db + l).clone();
                            out.get_mut(k, l).add_scaled(&src, one);
                        }
                    }
                }
                out
            }
        })
    }

    pub fn trace(&self) -> CExpr {
        let mut t = CExpr::default();
        for i in 0..self.rows.min(self.cols) {
            t.add_scaled(self.get(i, i), c(1.0, 0.0));
        }
        t
    }

    /// `Re Tr[M]`.
    pub fn re_trace(&self) -> LinExpr {
        self.trace().re
    }

    /// `Re Tr[H M]` for a constant Hermitian `H`.
    pub fn inner(&self, h: &HermitianOperator) -> Result<LinExpr> {
        let hm = h.matrix();
        if hm.nrows() != self.cols || hm.ncols() != self.rows {
            return Err(Error::Model("inner product shape".into()));
        }
        let mut out = LinExpr::default();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = hm[(j, i)];
                let e = self.get(i, j);
                out.add_scaled(&e.re, z.re);
                out.add_scaled(&e.im, -z.im);
            }
        }
        Ok(out)
    }

    /// The 2x2 block matrix `[[a, b], [c, d]]`.
    pub fn block(a: &Self, b: &Self, c_: &Self, d: &Self) -> Result<Self> {
        if a.rows != b.rows || c_.rows != d.rows || a.cols != c_.cols || b.cols != d.cols {
            return Err(Error::Model("block shapes do not conform".into()));
        }
        let rows = a.rows + c_.rows;
        let cols = a.cols + b.cols;
        let mut out = Self::zeros(rows, cols);
        for (blk, r0, c0) in [
            (a, 0, 0),
            (b, 0, a.cols),
            (c_, a.rows, 0),
            (d, a.rows, a.cols),
        ] {
            for i in 0..blk.rows {
                for j in 0..blk.cols {
                    *out.get_mut(r0 + i, c0 + j) = blk.get(i, j).clone();
                }
            }
        }
        Ok(out)
    }

    /// Block diagonal `⊕ blocks`.
    pub fn block_diag(blocks: &[Self]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for blk in blocks {
            for i in 0..blk.rows {
                for j in 0..blk.cols {
                    *out.get_mut(r0 + i, c0 + j) = blk.get(i, j).clone();
                }
            }
            r0 += blk.rows;
            c0 += blk.cols;
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).eval(x))
    }

    fn is_hermitian(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in i..self.cols {
                let a = self.get(i, j);
                let b = self.get(j, i);
                let dre = (a.re.clone() - b.re.clone()).compact();
                let dim = (a.im.clone() + b.im.clone()).compact();
                if dre.max_abs() > STRUCT_TOL || dim.max_abs() > STRUCT_TOL {
                    return false;
                }
            }
        }
        true
    }
}

/// Real symmetric embedding `[[Re M, -Im M], [Im M, Re M]]`.
pub fn real_embedding(m: &CMatrix) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    /// Hermitian and positive semidefinite.
    Psd,
    /// Hermitian, unconstrained.
    Hermitian,
    /// General complex matrix.
    General,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockInfo {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub kind: BlockKind,
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

/// A semidefinite program assembled from Hermitian blocks.
#[derive(Debug, Clone)]
pub struct ConicProgram {
    blocks: Vec<BlockInfo>,
    n_params: usize,
    equalities: Vec<LinExpr>,
    inequalities: Vec<LinExpr>,
    lmis: Vec<(String, MatExpr)>,
    objective: LinExpr,
    sense: Sense,
}

impl Default for ConicProgram {
    fn default() -> Self {
        Self::new()
    }
}

impl ConicProgram {
    pub fn new() -> Self {
        Self {
            blocks: Vec::new(),
            n_params: 0,
            equalities: Vec::new(),
            inequalities: Vec::new(),
            lmis: Vec::new(),
            objective: LinExpr::default(),
            sense: Sense::Minimize,
        }
    }

    pub fn blocks(&self) -> &[BlockInfo] {
        &self.blocks
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// Square Hermitian block. `Psd` blocks get their cone constraint here.
    pub fn hermitian(&mut self, name: &str, dim: usize, psd: bool) -> MatExpr {
        let off = self.n_params;
        let mut m = MatExpr::zeros(dim, dim);
        for i in 0..dim {
            m.get_mut(i, i).re = LinExpr::param(off + i);
        }
        let mut k = off + dim;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let re = LinExpr::param(k);
                let im = LinExpr::param(k + 1);
                *m.get_mut(i, j) = CExpr {
                    re: re.clone(),
                    im: im.clone(),
                };
                *m.get_mut(j, i) = CExpr { re, im: -im };
                k += 2;
            }
        }
        self.n_params += dim * dim;
        let kind = if psd {
            BlockKind::Psd
        } else {
            BlockKind::Hermitian
        };
        self.blocks.push(BlockInfo {
            name: name.to_string(),
            rows: dim,
            cols: dim,
            kind,
            offset: off,
        });
        if psd {
            self.push_lmi(name.to_string(), m.clone());
        }
        m
    }

    /// General complex block.
    pub fn general(&mut self, name: &str, rows: usize, cols: usize) -> MatExpr {
        let off = self.n_params;
        let mut m = MatExpr::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let k = off + 2 * (i * cols + j);
                *m.get_mut(i, j) = CExpr {
                    re: LinExpr::param(k),
                    im: LinExpr::param(k + 1),
                };
            }
        }
        self.n_params += 2 * rows * cols;
        self.blocks.push(BlockInfo {
            name: name.to_string(),
            rows,
            cols,
            kind: BlockKind::General,
            offset: off,
        });
        m
    }

    /// Real scalar, optionally constrained nonnegative.
    pub fn scalar(&mut self, name: &str, nonneg: bool) -> LinExpr {
        let m = self.hermitian(name, 1, nonneg);
        m.get(0, 0).re.clone()
    }

    /// `e = 0`.
    pub fn equal_zero(&mut self, e: LinExpr) {
        self.equalities.push(e.compact());
    }

    /// `e ≥ 0`.
    pub fn nonneg(&mut self, e: LinExpr) {
        self.inequalities.push(e.compact());
    }

    /// Entrywise `m = 0`; only the upper triangle is used for Hermitian `m`.
    pub fn matrix_equal_zero(&mut self, m: &MatExpr) {
        let herm = m.is_hermitian();
        for i in 0..m.rows {
            for j in 0..m.cols {
                if herm && j < i {
                    continue;
                }
                let e = m.get(i, j);
                let re = e.re.clone().compact();
                if !(re.terms.is_empty() && re.constant == 0.0) {
                    self.equalities.push(re);
                }
                if herm && i == j {
                    continue;
                }
                let im = e.im.clone().compact();
                if !(im.terms.is_empty() && im.constant == 0.0) {
                    self.equalities.push(im);
                }
            }
        }
    }

    /// `m ⪰ 0` for a Hermitian affine expression.
    pub fn psd(&mut self, name: &str, m: MatExpr) -> Result<()> {
        if !m.is_hermitian() {
            return Err(Error::Model(format!("LMI `{name}` is not Hermitian")));
        }
        self.push_lmi(name.to_string(), m);
        Ok(())
    }

    fn push_lmi(&mut self, name: String, m: MatExpr) {
        if m.rows == 1 {
            self.inequalities.push(m.get(0, 0).re.clone().compact());
        } else {
            let data = m.data.into_iter().map(|e| CExpr {
                re: e.re.compact(),
                im: e.im.compact(),
            });
            let m = MatExpr {
                rows: m.rows,
                cols: m.cols,
                data: data.collect(),
            };
            self.lmis.push((name, m));
        }
    }

    pub fn minimize(&mut self, e: LinExpr) {
        self.objective = e.compact();
        self.sense = Sense::Minimize;
    }

    pub fn maximize(&mut self, e: LinExpr) {
        self.objective = e.compact();
        self.sense = Sense::Maximize;
    }

    fn check(&self) -> Result<()> {
        let bad = |e: &LinExpr| e.terms.iter().any(|&(i, _)| i >= self.n_params);
        if bad(&self.objective)
            || self.equalities.iter().any(bad)
            || self.inequalities.iter().any(bad)
            || self
                .lmis
                .iter()
                .any(|(_, m)| m.data.iter().any(|e| bad(&e.re) || bad(&e.im)))
        {
            return Err(Error::Model(
                "expression refers to a foreign variable".into(),
            ));
        }
        Ok(())
    }

    /// Lower to `min qᵀx  s.t.  b − Ax ∈ K`.
    pub fn standard_form(&self) -> Result<StandardForm> {
        self.check()?;
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut b = Vec::new();
        let mut push_row = |e: &LinExpr, s: f64, rows: &mut Vec<usize>, b: &mut Vec<f64>| {
            let r = b.len();
            for &(i, a) in &e.terms {
                rows.push(r);
                cols.push(i);
                vals.push(-a * s);
            }
            b.push(e.constant * s);
        };
        for e in &self.equalities {
            push_row(e, 1.0, &mut rows, &mut b);
        }
        for e in &self.inequalities {
            push_row(e, 1.0, &mut rows, &mut b);
        }
        let mut cones = Vec::new();
        if !self.equalities.is_empty() {
            cones.push(ConeSpec::Zero(self.equalities.len()));
        }
        if !self.inequalities.is_empty() {
            cones.push(ConeSpec::Nonneg(self.inequalities.len()));
        }
        let sqrt2 = std::f64::consts::SQRT_2;
        for (_, m) in &self.lmis {
            let n = m.rows;
            let entry = |i: usize, j: usize| -> LinExpr {
                let e = m.get(i % n, j % n);
                match (i < n, j < n) {
                    (true, true) | (false, false) => e.re.clone(),
                    (true, false) => e.im.scale(-1.0),
                    (false, true) => e.im.clone(),
                }
            };
            for col in 0..2 * n {
                for row in 0..=col {
                    let s = if row == col { 1.0 } else { sqrt2 };
                    push_row(&entry(row, col), s, &mut rows, &mut b);
                }
            }
            cones.push(ConeSpec::PsdTriangle(2 * n));
        }
        let sign = match self.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut q = vec![0.0; self.n_params];
        for &(i, a) in &self.objective.terms {
            q[i] += sign * a;
        }
        Ok(StandardForm {
            n_vars: self.n_params,
            n_rows: b.len(),
            q,
            a_rows: rows,
            a_cols: cols,
            a_vals: vals,
            b,
            cones,
            blocks: self.blocks.clone(),
        })
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<ConicSolution> {
        self.solve_with(&ClarabelBackend, opts)
    }

    pub fn solve_with(
        &self,
        backend: &dyn ConicBackend,
        opts: &SolverOptions,
    ) -> Result<ConicSolution> {
        let sf = self.standard_form()?;
        if let Some(path) = &opts.dump {
            let text =
                serde_json::to_string_pretty(&sf).map_err(|e| Error::Model(e.to_string()))?;
            fs::write(path, text)?;
        }
        let raw = backend.solve(&sf, opts)?;
        let first = self.interpret(raw)?;
        if first.status != SolveStatus::Inaccurate {
            return Ok(first);
        }
        // an uncertified point gets one more pass at tighter tolerances
        let tight = SolverOptions {
            tol_gap_abs: opts.tol_gap_abs * 1e-2,
            tol_gap_rel: opts.tol_gap_rel * 1e-2,
            tol_feas: opts.tol_feas * 1e-2,
            ..opts.clone()
        };
        match backend
            .solve(&sf, &tight)
            .and_then(|raw| self.interpret(raw))
        {
            Ok(second) if second.status == SolveStatus::Optimal || second.gap < first.gap => {
                Ok(second)
            }
            _ => Ok(first),
        }
    }

    fn interpret(&self, raw: RawSolution) -> Result<ConicSolution> {
        let (sign, constant) = match self.sense {
            Sense::Minimize => (1.0, self.objective.constant),
            Sense::Maximize => (-1.0, self.objective.constant),
        };
        let status = match raw.status {
            RawStatus::PrimalInfeasible => SolveStatus::Infeasible,
            RawStatus::DualInfeasible => SolveStatus::Unbounded,
            _ => SolveStatus::Optimal,
        };
        if status != SolveStatus::Optimal {
            return Ok(ConicSolution {
                status,
                primal_value: f64::NAN,
                dual_value: f64::NAN,
                gap: f64::NAN,
                max_lmi_violation: f64::NAN,
                max_equality_residual: f64::NAN,
                iterations: raw.iterations,
                x: raw.x,
                witnesses: BTreeMap::new(),
            });
        }
        if raw.x.len() != self.n_params {
            return Err(Error::SolverFailure(format!(
                "backend returned {} values for {} parameters",
                raw.x.len(),
                self.n_params
            )));
        }
        let primal = sign * raw.primal_obj + constant;
        let dual = sign * raw.dual_obj + constant;
        let gap = (primal - dual).abs() / (1.0 + primal.abs());
        let x = raw.x;
        let lmi = self.max_lmi_violation(&x);
        let eq = self
            .equalities
            .iter()
            .fold(0.0f64, |m, e| m.max(e.eval(&x).abs()));
        let certified = gap <= GAP_TOL && lmi <= LMI_TOL && eq <= LMI_TOL;
        let status = match raw.status {
            // a point that meets the certificate is optimal whatever the stopping reason
            _ if certified => SolveStatus::Optimal,
            RawStatus::Solved | RawStatus::AlmostSolved => SolveStatus::Inaccurate,
            // stalled runs are kept only when their point still certifies
            _ if gap <= 1e-5 && lmi <= 1e-6 && eq <= 1e-6 => SolveStatus::Inaccurate,
            other => return Err(Error::SolverFailure(format!("{other:?}"))),
        };
        let witnesses = self
            .blocks
            .iter()
            .map(|blk| (blk.name.clone(), self.block_value(blk, &x)))
            .collect();
        Ok(ConicSolution {
            status,
            primal_value: primal,
            dual_value: dual,
            gap,
            max_lmi_violation: lmi,
            max_equality_residual: eq,
            iterations: raw.iterations,
            x,
            witnesses,
        })
    }

    fn max_lmi_violation(&self, x: &[f64]) -> f64 {
        let mut worst = self
            .inequalities
            .iter()
            .fold(0.0f64, |m, e| m.max(-e.eval(x)));
        for (_, m) in &self.lmis {
            let h = hermitian_part(m.eval(x));
            worst = worst.max(-h.min_eigenvalue());
        }
        worst.max(0.0)
    }

    fn block_value(&self, blk: &BlockInfo, x: &[f64]) -> CMatrix {
        let o = blk.offset;
        match blk.kind {
            BlockKind::General => CMatrix::from_fn(blk.rows, blk.cols, |i, j| {
                let k = o + 2 * (i * blk.cols + j);
                c(x[k], x[k + 1])
            }),
            _ => {
                let n = blk.rows;
                let mut m = CMatrix::zeros(n, n);
                for i in 0..n {
                    m[(i, i)] = c(x[o + i], 0.0);
                }
                let mut k = o + n;
                for i in 0..n {
                    for j in (i + 1)..n {
                        m[(i, j)] = c(x[k], x[k + 1]);
                        m[(j, i)] = c(x[k], -x[k + 1]);
                        k += 2;
                    }
                }
                m
            }
        }
    }
}

/// `(M + M†)/2` as an operator.
pub fn hermitian_part(m: CMatrix) -> HermitianOperator {
    let h = (&m + m.adjoint()) * c(0.5, 0.0);
    HermitianOperator::from_hermitian_unchecked(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeSpec {
    Zero(usize),
    Nonneg(usize),
    /// Real symmetric PSD cone of the given side, upper triangle by
    /// columns with off-diagonals scaled by √2.
    PsdTriangle(usize),
}

impl ConeSpec {
    pub fn rows(&self) -> usize {
        match *self {
            ConeSpec::Zero(k) | ConeSpec::Nonneg(k) => k,
            ConeSpec::PsdTriangle(n) => n * (n + 1) / 2,
        }
    }
}

/// Solver-facing data: `min qᵀx  s.t.  b − Ax ∈ K`, `A` as triplets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StandardForm {
    pub n_vars: usize,
    pub n_rows: usize,
    pub q: Vec<f64>,
    pub a_rows: Vec<usize>,
    pub a_cols: Vec<usize>,
    pub a_vals: Vec<f64>,
    pub b: Vec<f64>,
    pub cones: Vec<ConeSpec>,
    pub blocks: Vec<BlockInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RawStatus {
    Solved,
    AlmostSolved,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
    InsufficientProgress,
    NumericalError,
    Other(String),
}

/// What a backend reports, in standard-form terms.
#[derive(Debug, Clone)]
pub struct RawSolution {
    pub status: RawStatus,
    pub x: Vec<f64>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub iterations: u32,
}

pub trait ConicBackend: Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, sf: &StandardForm, opts: &SolverOptions) -> Result<RawSolution>;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol_gap_abs: f64,
    pub tol_gap_rel: f64,
    pub tol_feas: f64,
    pub max_iter: u32,
    #[serde(default)]
    pub verbose: bool,
    /// Write the standard form as JSON before solving.
    #[serde(default)]
    pub dump: Option<PathBuf>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_gap_abs: 1e-10,
            tol_gap_rel: 1e-10,
            tol_feas: 1e-10,
            max_iter: 500,
            verbose: false,
            dump: None,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_gap_abs > 0.0 && self.tol_gap_rel > 0.0 && self.tol_feas > 0.0) {
            return Err(Error::Domain("solver tolerances must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Domain("max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// Interior-point backend built on Clarabel.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClarabelBackend;

impl ConicBackend for ClarabelBackend {
    fn name(&self) -> &'static str {
        "clarabel"
    }

    fn solve(&self, sf: &StandardForm, opts: &SolverOptions) -> Result<RawSolution> {
        opts.validate()?;
        let p = CscMatrix::zeros((sf.n_vars, sf.n_vars));
        let a = CscMatrix::new_from_triplets(
            sf.n_rows,
            sf.n_vars,
            sf.a_rows.clone(),
            sf.a_cols.clone(),
            sf.a_vals.clone(),
        );
        let cones: Vec<SupportedConeT<f64>> = sf
            .cones
            .iter()
            .map(|cs| match *cs {
                ConeSpec::Zero(k) => SupportedConeT::ZeroConeT(k),
                ConeSpec::Nonneg(k) => SupportedConeT::NonnegativeConeT(k),
                ConeSpec::PsdTriangle(n) => SupportedConeT::PSDTriangleConeT(n),
            })
            .collect();
        // retry ladder: equilibration occasionally stalls on degenerate faces
        let mut best: Option<RawSolution> = None;
        for attempt in 0..3 {
            let mut settings = DefaultSettingsBuilder::default()
                .tol_gap_abs(opts.tol_gap_abs)
                .tol_gap_rel(opts.tol_gap_rel)
                .tol_feas(opts.tol_feas)
                .max_iter(opts.max_iter)
                .verbose(opts.verbose)
                .build()
                .map_err(|e| Error::SolverFailure(e.to_string()))?;
            match attempt {
                0 => {}
                1 => settings.equilibrate_enable = false,
                _ => settings.static_regularization_enable = false,
            }
            let mut solver = DefaultSolver::new(&p, &sf.q, &a, &sf.b, &cones, settings)
                .map_err(|e| Error::SolverFailure(e.to_string()))?;
            solver.solve();
            let raw = raw_solution(&solver.solution);
            let done = matches!(
                raw.status,
                RawStatus::Solved | RawStatus::PrimalInfeasible | RawStatus::DualInfeasible
            );
            let better = match &best {
                None => true,
                Some(b) => (rank(&raw.status), raw_gap(&raw)) < (rank(&b.status), raw_gap(b)),
            };
            if better {
                best = Some(raw);
            }
            if done {
                break;
            }
        }
        Ok(best.expect("at least one attempt"))
    }
}

fn rank(s: &RawStatus) -> u8 {
    match s {
        RawStatus::Solved | RawStatus::PrimalInfeasible | RawStatus::DualInfeasible => 0,
        RawStatus::AlmostSolved => 1,
        _ => 2,
    }
}

fn raw_gap(r: &RawSolution) -> f64 {
    let g = (r.primal_obj - r.dual_obj).abs() / (1.0 + r.primal_obj.abs());
    if g.is_nan() {
        f64::INFINITY
    } else {
        g
    }
}

fn raw_solution(sol: &clarabel::solver::DefaultSolution<f64>) -> RawSolution {
    let status = match sol.status {
        SolverStatus::Solved => RawStatus::Solved,
        SolverStatus::AlmostSolved => RawStatus::AlmostSolved,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            RawStatus::PrimalInfeasible
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
            RawStatus::DualInfeasible
        }
        SolverStatus::MaxIterations => RawStatus::MaxIterations,
        SolverStatus::InsufficientProgress => RawStatus::InsufficientProgress,
        SolverStatus::NumericalError => RawStatus::NumericalError,
        other => RawStatus::Other(format!("{other:?}")),
    };
    RawSolution {
        status,
        x: sol.x.clone(),
        primal_obj: sol.obj_val,
        dual_obj: sol.obj_val_dual,
        iterations: sol.iterations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Inaccurate,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `|primal − dual| / (1 + |primal|)`.
    pub gap: f64,
    pub max_lmi_violation: f64,
    pub max_equality_residual: f64,
    pub iterations: u32,
    pub x: Vec<f64>,
    pub witnesses: BTreeMap<String, CMatrix>,
}

impl ConicSolution {
    pub fn is_solved(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::Inaccurate)
    }

    pub fn value(&self, e: &LinExpr) -> f64 {
        e.eval(&self.x)
    }

    pub fn matrix(&self, m: &MatExpr) -> CMatrix {
        m.eval(&self.x)
    }

    pub fn operator(&self, m: &MatExpr) -> HermitianOperator {
        hermitian_part(m.eval(&self.x))
    }

    pub fn witness(&self, name: &str) -> Option<&CMatrix> {
        self.witnesses.get(name)
    }

    fn require_solved(self) -> Result<Self> {
        match self.status {
            SolveStatus::Optimal | SolveStatus::Inaccurate => Ok(self),
            other => Err(Error::SolverFailure(format!("unexpected status {other:?}"))),
        }
    }
}

/// Both sides of the root-fidelity SDP.
#[derive(Debug, Clone)]
pub struct RootFidelitySdp {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub witness_x: CMatrix,
    pub witness_y: HermitianOperator,
    pub witness_z: HermitianOperator,
    pub status: SolveStatus,
}

/// `sup Re Tr X` over `[[ρ, X], [X†, σ]] ⪰ 0` and its dual
/// `½ inf Tr[Yρ] + Tr[Zσ]` over `[[Y, I], [I, Z]] ⪰ 0`.
pub fn root_fidelity_sdp(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    opts: &SolverOptions,
) -> Result<RootFidelitySdp> {
    rho.require_same_dim(sigma)?;
    rho.require_psd()?;
    sigma.require_psd()?;
    let n = rho.dim();

    let mut p = ConicProgram::new();
    let x = p.general("X", n, n);
    let blk = MatExpr::block(
        &MatExpr::from_operator(rho),
        &x,
        &x.adjoint(),
        &MatExpr::from_operator(sigma),
    )?;
    p.psd("coupling", blk)?;
    p.maximize(x.re_trace());
    let primal = p.solve(opts)?.require_solved()?;

    let mut d = ConicProgram::new();
    let y = d.hermitian("Y", n, false);
    let z = d.hermitian("Z", n, false);
    let id = MatExpr::identity(n);
    d.psd("coupling", MatExpr::block(&y, &id, &id, &z)?)?;
    d.minimize((y.inner(rho)? + z.inner(sigma)?) * 0.5);
    let dual = d.solve(opts)?.require_solved()?;

    let status = worst_status(primal.status, dual.status);
    let (pv, dv) = (primal.primal_value, dual.primal_value);
    Ok(RootFidelitySdp {
        primal: pv,
        dual: dv,
        gap: (pv - dv).abs() / (1.0 + pv.abs()),
        witness_x: primal.matrix(&x),
        witness_y: dual.operator(&y),
        witness_z: dual.operator(&z),
        status,
    })
}

pub(crate) fn worst_status(a: SolveStatus, b: SolveStatus) -> SolveStatus {
    if a == SolveStatus::Optimal && b == SolveStatus::Optimal {
        SolveStatus::Optimal
    } else if a == SolveStatus::Optimal {
        b
    } else {
        a
    }
}

/// Result of the hypothesis-testing program.
#[derive(Debug, Clone)]
pub struct HypothesisTest {
    pub bits: f64,
    /// Optimal type-II error `min Tr[Λσ]`.
    pub type_two: f64,
    /// Value of the separately solved dual, in bits.
    pub dual_bits: f64,
    pub gap: f64,
    /// Optimal test, projected into `[0, I]`.
    pub lambda: HermitianOperator,
    pub status: SolveStatus,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain(format!("epsilon {eps} outside [0, 1)")));
    }
    Ok(())
}

fn neg_log2(v: f64) -> f64 {
    if v > 0.0 {
        -v.log2()
    } else {
        f64::INFINITY
    }
}

/// `D^ε_min(ρ‖σ) = −log2 min Tr[Λσ]` over `0 ≤ Λ ≤ I`, `Tr[Λρ] ≥ 1 − ε`.
pub fn hypothesis_testing(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    eps: f64,
    opts: &SolverOptions,
) -> Result<HypothesisTest> {
    hypothesis_testing_blocks(
        std::slice::from_ref(rho),
        std::slice::from_ref(sigma),
        eps,
        opts,
    )
}

/// Hypothesis testing for block-diagonal `ρ = ⊕ ρ_k`, `σ = ⊕ σ_k`.
/// The optimal test can be taken block diagonal, one block per summand.
pub fn hypothesis_testing_blocks(
    rho_blocks: &[HermitianOperator],
    sigma_blocks: &[HermitianOperator],
    eps: f64,
    opts: &SolverOptions,
) -> Result<HypothesisTest> {
    check_eps(eps)?;
    if rho_blocks.len() != sigma_blocks.len() {
        return Err(Error::DimensionMismatch(
            rho_blocks.len(),
            sigma_blocks.len(),
        ));
    }
    if rho_blocks.is_empty() {
        return Err(Error::Empty);
    }
    for (r, s) in rho_blocks.iter().zip(sigma_blocks) {
        r.require_same_dim(s)?;
        r.require_psd()?;
        s.require_psd()?;
    }
    let total: usize = rho_blocks.iter().map(|r| r.dim()).sum();
    if total > 4096 {
        return Err(Error::TooLarge(format!(
            "block dimension {total} exceeds 4096"
        )));
    }
    let first = hypothesis_once(rho_blocks, sigma_blocks, eps, opts)?;
    // small type-II errors sit below the absolute stopping tolerance; re-solve at unit scale
    if first.type_two > 0.0 && first.type_two < 1e-2 {
        let s = first.type_two;
        let scaled: Vec<HermitianOperator> =
            sigma_blocks.iter().map(|b| b.scale(1.0 / s)).collect();
        let mut h = hypothesis_once(rho_blocks, &scaled, eps, opts)?;
        h.type_two *= s;
        h.bits = neg_log2(h.type_two);
        h.dual_bits -= s.log2();
        return Ok(h);
    }
    Ok(first)
}

fn hypothesis_once(
    rho_blocks: &[HermitianOperator],
    sigma_blocks: &[HermitianOperator],
    eps: f64,
    opts: &SolverOptions,
) -> Result<HypothesisTest> {
    let mut p = ConicProgram::new();
    let mut accept = LinExpr::default();
    let mut cost = LinExpr::default();
    let mut lambdas = Vec::with_capacity(rho_blocks.len());
    for (k, (r, s)) in rho_blocks.iter().zip(sigma_blocks).enumerate() {
        let l = p.hermitian(&format!("Lambda{k}"), r.dim(), true);
        p.psd(&format!("upper{k}"), MatExpr::identity(r.dim()).sub(&l)?)?;
        accept = accept + l.inner(r)?;
        cost = cost + l.inner(s)?;
        lambdas.push(l);
    }
    p.nonneg(accept - (1.0 - eps));
    p.minimize(cost);
    let primal = p.solve(opts)?.require_solved()?;

    // max (1−ε)μ − Σ Tr W_k  s.t.  σ_k − μρ_k + W_k ⪰ 0, W_k ⪰ 0, μ ≥ 0
    let mut d = ConicProgram::new();
    let mu = d.scalar("mu", true);
    let mut obj = mu.clone() * (1.0 - eps);
    for (k, (r, s)) in rho_blocks.iter().zip(sigma_blocks).enumerate() {
        let w = d.hermitian(&format!("W{k}"), r.dim(), true);
        let slack = MatExpr::from_operator(s)
            .add(&w)?
            .sub(&MatExpr::times(&mu, r.matrix()))?;
        d.psd(&format!("slack{k}"), slack)?;
        obj = obj - w.re_trace();
    }
    d.maximize(obj);
    let dual = d.solve(opts)?.require_solved()?;

    let type_two = primal.primal_value.max(0.0);
    let dual_val = dual.primal_value.max(0.0);
    let blocks: Vec<HermitianOperator> = lambdas
        .iter()
        .map(|l| primal.operator(l).map_spectrum(|v| v.clamp(0.0, 1.0)))
        .collect();
    let lambda = block_diag_operator(&blocks);
    Ok(HypothesisTest {
        bits: neg_log2(type_two),
        type_two,
        dual_bits: neg_log2(dual_val),
        gap: (type_two - dual_val).abs() / (1.0 + type_two.abs()),
        lambda,
        status: worst_status(primal.status, dual.status),
    })
}

pub(crate) fn block_diag_operator(blocks: &[HermitianOperator]) -> HermitianOperator {
    let n: usize = blocks.iter().map(|b| b.dim()).sum();
    let mut m = CMatrix::zeros(n, n);
    let mut o = 0;
    for b in blocks {
        let d = b.dim();
        m.view_mut((o, o), (d, d)).copy_from(b.matrix());
        o += d;
    }
    HermitianOperator::from_hermitian_unchecked(m)
}

/// `I^ε_min(A;B) = D^ε_min(ρ_AB ‖ ρ_A ⊗ ρ_B)`.
pub fn smooth_min_mutual_info(
    rho_ab: &HermitianOperator,
    label: BipartiteLabel,
    eps: f64,
    opts: &SolverOptions,
) -> Result<HypothesisTest> {
    label.check(rho_ab.dim())?;
    let a = rho_ab.partial_trace(label, Subsystem::A)?;
    let b = rho_ab.partial_trace(label, Subsystem::B)?;
    hypothesis_testing(rho_ab, &a.kron(&b), eps, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::d_min_projector;
    use crate::operator::{
        fidelity, random_channel, random_psd, random_pure_state, random_state, root_fidelity,
        seeded_rng, DensityOperator,
    };
    use proptest::prelude::*;
    use rand::Rng;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn dmax_toy_program() {
        let mut rng = seeded_rng(31);
        let rho = random_state(&mut rng, 3);
        let mut p = ConicProgram::new();
        let lam = p.scalar("lambda", false);
        let lhs = MatExpr::times(&lam, rho.matrix());
        p.psd("order", lhs.sub(&MatExpr::from_operator(&rho)).unwrap())
            .unwrap();
        p.minimize(lam.clone());
        let sol = p.solve(&opts()).unwrap();
        assert_eq!(
            sol.status,
            SolveStatus::Optimal,
            "{:?}",
            (
                sol.gap,
                sol.max_lmi_violation,
                sol.primal_value,
                sol.dual_value
            )
        );
        assert!((sol.value(&lam) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn infeasible_toy_program() {
        let mut p = ConicProgram::new();
        let x = p.scalar("x", false);
        p.nonneg(x.clone() - 1.0);
        p.nonneg(-x.clone());
        p.minimize(x);
        let sol = p.solve(&opts()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn unbounded_toy_program() {
        let mut p = ConicProgram::new();
        let x = p.scalar("x", false);
        p.nonneg(x.clone());
        p.maximize(x);
        assert_eq!(p.solve(&opts()).unwrap().status, SolveStatus::Unbounded);
    }

    #[test]
    fn non_hermitian_lmi_is_a_model_error() {
        let mut p = ConicProgram::new();
        let x = p.general("X", 2, 2);
        assert!(matches!(p.psd("bad", x), Err(Error::Model(_))));
        let m = MatExpr::identity(2);
        assert!(matches!(m.add(&MatExpr::identity(3)), Err(Error::Model(_))));
    }

    #[test]
    fn foreign_variables_are_rejected() {
        let mut other = ConicProgram::new();
        let _ = other.scalar("a", false);
        let y = other.scalar("b", false);
        let mut p = ConicProgram::new();
        p.minimize(y);
        assert!(matches!(p.solve(&opts()), Err(Error::Model(_))));
    }

    #[test]
    fn root_fidelity_examples() {
        let zero = HermitianOperator::basis_projector(2, 0);
        let one = HermitianOperator::basis_projector(2, 1);
        let r = root_fidelity_sdp(&zero, &zero, &opts()).unwrap();
        assert!((r.primal - 1.0).abs() < 1e-6 && (r.dual - 1.0).abs() < 1e-6);
        let r = root_fidelity_sdp(&zero, &one, &opts()).unwrap();
        assert!(r.primal.abs() < 1e-6 && r.dual.abs() < 1e-5, "{r:?}");

        let a = HermitianOperator::diag(&[0.5, 0.5]);
        let b = HermitianOperator::diag(&[0.9, 0.1]);
        let r = root_fidelity_sdp(&a, &b, &opts()).unwrap();
        let oracle = root_fidelity(&a, &b).unwrap();
        assert!((r.primal - oracle).abs() < 1e-7);
        assert!((r.dual - oracle).abs() < 1e-7);
        assert!((oracle - 0.8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn root_fidelity_matches_spectral_on_random_pairs() {
        let mut rng = seeded_rng(32);
        for _ in 0..10 {
            let dim = rng.random_range(2..=4);
            let a = random_psd(&mut rng, dim);
            let b = random_psd(&mut rng, dim);
            let r = root_fidelity_sdp(&a, &b, &opts()).unwrap();
            let f = fidelity(&a, &b).unwrap().sqrt();
            assert!((r.primal - f).abs() < 1e-7, "{} {}", r.primal, f);
            assert!((r.dual - f).abs() < 1e-7, "{} {} {:?}", r.dual, f, r.status);
            assert!(r.gap <= 1e-6);
        }
    }

    #[test]
    fn hypothesis_testing_examples() {
        let mut rng = seeded_rng(33);
        let rho = random_state(&mut rng, 3);
        let h = hypothesis_testing(&rho, &rho, 0.5, &opts()).unwrap();
        assert!((h.bits - 1.0).abs() < 1e-6);

        let p = HermitianOperator::diag(&[0.5, 0.5]);
        let q = HermitianOperator::diag(&[0.9, 0.1]);
        let h = hypothesis_testing(&p, &q, 0.5, &opts()).unwrap();
        assert!((h.bits - 10f64.log2()).abs() < 1e-6);
        assert!(h.gap <= 1e-6);
        assert!(h.lambda.min_eigenvalue() >= 0.0 && h.lambda.max_eigenvalue() <= 1.0);

        let pure = random_pure_state(&mut rng, 2);
        let sigma = random_psd(&mut rng, 2);
        let h = hypothesis_testing(&pure, &sigma, 0.0, &opts()).unwrap();
        let oracle = d_min_projector(&pure, &sigma).unwrap().bits;
        assert!((h.bits - oracle).abs() < 1e-6, "{} {}", h.bits, oracle);
    }

    #[test]
    fn block_variant_matches_dense() {
        let mut rng = seeded_rng(34);
        let r1 = random_psd(&mut rng, 2).scale(0.5);
        let r2 = random_psd(&mut rng, 2).scale(0.5);
        let s1 = random_psd(&mut rng, 2);
        let s2 = random_psd(&mut rng, 2);
        let norm = r1.trace() + r2.trace();
        let (r1, r2) = (r1.scale(1.0 / norm), r2.scale(1.0 / norm));
        let blocks = hypothesis_testing_blocks(
            &[r1.clone(), r2.clone()],
            &[s1.clone(), s2.clone()],
            0.2,
            &opts(),
        )
        .unwrap();
        let dense = hypothesis_testing(
            &block_diag_operator(&[r1, r2]),
            &block_diag_operator(&[s1, s2]),
            0.2,
            &opts(),
        )
        .unwrap();
        assert!((blocks.bits - dense.bits).abs() < 1e-6);
    }

    #[test]
    fn smooth_min_mutual_info_examples() {
        let label = BipartiteLabel::new(2, 2).unwrap();
        let mut rng = seeded_rng(35);
        let prod = random_state(&mut rng, 2).kron(&random_state(&mut rng, 2));
        let v = smooth_min_mutual_info(&prod, label, 0.3, &opts()).unwrap();
        assert!((v.bits - (1.0 / 0.7f64).log2()).abs() < 1e-6);

        let phibar = DensityOperator::classical(&[0.5, 0.0, 0.0, 0.5]).unwrap();
        let v = smooth_min_mutual_info(&phibar, label, 0.0, &opts()).unwrap();
        assert!((v.bits - 1.0).abs() < 1e-6);

        let rho = random_state(&mut rng, 4);
        let mut last = f64::NEG_INFINITY;
        for eps in [0.0, 0.1, 0.2, 0.4, 0.8] {
            let v = smooth_min_mutual_info(&rho, label, eps, &opts())
                .unwrap()
                .bits;
            assert!(v >= last - 1e-7);
            last = v;
        }
    }

    #[test]
    fn hypothesis_testing_scaling_and_dpi() {
        let mut rng = seeded_rng(36);
        for _ in 0..5 {
            let rho = random_state(&mut rng, 3);
            let sigma = random_psd(&mut rng, 3);
            let base = hypothesis_testing(&rho, &sigma, 0.1, &opts()).unwrap().bits;
            let scaled = hypothesis_testing(&rho, &sigma.scale(2.5), 0.1, &opts())
                .unwrap()
                .bits;
            assert!((scaled - (base - 2.5f64.log2())).abs() < 1e-7);

            let ch = random_channel(&mut rng, 3, 2, 2);
            let after = hypothesis_testing(
                &ch.apply(&rho).unwrap(),
                &ch.apply(&sigma).unwrap(),
                0.1,
                &opts(),
            )
            .unwrap()
            .bits;
            assert!(after <= base + 1e-6);
        }
    }

    #[test]
    fn dump_writes_self_describing_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("prog.json");
        let mut p = ConicProgram::new();
        let x = p.hermitian("X", 2, true);
        p.nonneg(x.re_trace() - 1.0);
        p.minimize(x.re_trace());
        let o = SolverOptions {
            dump: Some(path.clone()),
            ..SolverOptions::default()
        };
        p.solve(&o).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["blocks"][0]["name"], "X");
        assert!(v["cones"].as_array().unwrap().len() >= 2);
    }

    struct Scripted(RawStatus, Vec<f64>, f64, f64);

    impl ConicBackend for Scripted {
        fn name(&self) -> &'static str {
            "scripted"
        }
        fn solve(&self, _: &StandardForm, _: &SolverOptions) -> Result<RawSolution> {
            Ok(RawSolution {
                status: self.0.clone(),
                x: self.1.clone(),
                primal_obj: self.2,
                dual_obj: self.3,
                iterations: 1,
            })
        }
    }

    fn toy() -> (ConicProgram, LinExpr) {
        let mut p = ConicProgram::new();
        let x = p.scalar("x", false);
        p.nonneg(x.clone() - 1.0);
        p.minimize(x.clone());
        (p, x)
    }

    #[test]
    fn backend_statuses_are_mapped() {
        let (p, _) = toy();
        let s = p
            .solve_with(&Scripted(RawStatus::Solved, vec![1.0], 1.0, 1.0), &opts())
            .unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);

        // a witness violating x ≥ 1 cannot be reported optimal
        let s = p
            .solve_with(&Scripted(RawStatus::Solved, vec![0.5], 0.5, 0.5), &opts())
            .unwrap();
        assert_eq!(s.status, SolveStatus::Inaccurate);

        let s = p
            .solve_with(
                &Scripted(RawStatus::AlmostSolved, vec![1.0], 1.0, 1.0 - 1e-9),
                &opts(),
            )
            .unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);

        let s = p
            .solve_with(
                &Scripted(RawStatus::PrimalInfeasible, vec![0.0], 0.0, 0.0),
                &opts(),
            )
            .unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);

        let err = p
            .solve_with(
                &Scripted(RawStatus::NumericalError, vec![0.0], 0.0, 3.0),
                &opts(),
            )
            .unwrap_err();
        assert!(matches!(err, Error::SolverFailure(_)));

        let err = p
            .solve_with(&Scripted(RawStatus::Solved, vec![], 0.0, 0.0), &opts())
            .unwrap_err();
        assert!(matches!(err, Error::SolverFailure(_)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn embedding_preserves_psd(seed in any::<u64>(), dim in 1usize..5, shift in -0.5f64..0.5) {
            let mut rng = seeded_rng(seed);
            let m = random_psd(&mut rng, dim).sub(&HermitianOperator::identity(dim).scale(shift));
            let emb = real_embedding(m.matrix());
            let min_emb = emb.symmetric_eigenvalues().min();
            let min_m = m.min_eigenvalue();
            prop_assert!((min_emb - min_m).abs() < 1e-10);
            if min_m.abs() > 1e-9 {
                prop_assert_eq!(min_m > 0.0, min_emb > 0.0);
            }
        }
    }
}
