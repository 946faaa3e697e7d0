//! Dense complex and real matrix kernel.
//!
//! Everything the engines need and nothing more: arithmetic, a cyclic
//! Jacobi eigensolver for Hermitian matrices, PSD square roots, the matrix
//! absolute value `|a| = sqrt(a* a)`, seeded Haar unitaries and a pairwise
//! linear-dependence test. All norms are Frobenius norms.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative reconstruction tolerance of the eigensolver.
pub const TOL_EIG: f64 = 1e-11;
/// Relative tolerance for Hermiticity of inputs.
pub const TOL_INPUT: f64 = 1e-9;
/// Relative tolerance below which negative eigenvalues are clamped to zero.
pub const TOL_PSD: f64 = 1e-9;
/// Eigenvalues of a PSD matrix below `DUST·λ_max` are rounding noise.
pub const DUST: f64 = 64.0 * f64::EPSILON;
/// Jacobi sweep cap.
pub const MAX_SWEEPS: usize = 100;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CMatrixRepr", into = "CMatrixRepr")]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct CMatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl From<CMatrix> for CMatrixRepr {
    fn from(m: CMatrix) -> Self {
        CMatrixRepr {
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<CMatrixRepr> for CMatrix {
    type Error = Error;

    fn try_from(r: CMatrixRepr) -> Result<Self> {
        let data = r.data.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        CMatrix::new(r.rows, r.cols, data)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, " ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: format!("{} entries", rows * cols),
                found: format!("{} entries", data.len()),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Real matrix from nested rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    /// The `rows x cols` matrix unit with a single 1 at `(i, j)`.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m[(i, j)] = ONE;
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { Complex64::new(values[i], 0.0) } else { ZERO })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `tr(self · other*)`, linear in `self`.
    pub fn frob_inner(&self, other: &CMatrix) -> Complex64 {
        debug_assert_eq!(self.shape(), other.shape());
        self.data.iter().zip(&other.data).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖self − other‖`.
    pub fn dist(&self, other: &CMatrix) -> f64 {
        debug_assert_eq!(self.shape(), other.shape());
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    /// `(self + self*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// `(self − self*) / 2i`, so that `self = hermitian_part + i·skew_hermitian_part`.
    pub fn skew_hermitian_part(&self) -> Self {
        let half_over_i = Complex64::new(0.0, -0.5);
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] - self[(j, i)].conj()) * half_over_i)
    }

    /// `‖self − self*‖`.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.dist(&self.adjoint())
    }

    pub fn matmul(&self, rhs: &CMatrix) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul: inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Seeded matrix with i.i.d. standard complex Gaussian entries.
    pub fn random_gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        Self::from_fn(rows, cols, |_, _| gaussian_complex(rng))
    }

    /// Seeded Hermitian matrix `(G + G*) / 2`.
    pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> Self {
        Self::random_gaussian(n, n, rng).hermitian_part()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), rhs.shape(), "add: shapes differ");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), rhs.shape(), "sub: shapes differ");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;

    fn neg(self) -> CMatrix {
        self.map(|z| -z)
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

/// Standard complex Gaussian: real and imaginary parts i.i.d. N(0, 1/2).
pub fn gaussian_complex(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// The RNG every seeded routine in the crate uses.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense row-major real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Serialize for RMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        RMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

impl RMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch { expected: format!("rows of length {c}"), found: "ragged rows".into() });
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self::from_fn(r, c, |i, j| rows[i][j]))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec()).collect()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[f64]) {
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &RMatrix) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul: inner dimensions differ");
        Self::from_fn(self.rows, rhs.cols, |i, j| (0..self.cols).map(|k| self[(i, k)] * rhs[(k, j)]).sum())
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec: dimensions differ");
        (0..self.rows).map(|i| (0..self.cols).map(|k| self[(i, k)] * v[k]).sum()).collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        RMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dist(&self, other: &RMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    pub fn to_complex(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| Complex64::new(self[(i, j)], 0.0))
    }
}

impl Index<(usize, usize)> for RMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition `H = V · diag(values) · V*` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermEig {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: CMatrix,
}

impl HermEig {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    pub fn reconstruct(&self) -> CMatrix {
        let v = &self.vectors;
        &(v * &CMatrix::diag_real(&self.values)) * &v.adjoint()
    }
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Sweeps the strict upper triangle in row-major order, so identical input
/// gives identical output. Each eigenvector is rotated so that its first
/// largest-modulus component is real and positive.
pub fn herm_eig(h: &CMatrix) -> Result<HermEig> {
    if !h.is_square() {
        return Err(Error::ShapeMismatch { expected: "square matrix".into(), found: format!("{}x{}", h.rows, h.cols) });
    }
    let n = h.rows;
    let scale = h.norm();
    let herm_res = h.hermiticity_residual();
    if herm_res > TOL_INPUT * scale {
        return Err(Error::NonHermitian { residual: herm_res / scale });
    }
    let mut a = h.hermitian_part();
    let mut v = CMatrix::identity(n);

    if scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let off = off_diagonal_norm(&a);
            if off <= f64::EPSILON * 1e-2 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    jacobi_rotate(&mut a, &mut v, p, q, scale);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = CMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    normalize_column_phases(&mut vectors);
    Ok(HermEig { values, vectors })
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi_rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, scale: f64) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag <= 1e-300 || mag <= f64::EPSILON * 1e-3 * scale {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta == 0.0 { 1.0 } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let phase_conj = (apq / mag).conj();

    // J = diag(1, conj(e)) · [[c, s], [-s, c]] acting on the (p, q) plane.
    let jpp = Complex64::new(c, 0.0);
    let jpq = Complex64::new(s, 0.0);
    let jqp = phase_conj * (-s);
    let jqq = phase_conj * c;

    let n = a.rows;
    // A <- A J
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    // A <- J* A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
    // V <- V J
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

fn normalize_column_phases(v: &mut CMatrix) {
    for k in 0..v.cols {
        let mut best = 0;
        let mut best_mag = -1.0;
        for i in 0..v.rows {
            let mag = v[(i, k)].norm();
            if mag > best_mag * (1.0 + 1e-12) {
                best = i;
                best_mag = mag;
            }
        }
        if best_mag <= 0.0 {
            continue;
        }
        let rot = v[(best, k)].conj() / best_mag;
        for i in 0..v.rows {
            v[(i, k)] *= rot;
        }
        v[(best, k)] = Complex64::new(v[(best, k)].re, 0.0);
    }
}

/// Unique PSD square root.
///
/// Negative eigenvalues down to `−TOL_PSD·‖P‖` are clamped to zero, as are
/// positive ones below the rounding floor `DUST·λ_max`; the square root
/// would otherwise blow that noise up to `sqrt(ε)` size.
pub fn psd_sqrt(p: &CMatrix) -> Result<CMatrix> {
    let eig = herm_eig(p)?;
    let scale = p.norm();
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -TOL_PSD * scale {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let floor = DUST * eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let roots: Vec<f64> = eig.values.iter().map(|&l| if l <= floor { 0.0 } else { l.sqrt() }).collect();
    let v = &eig.vectors;
    Ok((&(v * &CMatrix::diag_real(&roots)) * &v.adjoint()).hermitian_part())
}

/// Absolute value `|a| = sqrt(a* a)` of a square matrix.
pub fn abs_elem(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch { expected: "square matrix".into(), found: format!("{}x{}", a.rows, a.cols) });
    }
    psd_sqrt(&(&a.adjoint() * a).hermitian_part())
}

/// Seeded Haar-random unitary: QR of a complex Gaussian matrix with the
/// diagonal of R made positive.
pub fn random_unitary(n: usize, seed: u64) -> CMatrix {
    assert!(n >= 1, "random_unitary: n must be at least 1");
    let mut rng = seeded_rng(seed);
    let g = CMatrix::random_gaussian(n, n, &mut rng);
    orthonormalize_columns(&g)
}

/// Seeded Haar-random real orthogonal matrix.
pub fn random_orthogonal(n: usize, seed: u64) -> RMatrix {
    assert!(n >= 1, "random_orthogonal: n must be at least 1");
    let mut rng = seeded_rng(seed);
    let g = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.sample(StandardNormal), 0.0));
    let q = orthonormalize_columns(&g);
    RMatrix::from_fn(n, n, |i, j| q[(i, j)].re)
}

/// Modified Gram–Schmidt with one reorthogonalization pass; `R` has a
/// positive diagonal so the `Q` factor is unique.
fn orthonormalize_columns(g: &CMatrix) -> CMatrix {
    let (rows, cols) = g.shape();
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut col = g.column(j);
        for _ in 0..2 {
            for prev in &q {
                let r: Complex64 = prev.iter().zip(&col).map(|(p, c)| p.conj() * c).sum();
                for (c, p) in col.iter_mut().zip(prev) {
                    *c -= r * p;
                }
            }
        }
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for c in &mut col {
            *c /= norm;
        }
        q.push(col);
    }
    CMatrix::from_fn(rows, cols, |i, j| q[j][i])
}

/// Outcome of a successful linear-dependence test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LinDep {
    /// `b ≈ λ·a` with `a ≠ 0`.
    Multiple(Complex64),
    /// Both inputs vanish.
    BothZero,
}

/// Tests whether `b` is a scalar multiple of `a`. Returns `None` when the
/// pair is numerically independent (or `a = 0 ≠ b`).
pub fn lin_dep_pair(a: &CMatrix, b: &CMatrix, tol: f64) -> Option<LinDep> {
    assert_eq!(a.shape(), b.shape(), "lin_dep_pair: shapes differ");
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 && nb == 0.0 {
        return Some(LinDep::BothZero);
    }
    if na == 0.0 {
        return None;
    }
    let lambda = b.frob_inner(a) / (na * na);
    let residual = b.dist(&a.scale(lambda));
    (residual <= tol * na).then_some(LinDep::Multiple(lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eig_of_identity() {
        let e = herm_eig(&CMatrix::identity(2)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
        assert_eq!(e.vectors, CMatrix::identity(2));
    }

    #[test]
    fn eig_of_diagonal_sign_matrix() {
        let e = herm_eig(&CMatrix::diag_real(&[1.0, -1.0])).unwrap();
        assert_eq!(e.values, vec![1.0, -1.0]);
        assert_eq!(e.vectors, CMatrix::identity(2));
    }

    #[test]
    fn eig_sorts_descending_and_reconstructs() {
        let mut rng = seeded_rng(11);
        let h = CMatrix::random_hermitian(4, &mut rng);
        let e = herm_eig(&h).unwrap();
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        assert!(e.reconstruct().dist(&h) <= 1e-12 * h.norm());
        let vv = &e.vectors.adjoint() * &e.vectors;
        assert!(vv.dist(&CMatrix::identity(4)) <= TOL_EIG);
    }

    #[test]
    fn eig_is_deterministic() {
        let mut rng = seeded_rng(5);
        let h = CMatrix::random_hermitian(5, &mut rng);
        let a = herm_eig(&h).unwrap();
        let b = herm_eig(&h).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = CMatrix::unit(2, 2, 0, 1);
        assert!(matches!(herm_eig(&m), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn eig_of_zero_matrix() {
        let e = herm_eig(&CMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);
    }

    #[test]
    fn sqrt_of_diagonal() {
        let s = psd_sqrt(&CMatrix::diag_real(&[4.0, 1.0])).unwrap();
        assert!(s.dist(&CMatrix::diag_real(&[2.0, 1.0])) < 1e-15);
        assert!(psd_sqrt(&CMatrix::identity(3)).unwrap().dist(&CMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let p = CMatrix::diag_real(&[1.0, -0.5]);
        assert!(matches!(psd_sqrt(&p), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn sqrt_clamps_dust() {
        let p = CMatrix::diag_real(&[1.0, -1e-14]);
        let s = psd_sqrt(&p).unwrap();
        assert!(s.dist(&CMatrix::diag_real(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn abs_of_matrix_units() {
        let e12 = CMatrix::unit(2, 2, 0, 1);
        let abs = abs_elem(&e12).unwrap();
        let abs_adj = abs_elem(&e12.adjoint()).unwrap();
        assert!(abs.dist(&CMatrix::unit(2, 2, 1, 1)) < 1e-15);
        assert!(abs_adj.dist(&CMatrix::unit(2, 2, 0, 0)) < 1e-15);
        assert!(abs_elem(&CMatrix::identity(2)).unwrap().dist(&CMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn abs_rejects_rectangular() {
        assert!(abs_elem(&CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn unitary_scalar_has_unit_modulus() {
        for seed in 0..10 {
            let u = random_unitary(1, seed);
            assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn unitary_is_deterministic_and_unitary() {
        let a = random_unitary(4, 7);
        assert_eq!(a, random_unitary(4, 7));
        assert!((&a.adjoint() * &a).dist(&CMatrix::identity(4)) <= 1e-12);
        assert_ne!(a, random_unitary(4, 8));
    }

    #[test]
    fn orthogonal_is_orthogonal() {
        let q = random_orthogonal(5, 3);
        assert!(q.transpose().matmul(&q).dist(&RMatrix::identity(5)) <= 1e-12);
    }

    #[test]
    fn dependence_of_scaled_pair() {
        let mut rng = seeded_rng(1);
        let a = CMatrix::random_gaussian(2, 2, &mut rng);
        let b = a.scale(c(0.0, 2.0));
        match lin_dep_pair(&a, &b, 1e-12) {
            Some(LinDep::Multiple(l)) => assert!((l - c(0.0, 2.0)).norm() < 1e-14),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn independence_of_matrix_units() {
        let e11 = CMatrix::unit(2, 2, 0, 0);
        let e22 = CMatrix::unit(2, 2, 1, 1);
        assert_eq!(lin_dep_pair(&e11, &e22, 1e-9), None);
        let z = CMatrix::zeros(2, 2);
        assert_eq!(lin_dep_pair(&z, &z, 1e-9), Some(LinDep::BothZero));
        assert_eq!(lin_dep_pair(&z, &e11, 1e-9), None);
    }

    #[test]
    fn json_layout() {
        let m = CMatrix::new(1, 2, vec![c(1.0, 0.0), c(0.5, -2.0)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rows":1,"cols":2,"data":[[1.0,0.0],[0.5,-2.0]]}"#);
        let back: CMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<CMatrix>(r#"{"rows":2,"cols":2,"data":[[1.0,0.0]]}"#).is_err());
    }
}
