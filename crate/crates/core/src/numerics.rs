//! Dense complex linear algebra for small channel matrices.
//!
//! Everything here is sized for antenna arrays (dimensions of a handful), so
//! the routines favour clarity and explicit tolerances over blocking or SIMD.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Convergence tolerance on the change between successive power-method iterates.
pub const EIG_TOL: f64 = 1e-12;
/// Iteration cap for [`dominant_right_eigvec`].
pub const EIG_MAX_ITER: usize = 10_000;
/// Pivots smaller than this abort [`mat_inverse`].
pub const MIN_PIVOT: f64 = 1e-14;
/// 1-norm condition estimate above which [`mat_inverse`] reports singularity.
pub const MAX_CONDITION: f64 = 1e12;

const START_PERTURBATION: f64 = 1e-3;
const PHASE_THRESHOLD: f64 = 1e-12;

/// Column vector of complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct CVector(Vec<Complex64>);

impl CVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        CVector(entries)
    }

    pub fn from_real(entries: &[f64]) -> Self {
        CVector(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        CVector(vec![Complex64::new(0.0, 0.0); dim])
    }

    /// Standard basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[index] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Hermitian inner product `self^H other`.
    pub fn inner(&self, other: &CVector) -> Complex64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&self, c: Complex64) -> CVector {
        CVector(self.0.iter().map(|z| z * c).collect())
    }

    pub fn scale_real(&self, c: f64) -> CVector {
        CVector(self.0.iter().map(|z| z * c).collect())
    }

    /// Unit-norm copy, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<CVector> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            None
        } else {
            Some(self.scale_real(1.0 / n))
        }
    }

    /// Rotates the vector so its first entry above the phase threshold is real
    /// and nonnegative.
    pub fn with_canonical_phase(mut self) -> CVector {
        if let Some(z) = self.0.iter().find(|z| z.norm() > PHASE_THRESHOLD) {
            let rot = z.conj() / z.norm();
            for e in &mut self.0 {
                *e *= rot;
            }
        }
        self
    }

    pub fn max_abs_diff(&self, other: &CVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for CVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// Builds a matrix whose rows are the given vectors.
    pub fn from_rows(rows: &[CVector]) -> Result<Self> {
        let cols = rows.first().map_or(0, CVector::dim);
        if rows.iter().any(|r| r.dim() != cols) {
            return Err(Error::ShapeMismatch("rows have unequal lengths".into()));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.entries().iter().copied())
            .collect();
        Self::new(rows.len(), cols, data)
    }

    /// Outer product `u v^H`.
    pub fn outer(u: &CVector, v: &CVector) -> Self {
        let mut m = Self::zeros(u.dim(), v.dim());
        for i in 0..u.dim() {
            for j in 0..v.dim() {
                m[(i, j)] = u[i] * v[j].conj();
            }
        }
        m
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

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> CVector {
        CVector::new(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn column(&self, j: usize) -> CVector {
        CVector::new((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn scale(&self, c: Complex64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    /// Matrix product with compensated (twice-working-precision) dot products.
    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                out.data[i * other.cols + j] =
                    compensated_dot((0..self.cols).map(|k| (self[(i, k)], other[(k, j)])));
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &CVector) -> Result<CVector> {
        if self.cols != v.dim() {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} matrix by vector of length {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        Ok(CVector::new(
            self.data
                .chunks_exact(self.cols)
                .map(|row| row.iter().zip(v.entries()).map(|(a, b)| a * b).sum())
                .collect(),
        ))
    }

    /// Gram matrix `A^H A`.
    pub fn gram(&self) -> CMatrix {
        let n = self.cols;
        let mut g = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let s: Complex64 = (0..self.rows)
                    .map(|r| self[(r, i)].conj() * self[(r, j)])
                    .sum();
                g[(i, j)] = s;
                g[(j, i)] = s.conj();
            }
        }
        g
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
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
        assert_eq!(self.shape(), rhs.shape());
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), rhs.shape());
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).expect("inner dimensions must agree")
    }
}

/// Conjugate transpose.
pub fn hermitian(a: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.cols, a.rows);
    for i in 0..a.rows {
        for j in 0..a.cols {
            out[(j, i)] = a[(i, j)].conj();
        }
    }
    out
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Accumulates real products exactly up to a final rounding (Ogita-Rump-Oishi
/// Dot2): the result is as accurate as if computed in twice the precision.
#[derive(Default)]
struct Dot2 {
    sum: f64,
    err: f64,
}

impl Dot2 {
    #[inline]
    fn add_prod(&mut self, a: f64, b: f64) {
        let (p, pe) = two_prod(a, b);
        let (s, se) = two_sum(self.sum, p);
        self.sum = s;
        self.err += pe + se;
    }

    fn value(&self) -> f64 {
        self.sum + self.err
    }
}

/// `sum_k x_k y_k` over complex pairs with compensated accumulation.
fn compensated_dot(pairs: impl Iterator<Item = (Complex64, Complex64)>) -> Complex64 {
    let (mut re, mut im) = (Dot2::default(), Dot2::default());
    for (x, y) in pairs {
        re.add_prod(x.re, y.re);
        re.add_prod(-x.im, y.im);
        im.add_prod(x.re, y.im);
        im.add_prod(x.im, y.re);
    }
    Complex64::new(re.value(), im.value())
}

/// Gauss-Jordan inverse with partial pivoting, polished by iterative
/// refinement.
///
/// Fails with [`Error::SingularMatrix`] when a pivot drops below [`MIN_PIVOT`]
/// or the 1-norm condition estimate exceeds [`MAX_CONDITION`].
pub fn mat_inverse(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "cannot invert a {}x{} matrix",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    let mut work = a.clone();
    let mut inv = CMatrix::identity(n);

    for col in 0..n {
        let (pivot_row, pivot_mag) =
            (col..n)
                .map(|r| (r, work[(r, col)].norm()))
                .fold(
                    (col, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pivot_mag < MIN_PIVOT {
            return Err(Error::SingularMatrix(format!(
                "pivot {pivot_mag:.3e} in column {col}"
            )));
        }
        if pivot_row != col {
            for j in 0..n {
                work.data.swap(col * n + j, pivot_row * n + j);
                inv.data.swap(col * n + j, pivot_row * n + j);
            }
        }
        let p = work[(col, col)].inv();
        for j in 0..n {
            work[(col, j)] *= p;
            inv[(col, j)] *= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = work[(r, col)];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                let wv = work[(col, j)];
                let iv = inv[(col, j)];
                work[(r, j)] -= f * wv;
                inv[(r, j)] -= f * iv;
            }
        }
    }

    // two steps of iterative refinement X += X (I - A X), residual in
    // compensated arithmetic
    let identity = CMatrix::identity(n);
    for _ in 0..2 {
        let residual = &identity - &a.matmul(&inv)?;
        inv = &inv + &inv.matmul(&residual)?;
    }

    let cond = a.norm_one() * inv.norm_one();
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(Error::SingularMatrix(format!(
            "condition estimate {cond:.3e}"
        )));
    }
    Ok(inv)
}

/// Dominant right singular vector of `a` by power iteration on `a^H a`.
///
/// Returns the unit vector `v` (canonical phase) and `||a v||^2`, the largest
/// eigenvalue of the Gram matrix. Iteration stops once successive iterates
/// differ by less than `tol`.
pub fn dominant_right_eigvec(a: &CMatrix, tol: f64, max_iter: usize) -> Result<(CVector, f64)> {
    let n = a.cols;
    let gram = a.gram();
    let mut v = vec![Complex64::new(START_PERTURBATION, 0.0); n];
    v[0] = Complex64::new(1.0, 0.0);
    let start_norm = (1.0 + (n - 1) as f64 * START_PERTURBATION * START_PERTURBATION).sqrt();
    v.iter_mut().for_each(|z| *z /= start_norm);
    let mut next = vec![Complex64::new(0.0, 0.0); n];

    let mut change = f64::INFINITY;
    for _ in 0..max_iter {
        for (i, out) in next.iter_mut().enumerate() {
            *out = gram.data[i * n..(i + 1) * n]
                .iter()
                .zip(&v)
                .map(|(g, x)| g * x)
                .sum();
        }
        let norm = next.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            // zero matrix: every direction is dominant
            return Ok((CVector(v).with_canonical_phase(), 0.0));
        }
        // normalize and rotate to the canonical phase in one pass
        let pivot = next
            .iter()
            .find(|z| z.norm() > PHASE_THRESHOLD * norm)
            .copied()
            .unwrap_or(Complex64::new(1.0, 0.0));
        let rot = pivot.conj() / (pivot.norm() * norm);
        change = 0.0;
        for (x, old) in next.iter_mut().zip(&v) {
            *x *= rot;
            change = f64::max(change, (*x - old).norm());
        }
        std::mem::swap(&mut v, &mut next);
        if change < tol {
            let v = CVector(v);
            let lambda = a.mul_vec(&v)?.norm_sqr();
            return Ok((v, lambda));
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        last_change: change,
    })
}

/// Dominant eigenvector of a Hermitian PSD matrix by repeated squaring.
///
/// Squaring raises the eigenvalue ratio to a power of two per step, so near-
/// degenerate spectra that stall plain power iteration still converge. Used as
/// the fallback when [`dominant_right_eigvec`] reports no convergence.
pub fn dominant_eigvec_by_squaring(gram: &CMatrix) -> Result<CVector> {
    if !gram.is_square() {
        return Err(Error::ShapeMismatch("Gram matrix must be square".into()));
    }
    let n = gram.rows;
    let mut m = gram.clone();
    for _ in 0..64 {
        let scale = m.max_abs();
        if scale == 0.0 {
            return Ok(CVector::basis(n, 0));
        }
        m = m.scale(Complex64::new(1.0 / scale, 0.0));
        m = &m * &m;
    }
    let best = (0..n)
        .map(|j| m.column(j))
        .max_by(|x, y| x.norm_sqr().total_cmp(&y.norm_sqr()))
        .expect("non-empty matrix");
    Ok(best
        .normalized()
        .unwrap_or_else(|| CVector::basis(n, 0))
        .with_canonical_phase())
}
