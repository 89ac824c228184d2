//! Dense row-major matrices sized for desk-scale systems.
//!
//! This is deliberately minimal: the solver and the simulators only need
//! products, transposes, norms, and a robust spectral radius for small
//! matrices, so the crate carries its own storage type instead of a general
//! linear-algebra dependency.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Number of rescaled squarings used by the spectral-radius estimate.
const SQUARINGS: usize = 12;

/// Errors from the dense and symmetric linear-algebra routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    /// Operation requires a square matrix.
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    /// Row lengths disagree or dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// Dimension exceeds the supported desk scale.
    #[error("dimension {n} exceeds the supported maximum {max}")]
    TooLarge { n: usize, max: usize },
    /// A factorization pivot failed: the matrix is not positive definite.
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    /// Entries must be finite.
    #[error("matrix has non-finite entries")]
    NonFinite,
    /// An iterative routine did not converge.
    #[error("iteration failed to converge: {0}")]
    NoConvergence(&'static str),
}

/// Dense matrix with row-major storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    /// Builds a matrix from rows; all rows must have equal, nonzero length.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, LinalgError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(LinalgError::Dimension("matrix must be nonempty".into()));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(LinalgError::Dimension(format!(
                    "row {i} has length {}, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    /// Builds a matrix by evaluating `f(i, j)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Whether the matrix is square.
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Entry at `(i, j)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    /// Sets the entry at `(i, j)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Rows as owned vectors (for serialization-friendly formats).
    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// All entries finite?
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out.get(i, j) + aik * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Matrix-vector product `self * x`.
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.cols, x.len(), "vector length must match columns");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// Transpose.
    pub fn transpose(&self) -> Mat<T> {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Every entry multiplied by `s`.
    pub fn scaled(&self, s: T) -> Mat<T> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| v * s).collect() }
    }

    /// Entrywise sum.
    pub fn add(&self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    /// Entrywise difference.
    pub fn sub(&self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }
}

/// Euclidean norm of a vector.
pub(crate) fn vec_norm<T: Scalar>(x: &[T]) -> T {
    x.iter().map(|&v| v * v).sum::<T>().sqrt()
}

/// Dot product.
pub(crate) fn vec_dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&a, &b)| a * b).sum()
}

/// Spectral radius of a 2x2 matrix from the characteristic polynomial.
fn rho_2x2<T: Scalar>(a00: T, a01: T, a10: T, a11: T) -> T {
    let half = T::from(0.5).unwrap();
    let tr = a00 + a11;
    let det = a00 * a11 - a01 * a10;
    let disc = tr * tr * half * half - det;
    if disc >= T::zero() {
        let root = disc.sqrt();
        (tr * half + root).abs().max((tr * half - root).abs())
    } else {
        // Complex conjugate pair of modulus sqrt(det).
        det.abs().sqrt()
    }
}

/// Largest singular value, estimated by power iteration on `AᵀA`.
pub fn spectral_norm_est<T: Scalar>(a: &Mat<T>) -> T {
    let n = a.cols();
    let mut v: Vec<T> = (0..n).map(|i| T::one() / T::from(i + 1).unwrap()).collect();
    let nv = vec_norm(&v);
    for x in v.iter_mut() {
        *x /= nv;
    }
    let at = a.transpose();
    let mut lambda = T::zero();
    for _ in 0..40 {
        let w = at.matvec(&a.matvec(&v));
        let nw = vec_norm(&w);
        if nw == T::zero() {
            return T::zero();
        }
        lambda = nw;
        for (x, &y) in v.iter_mut().zip(&w) {
            *x = y / nw;
        }
    }
    lambda.sqrt()
}

/// Spectral radius of a square matrix with finite entries, accurate to about
/// 1e-6 relative.
///
/// Strategy: exact formulas for orders 1 and 2; otherwise a Gelfand estimate
/// from twelve rescaled squarings (so the effective power is 2^12) refined by
/// power iteration, which recovers the dominant one- or two-dimensional
/// invariant subspace and reads the radius off the restriction of `A` to it.
/// The refinement is accepted only when its invariance residual is tiny,
/// which holds whenever the dominant modulus is attained by a single real
/// eigenvalue, a conjugate pair, or a `±λ` pair (the generic cases).
pub fn spectral_radius<T: Scalar>(a: &Mat<T>) -> Result<T, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = a.rows();
    if n == 1 {
        return Ok(a.get(0, 0).abs());
    }
    if n == 2 {
        return Ok(rho_2x2(a.get(0, 0), a.get(0, 1), a.get(1, 0), a.get(1, 1)));
    }

    // Rescaled repeated squaring: b ~ A^(2^k) / exp(log_scale).
    let underflow_guard = T::from(1e-150).unwrap();
    let mut b = a.clone();
    let mut log_scale = T::zero();
    let mut power = T::one();
    for _ in 0..SQUARINGS {
        let f = b.frobenius_norm();
        if f == T::zero() {
            // A power of A vanished: the matrix is nilpotent.
            return Ok(T::zero());
        }
        if f < underflow_guard {
            break;
        }
        let scaled = b.scaled(T::one() / f);
        b = scaled.matmul(&scaled);
        log_scale = (log_scale + f.ln()) * T::from(2.0).unwrap();
        power *= T::from(2.0).unwrap();
    }
    let norm_b = spectral_norm_est(&b).max(T::min_positive_value());
    let rho_gelfand = ((log_scale + norm_b.ln()) / power).exp();

    // Power iteration on b ~ A^(2^k) to capture the dominant invariant
    // subspace, then read the radius from the restriction of A itself.
    let mut y: Vec<T> = (0..n)
        .map(|i| T::one() + T::from(i).unwrap() / T::from(n).unwrap() * T::from(0.7).unwrap())
        .collect();
    for _ in 0..4 {
        let z = b.matvec(&y);
        let nz = vec_norm(&z);
        if nz < T::min_positive_value() {
            return Ok(rho_gelfand);
        }
        y = z.iter().map(|&v| v / nz).collect();
    }
    // Orthonormal basis of span{y, Ay}.
    let q1 = y;
    let w = a.matvec(&q1);
    let alpha = vec_dot(&q1, &w);
    let mut r: Vec<T> = w.iter().zip(&q1).map(|(&wi, &qi)| wi - alpha * qi).collect();
    let norm_r = vec_norm(&r);
    let scale = a.frobenius_norm().max(T::min_positive_value());
    let res_tol = T::from(1e-9).unwrap() * scale;
    if norm_r <= res_tol {
        // One-dimensional invariant subspace: |alpha| is the exact radius of
        // the restriction and dominates all other moduli.
        return Ok(alpha.abs());
    }
    for x in r.iter_mut() {
        *x /= norm_r;
    }
    let q2 = r;
    let aq1 = w;
    let aq2 = a.matvec(&q2);
    let h00 = alpha;
    let h01 = vec_dot(&q1, &aq2);
    let h10 = vec_dot(&q2, &aq1);
    let h11 = vec_dot(&q2, &aq2);
    // Invariance residual ||A Q - Q H||.
    let mut resid = T::zero();
    for i in 0..n {
        let r1 = aq1[i] - (q1[i] * h00 + q2[i] * h10);
        let r2 = aq2[i] - (q1[i] * h01 + q2[i] * h11);
        resid += r1 * r1 + r2 * r2;
    }
    if resid.sqrt() <= res_tol {
        Ok(rho_2x2(h00, h01, h10, h11))
    } else {
        Ok(rho_gelfand)
    }
}
