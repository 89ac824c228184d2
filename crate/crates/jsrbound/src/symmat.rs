//! Symmetric matrices stored as packed upper triangles, with the symmetric
//! eigendecomposition and Cholesky factorization the solver relies on.
//!
//! A symmetric `n x n` matrix has `d = n(n+1)/2` free entries; the packed
//! storage makes symmetry exact by construction and doubles as the
//! coordinate system of the feasibility solver via [`SymMatrix::svec`],
//! the vectorization that scales off-diagonal entries by `√2` so that the
//! Euclidean inner product of two svecs equals the trace inner product of
//! the matrices.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::mat::{LinalgError, Mat};
use crate::scalar::Scalar;

/// Largest supported order for the eigendecomposition (desk scale).
pub const MAX_EIGEN_DIM: usize = 64;
/// Maximum Jacobi sweeps before reporting failure.
const MAX_JACOBI_SWEEPS: usize = 50;

/// Symmetric matrix with packed upper-triangle storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    upper: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    /// Zero matrix of order `n`.
    pub fn zeros(n: usize) -> Self {
        Self { n, upper: vec![T::zero(); n * (n + 1) / 2] }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut s = Self::zeros(n);
        for i in 0..n {
            s.set(i, i, T::one());
        }
        s
    }

    /// Scaled identity `c·I`.
    pub fn scaled_identity(n: usize, c: T) -> Self {
        let mut s = Self::zeros(n);
        for i in 0..n {
            s.set(i, i, c);
        }
        s
    }

    /// Order of the matrix.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of free entries, `n(n+1)/2`.
    pub fn vec_dim(&self) -> usize {
        self.upper.len()
    }

    #[inline]
    fn tri_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < self.n);
        i * self.n - i * (i + 1) / 2 + j
    }

    /// Entry at `(i, j)`; order of the indices does not matter.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.upper[self.tri_index(i, j)]
    }

    /// Sets the entry at `(i, j)` (and its mirror).
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let idx = self.tri_index(i, j);
        self.upper[idx] = v;
    }

    /// Symmetric part of a square dense matrix.
    pub fn from_mat_symmetrized(m: &Mat<T>) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::NotSquare { rows: m.rows(), cols: m.cols() });
        }
        let n = m.rows();
        let half = T::from(0.5).unwrap();
        let mut s = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                s.set(i, j, (m.get(i, j) + m.get(j, i)) * half);
            }
        }
        Ok(s)
    }

    /// Dense copy.
    pub fn to_mat(&self) -> Mat<T> {
        Mat::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// All entries finite?
    pub fn is_finite(&self) -> bool {
        self.upper.iter().all(|v| v.is_finite())
    }

    /// Scaled vectorization: diagonal entries as-is, off-diagonal entries
    /// multiplied by `√2`, so `svec(A)·svec(B) = trace(A B)`.
    pub fn svec(&self) -> Vec<T> {
        let sqrt2 = T::from(std::f64::consts::SQRT_2).unwrap();
        let mut out = Vec::with_capacity(self.upper.len());
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.get(i, j);
                out.push(if i == j { v } else { v * sqrt2 });
            }
        }
        out
    }

    /// Inverse of [`SymMatrix::svec`].
    pub fn from_svec(n: usize, v: &[T]) -> Self {
        assert_eq!(v.len(), n * (n + 1) / 2, "svec length must be n(n+1)/2");
        let inv_sqrt2 = T::one() / T::from(std::f64::consts::SQRT_2).unwrap();
        let mut s = Self::zeros(n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                let x = if i == j { v[k] } else { v[k] * inv_sqrt2 };
                s.set(i, j, x);
                k += 1;
            }
        }
        s
    }

    /// Quadratic form `xᵀ S x`.
    pub fn quad_form(&self, x: &[T]) -> T {
        assert_eq!(x.len(), self.n, "vector length must match order");
        let two = T::from(2.0).unwrap();
        let mut acc = T::zero();
        for i in 0..self.n {
            acc += self.get(i, i) * x[i] * x[i];
            for j in i + 1..self.n {
                acc += two * self.get(i, j) * x[i] * x[j];
            }
        }
        acc
    }

    /// Trace inner product `trace(S R)`.
    pub fn inner(&self, rhs: &SymMatrix<T>) -> T {
        assert_eq!(self.n, rhs.n);
        let two = T::from(2.0).unwrap();
        let mut acc = T::zero();
        for i in 0..self.n {
            acc += self.get(i, i) * rhs.get(i, i);
            for j in i + 1..self.n {
                acc += two * self.get(i, j) * rhs.get(i, j);
            }
        }
        acc
    }

    /// `AᵀA` for a (not necessarily square) dense matrix.
    pub fn gram(a: &Mat<T>) -> Self {
        let n = a.cols();
        let mut s = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut acc = T::zero();
                for k in 0..a.rows() {
                    acc += a.get(k, i) * a.get(k, j);
                }
                s.set(i, j, acc);
            }
        }
        s
    }

    /// Congruence transform `Aᵀ S A`.
    pub fn congruence(&self, a: &Mat<T>) -> Self {
        assert_eq!(a.rows(), self.n, "transform rows must match order");
        let sa = self.to_mat().matmul(a);
        let n = a.cols();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut acc = T::zero();
                for k in 0..a.rows() {
                    acc += a.get(k, i) * sa.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// `self + c·R`.
    pub fn add_scaled(&self, rhs: &SymMatrix<T>, c: T) -> Self {
        assert_eq!(self.n, rhs.n);
        Self {
            n: self.n,
            upper: self.upper.iter().zip(&rhs.upper).map(|(&a, &b)| a + b * c).collect(),
        }
    }
}

/// Wire form used for (de)serialization: symmetric matrices travel as dense
/// rows, which keeps files human-readable; symmetry is validated on load.
#[derive(Serialize, Deserialize)]
struct SymMatrixWire<T> {
    n: usize,
    rows: Vec<Vec<T>>,
}

impl<T: Scalar + Serialize> Serialize for SymMatrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let wire = SymMatrixWire { n: self.n, rows: self.to_mat().to_rows() };
        wire.serialize(serializer)
    }
}

impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for SymMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = SymMatrixWire::<T>::deserialize(deserializer)?;
        if wire.rows.len() != wire.n || wire.rows.iter().any(|r| r.len() != wire.n) {
            return Err(D::Error::custom("symmetric matrix rows do not match order n"));
        }
        let m = Mat::from_rows(wire.rows).map_err(D::Error::custom)?;
        let tol = T::from(1e-9).unwrap() * m.max_abs().max(T::one());
        for i in 0..wire.n {
            for j in i + 1..wire.n {
                if (m.get(i, j) - m.get(j, i)).abs() > tol {
                    return Err(D::Error::custom(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        SymMatrix::from_mat_symmetrized(&m).map_err(D::Error::custom)
    }
}

/// Eigendecomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen<T> {
    /// Eigenvalues in ascending order.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors, stored as the columns of the matrix, in the
    /// same order as `values`.
    pub vectors: Mat<T>,
}

impl<T: Scalar> SymEigen<T> {
    /// Smallest eigenvalue.
    pub fn lambda_min(&self) -> T {
        self.values[0]
    }

    /// Largest eigenvalue.
    pub fn lambda_max(&self) -> T {
        *self.values.last().unwrap()
    }

    /// Eigenvector for the `k`-th eigenvalue.
    pub fn vector(&self, k: usize) -> Vec<T> {
        (0..self.vectors.rows()).map(|i| self.vectors.get(i, k)).collect()
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Supports orders up to [`MAX_EIGEN_DIM`]. The returned vectors satisfy
/// `‖S v - λ v‖ <= 1e-10 ‖S‖` and are orthonormal to the same tolerance.
pub fn sym_eigen<T: Scalar>(s: &SymMatrix<T>) -> Result<SymEigen<T>, LinalgError> {
    let n = s.dim();
    if n == 0 {
        return Err(LinalgError::Dimension("matrix must be nonempty".into()));
    }
    if n > MAX_EIGEN_DIM {
        return Err(LinalgError::TooLarge { n, max: MAX_EIGEN_DIM });
    }
    if !s.is_finite() {
        return Err(LinalgError::NonFinite);
    }

    let zero = T::zero();
    let one = T::one();
    let half = T::from(0.5).unwrap();
    let hundred = T::from(100.0).unwrap();

    let mut a = s.to_mat();
    let mut v = Mat::identity(n);
    let mut d: Vec<T> = (0..n).map(|i| a.get(i, i)).collect();
    let mut b = d.clone();
    let mut z = vec![zero; n];

    for sweep in 0..MAX_JACOBI_SWEEPS {
        // Sum of off-diagonal magnitudes; exact zero means convergence.
        let mut sm = zero;
        for p in 0..n - 1 {
            for q in p + 1..n {
                sm += a.get(p, q).abs();
            }
        }
        if sm == zero {
            break;
        }
        let thresh = if sweep < 3 {
            T::from(0.2).unwrap() * sm / T::from(n * n).unwrap()
        } else {
            zero
        };
        for p in 0..n - 1 {
            for q in p + 1..n {
                let g = hundred * a.get(p, q).abs();
                // Skip tiny rotations once they can no longer change d.
                if sweep >= 3 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    a.set(p, q, zero);
                } else if a.get(p, q).abs() > thresh {
                    let mut h = d[q] - d[p];
                    let t = if h.abs() + g == h.abs() {
                        a.get(p, q) / h
                    } else {
                        let theta = half * h / a.get(p, q);
                        let mut t = one / (theta.abs() + (one + theta * theta).sqrt());
                        if theta < zero {
                            t = -t;
                        }
                        t
                    };
                    let c = one / (one + t * t).sqrt();
                    let sn = t * c;
                    let tau = sn / (one + c);
                    h = t * a.get(p, q);
                    z[p] = z[p] - h;
                    z[q] = z[q] + h;
                    d[p] = d[p] - h;
                    d[q] = d[q] + h;
                    a.set(p, q, zero);
                    let rotate = |m: &mut Mat<T>, i: usize, j: usize, k: usize, l: usize| {
                        let g = m.get(i, j);
                        let h = m.get(k, l);
                        m.set(i, j, g - sn * (h + g * tau));
                        m.set(k, l, h + sn * (g - h * tau));
                    };
                    for j in 0..p {
                        rotate(&mut a, j, p, j, q);
                    }
                    for j in p + 1..q {
                        rotate(&mut a, p, j, j, q);
                    }
                    for j in q + 1..n {
                        rotate(&mut a, p, j, q, j);
                    }
                    for j in 0..n {
                        rotate(&mut v, j, p, j, q);
                    }
                }
            }
        }
        for i in 0..n {
            b[i] = b[i] + z[i];
            d[i] = b[i];
            z[i] = zero;
        }
        if sweep + 1 == MAX_JACOBI_SWEEPS {
            return Err(LinalgError::NoConvergence("jacobi eigendecomposition"));
        }
    }

    // Sort ascending, carrying eigenvectors along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let values: Vec<T> = order.iter().map(|&i| d[i]).collect();
    let vectors = Mat::from_fn(n, n, |i, k| v.get(i, order[k]));
    Ok(SymEigen { values, vectors })
}

/// Upper-triangular Cholesky factor `R` with `P = Rᵀ R`.
///
/// Fails with [`LinalgError::NotPositiveDefinite`] when a pivot is not
/// strictly positive.
pub fn cholesky<T: Scalar>(p: &SymMatrix<T>) -> Result<Mat<T>, LinalgError> {
    let n = p.dim();
    if !p.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let mut r = Mat::zeros(n, n);
    for j in 0..n {
        let mut diag = p.get(j, j);
        for k in 0..j {
            diag -= r.get(k, j) * r.get(k, j);
        }
        if diag <= T::zero() || !diag.is_finite() {
            return Err(LinalgError::NotPositiveDefinite);
        }
        let rjj = diag.sqrt();
        r.set(j, j, rjj);
        for i in j + 1..n {
            let mut acc = p.get(j, i);
            for k in 0..j {
                acc -= r.get(k, j) * r.get(k, i);
            }
            r.set(j, i, acc / rjj);
        }
    }
    Ok(r)
}
