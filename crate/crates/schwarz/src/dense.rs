//! Dense row-major matrices and vectors with the small set of kernels the
//! solver needs: LU with partial pivoting, induced norms, singular values via
//! one-sided Jacobi, and a seeded power iteration for the 2-norm.
//!
//! Blocks in this crate are small (tens of rows), so clarity and exactly
//! reproducible results win over blocked performance tricks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Seed for every deterministic pseudo-random start vector in the crate.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// A pivot below `PIVOT_RTOL * inf_norm(A)` is treated as exactly zero.
const PIVOT_RTOL: f64 = 1e-13;

/// Relative stagnation tolerance for the 2-norm power iteration.
const TWO_NORM_RTOL: f64 = 1e-12;

/// Iteration cap for the 2-norm power iteration.
const TWO_NORM_MAX_ITER: usize = 50_000;

/// One-sided Jacobi is restricted to this many rows/columns.
const SVD_SIZE_LIMIT: usize = 400;

/// Which induced operator norm a routine should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// Maximum absolute row sum.
    Inf,
    /// Largest singular value.
    Two,
}

impl std::fmt::Display for NormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NormKind::Inf => write!(f, "inf"),
            NormKind::Two => write!(f, "two"),
        }
    }
}

/// Dense row-major matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl std::fmt::Debug for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(12) {
            write!(f, "  [")?;
            for j in 0..self.cols.min(12) {
                write!(f, "{:>12.5e}", self[(i, j)])?;
                if j + 1 < self.cols {
                    write!(f, ", ")?;
                }
            }
            writeln!(f, "]")?;
        }
        if self.rows > 12 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    /// Builds a matrix from row-major data, rejecting non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Scalar multiple of the identity.
    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = s;
        }
        m
    }

    /// Convenience constructor from nested rows; rows must be equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_raw(rows, cols, data)
    }

    /// Scalar tridiagonal Toeplitz matrix `tridiag(sub, diag, sup)` of order `n`.
    pub fn tridiag_toeplitz(n: usize, sub: f64, diag: f64, sup: f64) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                diag
            } else if j + 1 == i {
                sub
            } else if i + 1 == j {
                sup
            } else {
                0.0
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|x| x * s).collect(),
        )
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix::from_raw(
            self.rows,
            self.cols,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix::from_raw(
            self.rows,
            self.cols,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// Matrix product; shapes are a programmer invariant, not user input.
    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                for j in 0..other.cols {
                    out[(i, j)] += aik * orow[j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &Vector) -> Vector {
        assert_eq!(self.cols, x.len(), "matvec shape mismatch");
        let mut out = Vector::zeros(self.rows);
        for i in 0..self.rows {
            let row = self.row(i);
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += row[j] * x[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Copies the `h x w` block with top-left corner `(i, j)`.
    pub fn block(&self, i: usize, j: usize, h: usize, w: usize) -> Matrix {
        assert!(i + h <= self.rows && j + w <= self.cols);
        Matrix::from_fn(h, w, |r, c| self[(i + r, j + c)])
    }

    pub fn set_block(&mut self, i: usize, j: usize, b: &Matrix) {
        assert!(i + b.rows <= self.rows && j + b.cols <= self.cols);
        for r in 0..b.rows {
            for c in 0..b.cols {
                self[(i + r, j + c)] = b[(r, c)];
            }
        }
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest singular value, by power iteration on `A' A`.
    ///
    /// The start vector is pseudo-random with the fixed seed `0x5EED`, so the
    /// result is reproducible bit for bit on a given platform. Stagnation of
    /// the Rayleigh quotient below a relative `1e-12` stops the iteration.
    pub fn two_norm(&self) -> Result<f64> {
        self.two_norm_with_budget(TWO_NORM_MAX_ITER)
    }

    pub(crate) fn two_norm_with_budget(&self, max_iter: usize) -> Result<f64> {
        if self.data.iter().all(|&x| x == 0.0) {
            return Ok(0.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
        let mut v = Vector::from_raw((0..self.cols).map(|_| rng.random_range(-1.0..1.0)).collect());
        let nv = v.two_norm();
        v.scale_in_place(1.0 / nv);
        let mut prev = 0.0_f64;
        for _ in 0..max_iter {
            let av = self.mul_vec(&v);
            let w = self.transpose_mul_vec(&av);
            let rayleigh = v.dot(&w);
            let sigma = rayleigh.max(0.0).sqrt();
            let wn = w.two_norm();
            if wn == 0.0 {
                // v landed in the null space; the largest singular value still
                // dominates any other start, so restart deterministically.
                v = Vector::from_raw(
                    (0..self.cols).map(|_| rng.random_range(-1.0..1.0)).collect(),
                );
                let nv = v.two_norm();
                v.scale_in_place(1.0 / nv);
                continue;
            }
            v = w;
            v.scale_in_place(1.0 / wn);
            if (sigma - prev).abs() <= TWO_NORM_RTOL * sigma.max(f64::MIN_POSITIVE) {
                return Ok(sigma);
            }
            prev = sigma;
        }
        Err(Error::NoConvergence {
            context: "two_norm power iteration",
            iterations: max_iter,
        })
    }

    fn transpose_mul_vec(&self, x: &Vector) -> Vector {
        assert_eq!(self.rows, x.len());
        let mut out = Vector::zeros(self.cols);
        for i in 0..self.rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            let row = self.row(i);
            for j in 0..self.cols {
                out[j] += row[j] * xi;
            }
        }
        out
    }

    /// All singular values in descending order, by one-sided Jacobi.
    ///
    /// Columns of a working copy are rotated until pairwise orthogonal; the
    /// column lengths are then the singular values. Restricted to 400 rows and
    /// columns, which covers every block this crate produces.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        if self.rows > SVD_SIZE_LIMIT || self.cols > SVD_SIZE_LIMIT {
            return Err(Error::SizeLimitExceeded(format!(
                "singular_values supports up to {SVD_SIZE_LIMIT} rows/cols, got {}x{}",
                self.rows, self.cols
            )));
        }
        // One-sided Jacobi wants at least as many rows as columns.
        let work = if self.rows < self.cols {
            self.transpose()
        } else {
            self.clone()
        };
        let (rows, cols) = (work.rows, work.cols);
        // Column-major copy so rotations touch contiguous memory.
        let mut a: Vec<Vec<f64>> = (0..cols)
            .map(|j| (0..rows).map(|i| work[(i, j)]).collect())
            .collect();
        let tol = 1e-15;
        for _sweep in 0..100 {
            let mut rotated = false;
            for p in 0..cols {
                for q in (p + 1)..cols {
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for i in 0..rows {
                        alpha += a[p][i] * a[p][i];
                        beta += a[q][i] * a[q][i];
                        gamma += a[p][i] * a[q][i];
                    }
                    if gamma.abs() <= tol * (alpha * beta).sqrt() || gamma == 0.0 {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for i in 0..rows {
                        let ap = a[p][i];
                        let aq = a[q][i];
                        a[p][i] = c * ap - s * aq;
                        a[q][i] = s * ap + c * aq;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sigmas: Vec<f64> = a
            .iter()
            .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect();
        sigmas.sort_by(|x, y| y.partial_cmp(x).unwrap());
        Ok(sigmas)
    }

    /// Induced operator norm of the requested kind.
    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        match kind {
            NormKind::Inf => Ok(self.inf_norm()),
            NormKind::Two => self.two_norm(),
        }
    }

    /// LU factorization with partial pivoting.
    ///
    /// A pivot with absolute value at most `1e-13 * inf_norm(A)` is declared
    /// singular; the threshold scales with the matrix so badly scaled but
    /// honest systems still factor.
    pub fn lu(&self) -> Result<LuFactors> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "LU needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let threshold = PIVOT_RTOL * self.inf_norm();
        let mut lu = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0_f64;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in (k + 1)..n {
                let cand = lu[i * n + k].abs();
                if cand > best {
                    best = cand;
                    p = i;
                }
            }
            if best <= threshold {
                return Err(Error::SingularMatrix(format!(
                    "pivot {best:.3e} at column {k} below threshold {threshold:.3e}"
                )));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                for j in (k + 1)..n {
                    lu[i * n + j] -= factor * lu[k * n + j];
                }
            }
        }
        Ok(LuFactors { n, lu, perm, sign })
    }

    /// Explicit inverse; intended for the small blocks used by bounds.
    pub fn inverse(&self) -> Result<Matrix> {
        self.lu()?.solve(&Matrix::identity(self.rows))
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization of a square matrix, stored packed with its permutation.
#[derive(Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
}

impl LuFactors {
    pub fn order(&self) -> usize {
        self.n
    }

    /// Determinant from the pivot product.
    pub fn det(&self) -> f64 {
        let mut d = self.sign;
        for k in 0..self.n {
            d *= self.lu[k * self.n + k];
        }
        d
    }

    /// Solves `A X = B` for every column of `B`.
    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        if rhs.rows() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "solve rhs has {} rows, factor has order {}",
                rhs.rows(),
                self.n
            )));
        }
        let n = self.n;
        let k = rhs.cols();
        let mut x = Matrix::zeros(n, k);
        // Apply the row permutation to the right-hand side.
        for i in 0..n {
            let src = self.perm[i];
            for j in 0..k {
                x[(i, j)] = rhs[(src, j)];
            }
        }
        // Forward substitution with unit lower triangle.
        for i in 1..n {
            for l in 0..i {
                let f = self.lu[i * n + l];
                if f == 0.0 {
                    continue;
                }
                for j in 0..k {
                    let t = x[(l, j)];
                    x[(i, j)] -= f * t;
                }
            }
        }
        // Back substitution with the upper triangle.
        for i in (0..n).rev() {
            for l in (i + 1)..n {
                let f = self.lu[i * n + l];
                if f == 0.0 {
                    continue;
                }
                for j in 0..k {
                    let t = x[(l, j)];
                    x[(i, j)] -= f * t;
                }
            }
            let d = self.lu[i * n + i];
            for j in 0..k {
                x[(i, j)] /= d;
            }
        }
        Ok(x)
    }

    pub fn solve_vec(&self, rhs: &Vector) -> Result<Vector> {
        let m = Matrix::from_raw(rhs.len(), 1, rhs.data().to_vec());
        let x = self.solve(&m)?;
        Ok(Vector::from_raw(x.data().to_vec()))
    }

    /// Solves `A' X = B` with the factors of `A`: `A' = U' L' P`.
    pub fn solve_transposed(&self, rhs: &Matrix) -> Result<Matrix> {
        if rhs.rows() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "solve rhs has {} rows, factor has order {}",
                rhs.rows(),
                self.n
            )));
        }
        let n = self.n;
        let k = rhs.cols();
        let mut w = rhs.clone();
        // Forward substitution with U', lower triangular.
        for i in 0..n {
            for l in 0..i {
                let f = self.lu[l * n + i];
                if f == 0.0 {
                    continue;
                }
                for j in 0..k {
                    let t = w[(l, j)];
                    w[(i, j)] -= f * t;
                }
            }
            let d = self.lu[i * n + i];
            for j in 0..k {
                w[(i, j)] /= d;
            }
        }
        // Back substitution with L', unit upper triangular.
        for i in (0..n).rev() {
            for l in (i + 1)..n {
                let f = self.lu[l * n + i];
                if f == 0.0 {
                    continue;
                }
                for j in 0..k {
                    let t = w[(l, j)];
                    w[(i, j)] -= f * t;
                }
            }
        }
        // Undo the row permutation: x[perm[i]] = w[i].
        let mut x = Matrix::zeros(n, k);
        for i in 0..n {
            let dst = self.perm[i];
            for j in 0..k {
                x[(dst, j)] = w[(i, j)];
            }
        }
        Ok(x)
    }
}

/// Dense vector of `f64`.
#[derive(Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl std::fmt::Debug for Vector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Vector({:?})", &self.data)
    }
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "vector entries must be finite".into(),
            ));
        }
        Ok(Self { data })
    }

    pub(crate) fn from_raw(data: Vec<f64>) -> Self {
        Self { data }
    }

    pub fn zeros(len: usize) -> Self {
        Self { data: vec![0.0; len] }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn inf_norm(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn two_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::Inf => self.inf_norm(),
            NormKind::Two => self.two_norm(),
        }
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len());
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn add(&self, other: &Vector) -> Vector {
        assert_eq!(self.len(), other.len());
        Vector::from_raw(self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        assert_eq!(self.len(), other.len());
        Vector::from_raw(self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector::from_raw(self.data.iter().map(|x| x * s).collect())
    }

    pub fn scale_in_place(&mut self, s: f64) {
        for x in &mut self.data {
            *x *= s;
        }
    }

    /// `self += s * other`.
    pub fn axpy_in_place(&mut self, s: f64, other: &Vector) {
        assert_eq!(self.len(), other.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// Read-only view of block `i` in a vector of `n`-sized blocks.
    pub fn block(&self, i: usize, n: usize) -> &[f64] {
        &self.data[i * n..(i + 1) * n]
    }

    pub fn set_block(&mut self, i: usize, n: usize, values: &[f64]) {
        assert_eq!(values.len(), n);
        self.data[i * n..(i + 1) * n].copy_from_slice(values);
    }

    pub fn block_vector(&self, i: usize, n: usize) -> Vector {
        Vector::from_raw(self.block(i, n).to_vec())
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl std::ops::IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}
