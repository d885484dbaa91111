//! Dense complex matrices and the small-matrix linear algebra used by the
//! design, codebook and decoding layers.
//!
//! Everything in scope is tiny (at most a few tens of rows), so matrices are
//! stored as plain row-major `Vec<Complex64>` and all decompositions are
//! direct dense algorithms: one-sided Jacobi for singular values, Gaussian
//! elimination with partial pivoting for determinants and solves.

use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};
use thiserror::Error;

/// Errors from matrix-level operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left} vs {right} in {op}")]
    DimensionMismatch {
        op: &'static str,
        left: String,
        right: String,
    },
    #[error("matrix is singular to working precision")]
    Singular,
}

/// Dense complex matrix, row-major, double precision.
#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        CMat {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from nested rows. Panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        assert!(!rows.is_empty(), "need at least one row");
        let cols = rows[0].len();
        assert!(cols > 0, "need at least one column");
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend_from_slice(row);
        }
        CMat {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Column vector from a slice.
    pub fn column_vector(v: &[Complex64]) -> Self {
        assert!(!v.is_empty());
        CMat {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn same_shape(&self, other: &CMat) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    fn shape(&self) -> String {
        format!("{}x{}", self.rows, self.cols)
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        assert!(c < self.cols);
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn set_column(&mut self, c: usize, v: &[Complex64]) {
        assert!(c < self.cols && v.len() == self.rows);
        for (r, &z) in v.iter().enumerate() {
            self[(r, c)] = z;
        }
    }

    /// Conjugate (Hermitian) transpose.
    pub fn hermitian(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    /// Entrywise conjugate.
    pub fn conj(&self) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_complex(&self, s: Complex64) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    /// Largest entrywise absolute difference; shapes must match.
    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert!(self.same_shape(other), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Stacks `self` on top of `other` (column counts must match).
    pub fn vstack(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        CMat {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &CMat) -> Complex64 {
        assert_eq!(self.cols, other.rows, "trace_product inner mismatch");
        assert_eq!(self.rows, other.cols, "trace_product outer mismatch");
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..self.rows {
            for c in 0..self.cols {
                acc += self[(r, c)] * other[(c, r)];
            }
        }
        acc
    }

    /// True iff `self^H self` deviates from the identity by at most `tol`
    /// in any entry. Errors on non-square input.
    pub fn is_unitary(&self, tol: f64) -> Result<bool, MatError> {
        if !self.is_square() {
            return Err(MatError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let gram = &self.hermitian() * self;
        Ok(gram.max_abs_diff(&CMat::identity(self.rows)) <= tol)
    }

    /// Singular values in descending order, via one-sided Jacobi.
    ///
    /// Columns are pairwise rotated until mutually orthogonal; the singular
    /// values are then the column norms. Accurate to near machine precision
    /// for the small matrices in scope.
    pub fn singular_values(&self) -> Vec<f64> {
        // Work with rows >= cols; singular values are transpose-invariant.
        let mut a = if self.rows >= self.cols {
            self.clone()
        } else {
            self.hermitian()
        };
        let (m, n) = (a.rows, a.cols);
        const SWEEP_LIMIT: usize = 64;
        const OFF_TOL: f64 = 1e-14;
        for _ in 0..SWEEP_LIMIT {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let mut app = 0.0;
                    let mut aqq = 0.0;
                    let mut apq = Complex64::new(0.0, 0.0);
                    for i in 0..m {
                        let x = a[(i, p)];
                        let y = a[(i, q)];
                        app += x.norm_sqr();
                        aqq += y.norm_sqr();
                        apq += x.conj() * y;
                    }
                    let g = apq.norm();
                    if g <= OFF_TOL * (app * aqq).sqrt() || app == 0.0 || aqq == 0.0 {
                        continue;
                    }
                    rotated = true;
                    // Remove the phase of <a_p, a_q>, then apply the real
                    // Jacobi rotation that diagonalizes the 2x2 Gram block.
                    let phase = apq / g;
                    let tau = (aqq - app) / (2.0 * g);
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for i in 0..m {
                        let x = a[(i, p)];
                        let y = a[(i, q)] * phase.conj();
                        a[(i, p)] = x * c - y * s;
                        a[(i, q)] = x * s + y * c;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<f64> = (0..n)
            .map(|c| (0..m).map(|i| a[(i, c)].norm_sqr()).sum::<f64>().sqrt())
            .collect();
        sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
        sv
    }

    /// Number of singular values above `tol` times the largest one.
    pub fn rank_tol(&self, tol: f64) -> usize {
        let sv = self.singular_values();
        let largest = sv[0];
        if largest == 0.0 {
            return 0;
        }
        sv.iter().filter(|&&s| s > tol * largest).count()
    }

    /// Determinant via LU with partial pivoting.
    pub fn det(&self) -> Complex64 {
        assert!(self.is_square(), "determinant of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for k in 0..n {
            let pivot_row = (k..n)
                .max_by(|&i, &j| a[(i, k)].norm().partial_cmp(&a[(j, k)].norm()).unwrap())
                .unwrap();
            if a[(pivot_row, k)].norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            if pivot_row != k {
                for c in 0..n {
                    let tmp = a[(k, c)];
                    a[(k, c)] = a[(pivot_row, c)];
                    a[(pivot_row, c)] = tmp;
                }
                det = -det;
            }
            let pivot = a[(k, k)];
            det *= pivot;
            for i in (k + 1)..n {
                let factor = a[(i, k)] / pivot;
                for c in (k + 1)..n {
                    let sub = factor * a[(k, c)];
                    a[(i, c)] -= sub;
                }
            }
        }
        det
    }

    /// Solves `self * X = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &CMat) -> Result<CMat, MatError> {
        if !self.is_square() {
            return Err(MatError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if self.rows != rhs.rows {
            return Err(MatError::DimensionMismatch {
                op: "solve",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        let scale = self.max_abs().max(1.0);
        for k in 0..n {
            let pivot_row = (k..n)
                .max_by(|&i, &j| a[(i, k)].norm().partial_cmp(&a[(j, k)].norm()).unwrap())
                .unwrap();
            if a[(pivot_row, k)].norm() <= 1e-14 * scale {
                return Err(MatError::Singular);
            }
            if pivot_row != k {
                for c in 0..n {
                    let tmp = a[(k, c)];
                    a[(k, c)] = a[(pivot_row, c)];
                    a[(pivot_row, c)] = tmp;
                }
                for c in 0..b.cols {
                    let tmp = b[(k, c)];
                    b[(k, c)] = b[(pivot_row, c)];
                    b[(pivot_row, c)] = tmp;
                }
            }
            let pivot = a[(k, k)];
            for i in (k + 1)..n {
                let factor = a[(i, k)] / pivot;
                for c in (k + 1)..n {
                    let sub = factor * a[(k, c)];
                    a[(i, c)] -= sub;
                }
                for c in 0..b.cols {
                    let sub = factor * b[(k, c)];
                    b[(i, c)] -= sub;
                }
            }
        }
        let mut x = CMat::zeros(n, rhs.cols);
        for c in 0..rhs.cols {
            for i in (0..n).rev() {
                let mut acc = b[(i, c)];
                for j in (i + 1)..n {
                    acc -= a[(i, j)] * x[(j, c)];
                }
                x[(i, c)] = acc / a[(i, i)];
            }
        }
        Ok(x)
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(
            self.cols, rhs.rows,
            "matrix product dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        out
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert!(self.same_shape(rhs), "matrix sum shape mismatch");
        CMat {
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

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert!(self.same_shape(rhs), "matrix difference shape mismatch");
        CMat {
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

/// Shorthand used throughout the tests and constructors.
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
