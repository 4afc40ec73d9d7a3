//! Dense complex matrices and the arithmetic every other module builds on.
//!
//! Gates, Hamiltonians and tensor factors are all square, but realignment
//! (see [`crate::separator`]) produces rectangular matrices, so the type
//! carries independent row and column counts. Row-major storage throughout.
//! Subsystem 1 is always the leftmost Kronecker factor, i.e. the most
//! significant index block.

use std::ops::{Add, Index, IndexMut, Mul, Sub};
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use thiserror::Error;

use crate::tolerances::Tolerances;

/// Default cap on matrix dimension (rows or columns): 2^14.
pub const DEFAULT_MAX_DIM: usize = 1 << 14;

static MAX_DIM: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_DIM);

/// Current cap on matrix dimensions produced by [`kron`].
pub fn max_dim() -> usize {
    MAX_DIM.load(Ordering::Relaxed)
}

/// Overrides the dimension cap process-wide (the CLI wires this to the
/// `GATESEP_MAX_DIM` environment variable).
pub fn set_max_dim(dim: usize) {
    MAX_DIM.store(dim.max(1), Ordering::Relaxed);
}

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("entry count {got} does not match shape {rows}x{cols}")]
    EntryCount { rows: usize, cols: usize, got: usize },
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("expected a square matrix, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("shapes {0}x{1} and {2}x{3} are incompatible for {4}")]
    ShapeMismatch(usize, usize, usize, usize, &'static str),
    #[error("dimension {dim} exceeds the configured maximum {max}")]
    SizeLimit { dim: usize, max: usize },
    #[error("matrix is not Hermitian: deviation {deviation:.3e} exceeds {bound:.3e}")]
    NotHermitian { deviation: f64, bound: f64 },
    #[error("matrix is not unitary: deviation {deviation:.3e} exceeds {bound:.3e}")]
    NotUnitary { deviation: f64, bound: f64 },
    #[error("spectral decomposition failed to converge ({0})")]
    DecompositionFailed(&'static str),
    #[error("tolerances must be finite and strictly positive")]
    InvalidTolerance,
}

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let e = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", e.re, e.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self, MatrixError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::Empty);
        }
        if entries.len() != rows * cols {
            return Err(MatrixError::EntryCount {
                rows,
                cols,
                got: entries.len(),
            });
        }
        if entries.iter().any(|e| !e.re.is_finite() || !e.im.is_finite()) {
            return Err(MatrixError::NonFinite);
        }
        Ok(ComplexMatrix { rows, cols, entries })
    }

    /// Square matrix from row-major entries.
    pub fn square(dim: usize, entries: Vec<Complex64>) -> Result<Self, MatrixError> {
        Self::new(dim, dim, entries)
    }

    /// Square matrix from row-major `(re, im)` pairs; handy in tests.
    pub fn square_from_pairs(dim: usize, pairs: &[(f64, f64)]) -> Result<Self, MatrixError> {
        Self::new(
            dim,
            dim,
            pairs.iter().map(|&(re, im)| Complex64::new(re, im)).collect(),
        )
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// λ·I of the given dimension.
    pub fn scalar(dim: usize, lambda: Complex64) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = lambda;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, entries }
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
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

    /// Row/column count of a square matrix. Panics on rectangular input;
    /// fallible operations call [`ComplexMatrix::ensure_square`] first.
    pub fn dim(&self) -> usize {
        assert!(self.is_square(), "dim() on a {}x{} matrix", self.rows, self.cols);
        self.rows
    }

    pub fn ensure_square(&self) -> Result<usize, MatrixError> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(MatrixError::NotSquare(self.rows, self.cols))
        }
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.cols + j]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * factor)
    }

    pub fn trace(&self) -> Complex64 {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// `tr(self† · other)`, the Frobenius inner product.
    pub fn inner(&self, other: &Self) -> Complex64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Frobenius deviation from Hermitian symmetry, `‖m − m†‖_F`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut sum = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let d = self[(i, j)] - self[(j, i)].conj();
                sum += d.norm_sqr();
            }
        }
        sum.sqrt()
    }

    /// Frobenius deviation from unitarity, `‖m†m − I‖_F`.
    pub fn unitary_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let gram = &self.adjoint() * self;
        (&gram - &ComplexMatrix::identity(self.rows)).frobenius_norm()
    }

    pub fn ensure_hermitian(&self, tol: &Tolerances) -> Result<(), MatrixError> {
        self.ensure_square()?;
        let deviation = self.hermitian_deviation();
        let bound = tol.hermitian_bound(self.frobenius_norm());
        if deviation <= bound {
            Ok(())
        } else {
            Err(MatrixError::NotHermitian { deviation, bound })
        }
    }

    pub fn ensure_unitary(&self, tol: &Tolerances) -> Result<(), MatrixError> {
        self.ensure_square()?;
        let deviation = self.unitary_deviation();
        let bound = tol.unitary_bound(self.frobenius_norm());
        if deviation <= bound {
            Ok(())
        } else {
            Err(MatrixError::NotUnitary { deviation, bound })
        }
    }

    /// `(m + m†)/2`; cleans numerical drift before spectral routines.
    pub fn symmetrized(&self) -> Self {
        debug_assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(rhs.entries.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(rhs.entries.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "mul shape mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// Kronecker product; the left operand is the most significant factor.
///
/// Fails when the product dimension exceeds [`max_dim`].
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, MatrixError> {
    let max = max_dim();
    let rows = a
        .rows
        .checked_mul(b.rows)
        .filter(|&d| d <= max)
        .ok_or(MatrixError::SizeLimit {
            dim: a.rows.saturating_mul(b.rows),
            max,
        })?;
    let cols = a
        .cols
        .checked_mul(b.cols)
        .filter(|&d| d <= max)
        .ok_or(MatrixError::SizeLimit {
            dim: a.cols.saturating_mul(b.cols),
            max,
        })?;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            if aij.norm_sqr() == 0.0 {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Kronecker product of a sequence of factors, left to right.
pub fn kron_all(factors: &[ComplexMatrix]) -> Result<ComplexMatrix, MatrixError> {
    let mut iter = factors.iter();
    let first = iter.next().ok_or(MatrixError::Empty)?;
    let mut acc = first.clone();
    for f in iter {
        acc = kron(&acc, f)?;
    }
    Ok(acc)
}

/// Distance and aligning phase between two equally shaped matrices, up to a
/// global unit-modulus factor.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAlignment {
    /// `min over |φ|=1 of ‖u − φ·v‖_F`.
    pub distance: f64,
    /// The minimizing φ, i.e. `tr(v†u)/|tr(v†u)|`; `None` when the trace
    /// vanishes and every phase is equally good.
    pub phase: Option<Complex64>,
}

/// Phase-invariant Frobenius distance together with the optimal phase.
pub fn phase_alignment(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<PhaseAlignment, MatrixError> {
    if (u.rows, u.cols) != (v.rows, v.cols) {
        return Err(MatrixError::ShapeMismatch(
            u.rows,
            u.cols,
            v.rows,
            v.cols,
            "phase alignment",
        ));
    }
    // tr(v†u): the phase φ minimizing ‖u − φ·v‖ is tr(v†u)/|tr(v†u)|.
    let overlap = v.inner(u);
    let mag = overlap.norm();
    // The closed form sqrt(‖u‖² + ‖v‖² − 2|tr|) cancels catastrophically
    // near zero; evaluating ‖u − φ·v‖ directly keeps full precision there.
    let (distance, phase) = if mag > 0.0 {
        let phi = overlap / mag;
        ((u - &v.scale(phi)).frobenius_norm(), Some(phi))
    } else {
        let dist_sq = u.frobenius_norm().powi(2) + v.frobenius_norm().powi(2);
        (dist_sq.max(0.0).sqrt(), None)
    };
    Ok(PhaseAlignment { distance, phase })
}

/// `min over |φ|=1 of ‖u − φ·v‖_F`; a pseudometric on matrices that is zero
/// exactly on global-phase equivalence classes.
pub fn dist_up_to_phase(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64, MatrixError> {
    Ok(phase_alignment(u, v)?.distance)
}

/// Mean diagonal value λ = tr(a)/dim and the deviation `‖a − λI‖_F`.
pub fn scalar_deviation(a: &ComplexMatrix) -> (Complex64, f64) {
    debug_assert!(a.is_square());
    let dim = a.rows;
    let lambda = a.trace() / dim as f64;
    let mut sum = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let expected = if i == j { lambda } else { Complex64::new(0.0, 0.0) };
            sum += (a[(i, j)] - expected).norm_sqr();
        }
    }
    (lambda, sum.sqrt())
}

/// Tests whether `a` is proportional to the identity, returning the scalar.
///
/// The imaginary part of the reported λ is clamped to zero when it falls
/// below `tol_scalar`, so Hermitian inputs yield real scalars.
pub fn is_scalar_matrix(a: &ComplexMatrix, tol: &Tolerances) -> Option<Complex64> {
    if !a.is_square() {
        return None;
    }
    let (mut lambda, deviation) = scalar_deviation(a);
    if deviation > tol.scalar_bound(a.frobenius_norm()) {
        return None;
    }
    if lambda.im.abs() <= tol.tol_scalar {
        lambda.im = 0.0;
    }
    Some(lambda)
}

/// Rotates `m` by the unit phase that makes its largest-modulus entry real
/// and positive; returns the rotated matrix and the applied phase.
///
/// Ties on the modulus (exact in unitary 2×2 blocks, where |a| = |d|) are
/// broken toward the first entry in row-major order, within a relative
/// slack, so matrices equal up to a global phase canonicalize identically.
pub fn canonicalize_phase(m: &ComplexMatrix) -> (ComplexMatrix, Complex64) {
    let max_mag = m.max_abs();
    if max_mag == 0.0 {
        return (m.clone(), Complex64::new(1.0, 0.0));
    }
    let cutoff = max_mag * (1.0 - 1e-9);
    let pivot = m
        .entries
        .iter()
        .find(|e| e.norm() >= cutoff)
        .copied()
        .expect("max entry exists");
    let phase = pivot.conj() / pivot.norm();
    (m.scale(phase), phase)
}
