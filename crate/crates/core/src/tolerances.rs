//! Numeric thresholds shared by every separability check.
//!
//! All checks in this crate are relative to the Frobenius norm of the matrix
//! under test, with an absolute floor so that zero matrices do not demand
//! exact arithmetic.

use crate::matrix::MatrixError;

/// Absolute floor applied to every relative tolerance.
pub const ABS_FLOOR: f64 = 1e-12;

/// Relative tolerances for the Hermitian, unitary, scalar and Schmidt-rank
/// tests. Each field must be strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Hermiticity test: `‖m − m†‖_F ≤ tol_hermitian · ‖m‖_F`.
    pub tol_hermitian: f64,
    /// Unitarity test: `‖m†m − I‖_F ≤ tol_unitary · ‖m‖_F`.
    pub tol_unitary: f64,
    /// Scalar-matrix test: `‖m − λI‖_F ≤ tol_scalar · max(‖m‖_F, 1)`.
    pub tol_scalar: f64,
    /// Operator-Schmidt rank-one test: `σ₂ ≤ tol_schmidt · σ₁`.
    pub tol_schmidt: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_hermitian: 1e-10,
            tol_unitary: 1e-9,
            tol_scalar: 1e-9,
            tol_schmidt: 1e-8,
        }
    }
}

impl Tolerances {
    /// Checks that every tolerance is strictly positive.
    pub fn validate(&self) -> Result<(), MatrixError> {
        let fields = [
            self.tol_hermitian,
            self.tol_unitary,
            self.tol_scalar,
            self.tol_schmidt,
        ];
        if fields.iter().any(|&t| !t.is_finite() || t <= 0.0) {
            return Err(MatrixError::InvalidTolerance);
        }
        Ok(())
    }

    /// Threshold for Hermiticity deviations of a matrix with the given norm.
    pub fn hermitian_bound(&self, norm: f64) -> f64 {
        (self.tol_hermitian * norm).max(ABS_FLOOR)
    }

    /// Threshold for unitarity deviations of a matrix with the given norm.
    pub fn unitary_bound(&self, norm: f64) -> f64 {
        (self.tol_unitary * norm).max(ABS_FLOOR)
    }

    /// Threshold for the scalar-matrix test; the `max(‖m‖, 1)` scale keeps
    /// the test meaningful for small matrices.
    pub fn scalar_bound(&self, norm: f64) -> f64 {
        self.tol_scalar * norm.max(1.0)
    }
}
