//! Low-order Zassenhaus machinery: the product formula
//! `exp(A+B) = exp(A)·exp(B)·exp(C₂)·exp(C₃)·…` with
//! `C₂ = −½[A,B]` and `C₃ = ⅓[B,[A,B]] + ⅙[A,[A,B]]`, truncated after C₃,
//! plus the scalar-tail test that backs the commuting-sum criterion: for a
//! pairwise-commuting family the correction product collapses to λ·I.

use num_complex::Complex64;

use crate::matrix::{is_scalar_matrix, ComplexMatrix, MatrixError};
use crate::spectral::expm_series;
use crate::tolerances::Tolerances;

/// The correction terms of the product formula through third order.
#[derive(Debug, Clone)]
pub struct ZassenhausTerms {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    /// `−½[A,B]`.
    pub c2: ComplexMatrix,
    /// `⅓[B,[A,B]] + ⅙[A,[A,B]]`.
    pub c3: ComplexMatrix,
}

impl ZassenhausTerms {
    /// Corrections beyond this order are measured, not computed.
    pub const TRUNCATION_ORDER: usize = 3;
}

fn ensure_same_square(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<usize, MatrixError> {
    let dim = a.ensure_square()?;
    if b.ensure_square()? != dim {
        return Err(MatrixError::ShapeMismatch(
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            "commutator",
        ));
    }
    Ok(dim)
}

/// `[a, b] = ab − ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, MatrixError> {
    ensure_same_square(a, b)?;
    Ok(&(a * b) - &(b * a))
}

/// The correction terms C₂ and C₃ for a given pair.
pub fn zassenhaus_terms(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
) -> Result<ZassenhausTerms, MatrixError> {
    let ab = commutator(a, b)?;
    let c2 = ab.scale(Complex64::new(-0.5, 0.0));
    let c3 = &commutator(b, &ab)?.scale(Complex64::new(1.0 / 3.0, 0.0))
        + &commutator(a, &ab)?.scale(Complex64::new(1.0 / 6.0, 0.0));
    Ok(ZassenhausTerms {
        a: a.clone(),
        b: b.clone(),
        c2,
        c3,
    })
}

/// `‖exp(a+b) − exp(a)·exp(b)·exp(C₂)·exp(C₃)‖_F`, the size of the
/// discarded tail. Fourth order in the generators: scaling both by s scales
/// the residual by s⁴ as s → 0.
pub fn truncated_product_residual(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
) -> Result<f64, MatrixError> {
    let terms = zassenhaus_terms(a, b)?;
    let exact = expm_series(&(a + b))?;
    let truncated = &(&(&expm_series(a)? * &expm_series(b)?) * &expm_series(&terms.c2)?)
        * &expm_series(&terms.c3)?;
    Ok((&exact - &truncated).frobenius_norm())
}

/// Whether the multi-term correction product collapses to a scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarTail {
    pub is_scalar: bool,
    /// The scalar λ with `exp(Σ terms) = λ · Π exp(termᵢ)`, when it exists.
    pub lambda: Option<Complex64>,
}

/// Computes `Q = exp(Σ terms) · (Π exp(termᵢ))⁻¹` and tests `Q = λI`.
///
/// The inverse uses `exp(M)⁻¹ = exp(−M)` factor by factor, so no linear
/// solve is involved. Pairwise-commuting families give `(true, 1)`.
pub fn multi_term_scalar_tail_check(
    terms: &[ComplexMatrix],
    tol: &Tolerances,
) -> Result<ScalarTail, MatrixError> {
    let first = terms.first().ok_or(MatrixError::Empty)?;
    let dim = first.ensure_square()?;
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for t in terms {
        ensure_same_square(first, t)?;
        sum = &sum + t;
    }
    let mut q = expm_series(&sum)?;
    // (exp(A₁)·…·exp(A_N))⁻¹ = exp(−A_N)·…·exp(−A₁)
    for t in terms.iter().rev() {
        q = &q * &expm_series(&t.scale(Complex64::new(-1.0, 0.0)))?;
    }
    let lambda = is_scalar_matrix(&q, tol);
    Ok(ScalarTail {
        is_scalar: lambda.is_some(),
        lambda,
    })
}
