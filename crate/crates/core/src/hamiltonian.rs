//! Hamiltonian-side separability criteria: the rank-one check on a single
//! tensor term, the commuting-sum sufficient condition on a sum of terms,
//! the per-subsystem regrouping that covers sums of one-local terms, and the
//! synthesis of local gates plus global phase for each of them.
//!
//! A verdict here is always about a presentation `(H, t)` of the gate
//! `exp(itH)`, never about the unitary alone; the presentation-free oracle
//! lives in [`crate::separator`].

use num_complex::Complex64;
use thiserror::Error;

use crate::matrix::{
    canonicalize_phase, kron_all, phase_alignment, scalar_deviation, ComplexMatrix, MatrixError,
};
use crate::spectral::expm_i_hermitian;
use crate::tolerances::Tolerances;

/// Residual bound (times total dimension) for rank-one synthesis.
pub const RANK_ONE_RESIDUAL: f64 = 1e-9;
/// Residual bound (times total dimension) for commuting-sum synthesis.
pub const COMMUTING_SUM_RESIDUAL: f64 = 1e-8;
/// Residual bound (times total dimension) for regrouping synthesis.
pub const REGROUPING_RESIDUAL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CriterionError {
    #[error("factors {factors:?} are all non-scalar; at most one may be")]
    MultiScalar { factors: Vec<usize> },
    #[error("terms do not pairwise commute; offending pairs {pairs:?}")]
    Noncommuting { pairs: Vec<(usize, usize)> },
    #[error("regrouping does not apply: term {term} has non-scalar factors {factors:?}")]
    NotApplicable { term: usize, factors: Vec<usize> },
    #[error("reconstruction residual {residual:.3e} exceeds bound {bound:.3e}")]
    ResidualTooLarge { residual: f64, bound: f64 },
    #[error("decomposition must contain at least one term")]
    EmptyDecomposition,
    #[error("term {term}, factor {factor}: dimension {got} does not match subsystem dimension {expected}")]
    FactorDimension {
        term: usize,
        factor: usize,
        expected: usize,
        got: usize,
    },
    #[error("term has {got} factors, expected {expected}")]
    FactorCount { expected: usize, got: usize },
    #[error("factor {factor}: {source}")]
    Factor { factor: usize, source: MatrixError },
    #[error("evolution parameter must be finite")]
    NonFiniteTime,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// One elementary tensor `A⁽¹⁾ ⊗ … ⊗ A⁽ⁿ⁾` with Hermitian factors.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorTerm {
    factors: Vec<ComplexMatrix>,
}

impl TensorTerm {
    /// Validates that every factor is square and Hermitian within tolerance.
    pub fn new(factors: Vec<ComplexMatrix>, tol: &Tolerances) -> Result<Self, CriterionError> {
        if factors.is_empty() {
            return Err(CriterionError::FactorCount { expected: 1, got: 0 });
        }
        for (idx, f) in factors.iter().enumerate() {
            f.ensure_hermitian(tol)
                .map_err(|source| CriterionError::Factor { factor: idx, source })?;
        }
        Ok(TensorTerm { factors })
    }

    pub fn factors(&self) -> &[ComplexMatrix] {
        &self.factors
    }

    pub fn subsystems(&self) -> usize {
        self.factors.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim()).collect()
    }

    /// Dense Kronecker product of the factors.
    pub fn synthesize(&self) -> Result<ComplexMatrix, MatrixError> {
        kron_all(&self.factors)
    }
}

/// `H = Σᵢ Tᵢ` over fixed subsystem dimensions, with the evolution
/// parameter `t` of `exp(itH)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorDecomposition {
    dims: Vec<usize>,
    terms: Vec<TensorTerm>,
    t: f64,
}

impl TensorDecomposition {
    pub fn new(dims: Vec<usize>, terms: Vec<TensorTerm>, t: f64) -> Result<Self, CriterionError> {
        if terms.is_empty() || dims.is_empty() {
            return Err(CriterionError::EmptyDecomposition);
        }
        if !t.is_finite() {
            return Err(CriterionError::NonFiniteTime);
        }
        for (ti, term) in terms.iter().enumerate() {
            if term.subsystems() != dims.len() {
                return Err(CriterionError::FactorCount {
                    expected: dims.len(),
                    got: term.subsystems(),
                });
            }
            for (fi, factor) in term.factors().iter().enumerate() {
                if factor.dim() != dims[fi] {
                    return Err(CriterionError::FactorDimension {
                        term: ti,
                        factor: fi,
                        expected: dims[fi],
                        got: factor.dim(),
                    });
                }
            }
        }
        Ok(TensorDecomposition { dims, terms, t })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn terms(&self) -> &[TensorTerm] {
        &self.terms
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Dense `Σᵢ Tᵢ`.
    pub fn hamiltonian(&self) -> Result<ComplexMatrix, MatrixError> {
        let mut acc = ComplexMatrix::zeros(self.total_dim(), self.total_dim());
        for term in &self.terms {
            acc = &acc + &term.synthesize()?;
        }
        Ok(acc)
    }
}

/// Why a criterion accepted or rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionReason {
    RankOneOk,
    MultiScalarViolation,
    NoncommutingTerms,
    CommutingSumOk,
}

/// A near-scalar factor close enough to the decision threshold that the
/// verdict could flip under a slightly different tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct BorderlineScalar {
    /// Term index (zero-based); 0 for single-term checks.
    pub term: usize,
    /// Factor index within the term (zero-based).
    pub factor: usize,
    /// Deviation as a multiple of the scalar tolerance.
    pub ratio: f64,
}

impl std::fmt::Display for BorderlineScalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "term {} factor {} is borderline scalar (deviation {:.2}x the scalar tolerance)",
            self.term + 1,
            self.factor + 1,
            self.ratio
        )
    }
}

/// Outcome of a structural criterion. Indices are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub separable: bool,
    pub reason: CriterionReason,
    pub offending_term_indices: Vec<usize>,
    pub offending_factor_indices: Vec<usize>,
    pub warnings: Vec<BorderlineScalar>,
}

/// Local gates, global phase and reconstruction residual of a separation.
///
/// The invariant `‖λ·⊗factors − target‖_F = residual` holds with `λ` the
/// stored phase; each factor carries the canonical phase that makes its
/// largest-modulus entry real and positive.
#[derive(Debug, Clone)]
pub struct SeparationResult {
    pub local_factors: Vec<ComplexMatrix>,
    pub global_phase: Complex64,
    pub residual: f64,
}

/// Scalar classification of one factor.
struct FactorInfo {
    /// `Some(λ)` when the factor is λ·I within tolerance (λ real for
    /// Hermitian factors).
    scalar: Option<f64>,
    /// Deviation as a multiple of the scalar tolerance, when it falls into
    /// the warning band around 1.
    borderline_ratio: Option<f64>,
}

fn classify_factor(f: &ComplexMatrix, tol: &Tolerances) -> FactorInfo {
    let (lambda, deviation) = scalar_deviation(f);
    let bound = tol.scalar_bound(f.frobenius_norm());
    let ratio = if bound > 0.0 { deviation / bound } else { f64::INFINITY };
    let borderline_ratio = (ratio > 0.1 && ratio < 10.0).then_some(ratio);
    FactorInfo {
        scalar: (deviation <= bound).then(|| {
            let mut l = lambda;
            if l.im.abs() <= tol.tol_scalar {
                l.im = 0.0;
            }
            l.re
        }),
        borderline_ratio,
    }
}

fn classify_term(term: &TensorTerm, tol: &Tolerances) -> Vec<FactorInfo> {
    term.factors().iter().map(|f| classify_factor(f, tol)).collect()
}

fn non_scalar_indices(info: &[FactorInfo]) -> Vec<usize> {
    info.iter()
        .enumerate()
        .filter(|(_, fi)| fi.scalar.is_none())
        .map(|(i, _)| i)
        .collect()
}

/// Product of the scalar coefficients of all factors except `subsystem`,
/// when that factor is the (unique) non-scalar one; zero when the factor at
/// `subsystem` is itself scalar.
///
/// Fails when two or more factors are non-scalar.
pub fn delta(term: &TensorTerm, subsystem: usize, tol: &Tolerances) -> Result<f64, CriterionError> {
    let info = classify_term(term, tol);
    let non_scalar = non_scalar_indices(&info);
    if non_scalar.len() > 1 {
        return Err(CriterionError::MultiScalar { factors: non_scalar });
    }
    Ok(delta_from_info(&info, subsystem))
}

fn delta_from_info(info: &[FactorInfo], subsystem: usize) -> f64 {
    if info[subsystem].scalar.is_some() {
        return 0.0;
    }
    info.iter()
        .enumerate()
        .filter(|&(k, _)| k != subsystem)
        .map(|(_, fi)| fi.scalar.expect("all other factors scalar"))
        .product()
}

/// The rank-one criterion: at most one factor may lie outside ℝ·I.
pub fn check_rank_one(term: &TensorTerm, tol: &Tolerances) -> CriterionReport {
    let info = classify_term(term, tol);
    let non_scalar = non_scalar_indices(&info);
    let warnings = info
        .iter()
        .enumerate()
        .filter_map(|(i, fi)| {
            fi.borderline_ratio.map(|ratio| BorderlineScalar {
                term: 0,
                factor: i,
                ratio,
            })
        })
        .collect();
    if non_scalar.len() <= 1 {
        CriterionReport {
            separable: true,
            reason: CriterionReason::RankOneOk,
            offending_term_indices: vec![],
            offending_factor_indices: vec![],
            warnings,
        }
    } else {
        CriterionReport {
            separable: false,
            reason: CriterionReason::MultiScalarViolation,
            offending_term_indices: vec![0],
            offending_factor_indices: non_scalar,
            warnings,
        }
    }
}

fn aligned_result(
    mut factors: Vec<ComplexMatrix>,
    target: &ComplexMatrix,
    bound: f64,
) -> Result<SeparationResult, CriterionError> {
    for f in factors.iter_mut() {
        let (canon, _) = canonicalize_phase(f);
        *f = canon;
    }
    let recon = kron_all(&factors)?;
    let align = phase_alignment(target, &recon)?;
    let global_phase = align.phase.unwrap_or(Complex64::new(1.0, 0.0));
    if align.distance > bound {
        return Err(CriterionError::ResidualTooLarge {
            residual: align.distance,
            bound,
        });
    }
    Ok(SeparationResult {
        local_factors: factors,
        global_phase,
        residual: align.distance,
    })
}

/// Local gates for a single rank-one term: factor `j` is
/// `exp(i·t·δ(A_j)·A_j)`, identity wherever the factor is scalar.
pub fn synthesize_rank_one(
    term: &TensorTerm,
    t: f64,
    tol: &Tolerances,
) -> Result<SeparationResult, CriterionError> {
    let info = classify_term(term, tol);
    let non_scalar = non_scalar_indices(&info);
    if non_scalar.len() > 1 {
        return Err(CriterionError::MultiScalar { factors: non_scalar });
    }
    let mut factors = Vec::with_capacity(term.subsystems());
    for (j, f) in term.factors().iter().enumerate() {
        let exponent = t * delta_from_info(&info, j);
        factors.push(expm_i_hermitian(f, exponent, tol)?);
    }
    let target = expm_i_hermitian(&term.synthesize()?, t, tol)?;
    let dim = target.dim() as f64;
    aligned_result(factors, &target, RANK_ONE_RESIDUAL * dim)
}

fn commuting_sum_analysis(
    d: &TensorDecomposition,
    tol: &Tolerances,
) -> Result<(CriterionReport, Vec<(usize, usize)>), CriterionError> {
    let mut warnings = Vec::new();
    let mut bad_terms = Vec::new();
    let mut first_bad_factors = Vec::new();
    let infos: Vec<Vec<FactorInfo>> = d.terms().iter().map(|t| classify_term(t, tol)).collect();
    for (ti, info) in infos.iter().enumerate() {
        for (fi, f) in info.iter().enumerate() {
            if let Some(ratio) = f.borderline_ratio {
                warnings.push(BorderlineScalar {
                    term: ti,
                    factor: fi,
                    ratio,
                });
            }
        }
        let non_scalar = non_scalar_indices(info);
        if non_scalar.len() > 1 {
            if bad_terms.is_empty() {
                first_bad_factors = non_scalar;
            }
            bad_terms.push(ti);
        }
    }
    if !bad_terms.is_empty() {
        return Ok((
            CriterionReport {
                separable: false,
                reason: CriterionReason::MultiScalarViolation,
                offending_term_indices: bad_terms,
                offending_factor_indices: first_bad_factors,
                warnings,
            },
            vec![],
        ));
    }

    let dense: Vec<ComplexMatrix> = d
        .terms()
        .iter()
        .map(|t| t.synthesize())
        .collect::<Result<_, _>>()?;
    let norms: Vec<f64> = dense.iter().map(|m| m.frobenius_norm()).collect();
    let mut pairs = Vec::new();
    for k in 0..dense.len() {
        for l in (k + 1)..dense.len() {
            let comm = &(&dense[k] * &dense[l]) - &(&dense[l] * &dense[k]);
            if comm.frobenius_norm() > tol.tol_hermitian * norms[k] * norms[l] {
                pairs.push((k, l));
            }
        }
    }
    if !pairs.is_empty() {
        let mut flattened: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        flattened.sort_unstable();
        flattened.dedup();
        return Ok((
            CriterionReport {
                separable: false,
                reason: CriterionReason::NoncommutingTerms,
                offending_term_indices: flattened,
                offending_factor_indices: vec![],
                warnings,
            },
            pairs,
        ));
    }
    Ok((
        CriterionReport {
            separable: true,
            reason: CriterionReason::CommutingSumOk,
            offending_term_indices: vec![],
            offending_factor_indices: vec![],
            warnings,
        },
        vec![],
    ))
}

/// The commuting-sum sufficient condition: every pair of dense terms must
/// commute and every term must pass the rank-one check.
///
/// Rejection here is not a proof of non-separability; the condition is
/// sufficient only.
pub fn check_commuting_sum(
    d: &TensorDecomposition,
    tol: &Tolerances,
) -> Result<CriterionReport, CriterionError> {
    Ok(commuting_sum_analysis(d, tol)?.0)
}

/// Local gates for a commuting sum: subsystem `i` receives the ordered
/// product over terms `k` of `exp(i·t·δ(A_k⁽ⁱ⁾)·A_k⁽ⁱ⁾)`, evaluated left to
/// right in term order.
pub fn synthesize_commuting_sum(
    d: &TensorDecomposition,
    tol: &Tolerances,
) -> Result<SeparationResult, CriterionError> {
    let (report, pairs) = commuting_sum_analysis(d, tol)?;
    if !report.separable {
        return Err(match report.reason {
            CriterionReason::NoncommutingTerms => CriterionError::Noncommuting { pairs },
            _ => CriterionError::MultiScalar {
                factors: report.offending_factor_indices,
            },
        });
    }
    let infos: Vec<Vec<FactorInfo>> = d.terms().iter().map(|t| classify_term(t, tol)).collect();
    let mut factors = Vec::with_capacity(d.dims().len());
    for (i, &dim_i) in d.dims().iter().enumerate() {
        let mut acc = ComplexMatrix::identity(dim_i);
        for (k, term) in d.terms().iter().enumerate() {
            let exponent = d.t() * delta_from_info(&infos[k], i);
            let gate = expm_i_hermitian(&term.factors()[i], exponent, tol)?;
            acc = &acc * &gate;
        }
        factors.push(acc);
    }
    let target = expm_i_hermitian(&d.hamiltonian()?, d.t(), tol)?;
    let dim = target.dim() as f64;
    aligned_result(factors, &target, COMMUTING_SUM_RESIDUAL * dim)
}

/// Regroups a sum of one-local terms into per-subsystem generators
/// `K_j = Σ δ·A⁽ʲ⁾` plus a scalar remainder, and returns `exp(i·t·K_j)` per
/// subsystem. Generators on distinct subsystems always commute, so this
/// covers sums that fail the pairwise-commutation test, as long as every
/// term has at most one non-scalar factor.
pub fn separate_by_regrouping(
    d: &TensorDecomposition,
    tol: &Tolerances,
) -> Result<SeparationResult, CriterionError> {
    let mut generators: Vec<ComplexMatrix> = d
        .dims()
        .iter()
        .map(|&dim| ComplexMatrix::zeros(dim, dim))
        .collect();
    for (ti, term) in d.terms().iter().enumerate() {
        let info = classify_term(term, tol);
        let non_scalar = non_scalar_indices(&info);
        match non_scalar.len() {
            0 => {} // fully scalar term: contributes only a global phase
            1 => {
                let j = non_scalar[0];
                let scale = delta_from_info(&info, j);
                generators[j] =
                    &generators[j] + &term.factors()[j].scale(Complex64::new(scale, 0.0));
            }
            _ => {
                return Err(CriterionError::NotApplicable {
                    term: ti,
                    factors: non_scalar,
                })
            }
        }
    }
    let factors = generators
        .iter()
        .map(|k| expm_i_hermitian(k, d.t(), tol))
        .collect::<Result<Vec<_>, _>>()?;
    let target = expm_i_hermitian(&d.hamiltonian()?, d.t(), tol)?;
    let dim = target.dim() as f64;
    aligned_result(factors, &target, REGROUPING_RESIDUAL * dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::testutil::{assert_close, c};
    use crate::matrix::{dist_up_to_phase, kron};
    use crate::pauli::PauliLetter;

    fn tol() -> Tolerances {
        Tolerances::default()
    }
    fn sx() -> ComplexMatrix {
        PauliLetter::X.matrix()
    }
    fn sy() -> ComplexMatrix {
        PauliLetter::Y.matrix()
    }
    fn sz() -> ComplexMatrix {
        PauliLetter::Z.matrix()
    }
    fn id2() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }
    fn scalar2(x: f64) -> ComplexMatrix {
        ComplexMatrix::scalar(2, c(x, 0.0))
    }
    fn term(factors: Vec<ComplexMatrix>) -> TensorTerm {
        TensorTerm::new(factors, &tol()).unwrap()
    }

    /// Terms of the spin Hamiltonian `I⊗σ + σ⊗I`.
    fn spin_terms(sigma: &ComplexMatrix) -> Vec<TensorTerm> {
        vec![
            term(vec![id2(), sigma.clone()]),
            term(vec![sigma.clone(), id2()]),
        ]
    }

    #[test]
    fn delta_examples() {
        let t = term(vec![scalar2(2.0), sx(), scalar2(3.0)]);
        assert_eq!(delta(&t, 1, &tol()).unwrap(), 6.0);
        assert_eq!(delta(&t, 0, &tol()).unwrap(), 0.0);
        assert_eq!(delta(&t, 2, &tol()).unwrap(), 0.0);

        // empty product over the remaining scalars gives 1
        let t = term(vec![id2(), sx()]);
        assert_eq!(delta(&t, 1, &tol()).unwrap(), 1.0);

        let t = term(vec![sx(), sz()]);
        assert!(matches!(
            delta(&t, 0, &tol()),
            Err(CriterionError::MultiScalar { .. })
        ));
    }

    #[test]
    fn delta_scales_linearly_with_scalar_factors() {
        for scale in [0.5, 2.0, -3.0] {
            let base = term(vec![scalar2(1.5), sy()]);
            let scaled = term(vec![scalar2(1.5 * scale), sy()]);
            let d0 = delta(&base, 1, &tol()).unwrap();
            let d1 = delta(&scaled, 1, &tol()).unwrap();
            assert!((d1 - scale * d0).abs() < 1e-12 * d0.abs().max(1.0));
        }
    }

    #[test]
    fn rank_one_check_examples() {
        let report = check_rank_one(&term(vec![sx(), id2()]), &tol());
        assert!(report.separable);
        assert_eq!(report.reason, CriterionReason::RankOneOk);

        let report = check_rank_one(&term(vec![sx(), sx()]), &tol());
        assert!(!report.separable);
        assert_eq!(report.reason, CriterionReason::MultiScalarViolation);
        assert_eq!(report.offending_factor_indices, vec![0, 1]);

        let report = check_rank_one(
            &term(vec![scalar2(2.0), scalar2(3.0), scalar2(5.0)]),
            &tol(),
        );
        assert!(report.separable);
    }

    #[test]
    fn borderline_scalars_warn() {
        // deviation right at the tolerance scale: 3e-9 off a unit-norm matrix
        let nearly = &scalar2(1.0) + &sx().scale(c(1.5e-9, 0.0));
        let report = check_rank_one(&term(vec![nearly, sx()]), &tol());
        assert!(
            !report.warnings.is_empty(),
            "expected a borderline warning: {report:?}"
        );
    }

    #[test]
    fn synthesize_rank_one_nontrivial_factor() {
        let t_param = 0.7;
        let result = synthesize_rank_one(&term(vec![sx(), id2()]), t_param, &tol()).unwrap();
        let expected = expm_i_hermitian(&sx(), t_param, &tol()).unwrap();
        assert!(dist_up_to_phase(&result.local_factors[0], &expected).unwrap() < 1e-12);
        assert!(dist_up_to_phase(&result.local_factors[1], &id2()).unwrap() < 1e-12);
        assert!(result.residual < 1e-10);
        assert!((result.global_phase.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn synthesize_rank_one_all_scalar_phase() {
        // H = 2I ⊗ 2I = 4·I₄; exp(i·(π/4)·H) = e^{iπ}·I = −I
        let result = synthesize_rank_one(
            &term(vec![scalar2(2.0), scalar2(2.0)]),
            std::f64::consts::FRAC_PI_4,
            &tol(),
        )
        .unwrap();
        for f in &result.local_factors {
            assert_close(f, &id2(), 1e-12, "identity factors");
        }
        assert!((result.global_phase - c(-1.0, 0.0)).norm() < 1e-12);
        assert!(result.residual < 1e-12);
    }

    #[test]
    fn synthesize_rank_one_scaled_z() {
        // [σ_Z, 3I] at t = 0.2: the non-scalar factor gets exponent 0.6
        let result = synthesize_rank_one(&term(vec![sz(), scalar2(3.0)]), 0.2, &tol()).unwrap();
        let expected = expm_i_hermitian(&sz(), 0.6, &tol()).unwrap();
        assert!(dist_up_to_phase(&result.local_factors[0], &expected).unwrap() < 1e-12);
        // compare against the dense 4x4 exponential
        let dense = expm_i_hermitian(&kron(&sz(), &scalar2(3.0)).unwrap(), 0.2, &tol()).unwrap();
        let recon = kron(
            &result.local_factors[0].scale(result.global_phase),
            &result.local_factors[1],
        )
        .unwrap();
        assert_close(&recon, &dense, 1e-10, "rank-one reconstruction");
    }

    #[test]
    fn synthesize_rank_one_rejects_violations() {
        assert!(matches!(
            synthesize_rank_one(&term(vec![sx(), sx()]), 0.3, &tol()),
            Err(CriterionError::MultiScalar { .. })
        ));
    }

    #[test]
    fn commuting_sum_accepts_spin_hamiltonian() {
        let d = TensorDecomposition::new(vec![2, 2], spin_terms(&sx()), 1.0).unwrap();
        let report = check_commuting_sum(&d, &tol()).unwrap();
        assert!(report.separable);
        assert_eq!(report.reason, CriterionReason::CommutingSumOk);
    }

    #[test]
    fn commuting_sum_rejects_noncommuting_one_local_terms() {
        // a₂σ_X⊗I and a₃σ_Y⊗I are each rank-one but do not commute
        let terms = vec![
            term(vec![sx(), id2()]),
            term(vec![sy(), id2()]),
            term(vec![id2(), sz()]),
        ];
        let d = TensorDecomposition::new(vec![2, 2], terms, 1.0).unwrap();
        let report = check_commuting_sum(&d, &tol()).unwrap();
        assert!(!report.separable);
        assert_eq!(report.reason, CriterionReason::NoncommutingTerms);
        assert_eq!(report.offending_term_indices, vec![0, 1]);
    }

    #[test]
    fn commuting_sum_flags_multi_scalar_terms_first() {
        let terms = vec![term(vec![sx(), sx()]), term(vec![id2(), id2()])];
        let d = TensorDecomposition::new(vec![2, 2], terms, 1.0).unwrap();
        let report = check_commuting_sum(&d, &tol()).unwrap();
        assert!(!report.separable);
        assert_eq!(report.reason, CriterionReason::MultiScalarViolation);
        assert_eq!(report.offending_term_indices, vec![0]);
        assert_eq!(report.offending_factor_indices, vec![0, 1]);
    }

    #[test]
    fn synthesize_commuting_sum_spin_gates() {
        for (sigma, t_param) in [(sx(), 0.8), (sy(), -0.4), (sz(), 0.5)] {
            let d = TensorDecomposition::new(vec![2, 2], spin_terms(&sigma), t_param).unwrap();
            let result = synthesize_commuting_sum(&d, &tol()).unwrap();
            let local = expm_i_hermitian(&sigma, t_param, &tol()).unwrap();
            for f in &result.local_factors {
                assert!(dist_up_to_phase(f, &local).unwrap() < 1e-11);
            }
            assert!(result.residual < 1e-10, "residual {}", result.residual);
        }
    }

    #[test]
    fn single_term_matches_rank_one_synthesis() {
        let t_param = 0.35;
        let single = term(vec![sz(), scalar2(2.0)]);
        let d = TensorDecomposition::new(vec![2, 2], vec![single.clone()], t_param).unwrap();
        let via_sum = synthesize_commuting_sum(&d, &tol()).unwrap();
        let via_rank_one = synthesize_rank_one(&single, t_param, &tol()).unwrap();
        for (a, b) in via_sum.local_factors.iter().zip(&via_rank_one.local_factors) {
            assert_close(a, b, 1e-12, "factor agreement");
        }
        assert!((via_sum.global_phase - via_rank_one.global_phase).norm() < 1e-10);
    }

    #[test]
    fn synthesize_commuting_sum_rejects_noncommuting() {
        let terms = vec![term(vec![sx(), id2()]), term(vec![sy(), id2()])];
        let d = TensorDecomposition::new(vec![2, 2], terms, 1.0).unwrap();
        assert!(matches!(
            synthesize_commuting_sum(&d, &tol()),
            Err(CriterionError::Noncommuting { .. })
        ));
    }

    /// Terms of `Σᵢ aᵢσᵢ⊗I + I⊗bᵢσᵢ` over σ = (I, X, Y, Z).
    fn seven_parameter_terms(a: [f64; 4], b: [f64; 4]) -> Vec<TensorTerm> {
        let sigmas = [id2(), sx(), sy(), sz()];
        let mut terms = Vec::new();
        for (i, sigma) in sigmas.iter().enumerate() {
            terms.push(term(vec![sigma.scale(c(a[i], 0.0)), id2()]));
            terms.push(term(vec![id2(), sigma.scale(c(b[i], 0.0))]));
        }
        terms
    }

    #[test]
    fn regrouping_separates_the_seven_parameter_hamiltonian() {
        let t_param = 0.6;
        let d = TensorDecomposition::new(
            vec![2, 2],
            seven_parameter_terms([0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]),
            t_param,
        )
        .unwrap();
        // generic pairwise commutation fails for mixed Pauli directions...
        let result = separate_by_regrouping(&d, &tol()).unwrap();
        let left = expm_i_hermitian(&sx(), t_param, &tol()).unwrap();
        let right = expm_i_hermitian(&sz(), t_param, &tol()).unwrap();
        assert!(dist_up_to_phase(&result.local_factors[0], &left).unwrap() < 1e-11);
        assert!(dist_up_to_phase(&result.local_factors[1], &right).unwrap() < 1e-11);
        assert!(result.residual < 1e-10);
    }

    #[test]
    fn regrouping_matches_commuting_sum_on_spin_gates() {
        let d = TensorDecomposition::new(vec![2, 2], spin_terms(&sx()), 0.9).unwrap();
        let via_regroup = separate_by_regrouping(&d, &tol()).unwrap();
        let via_sum = synthesize_commuting_sum(&d, &tol()).unwrap();
        for (a, b) in via_regroup.local_factors.iter().zip(&via_sum.local_factors) {
            assert_close(a, b, 1e-11, "factor agreement");
        }
    }

    #[test]
    fn regrouping_random_seven_parameter_draws() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let a = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let b = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let d =
                TensorDecomposition::new(vec![2, 2], seven_parameter_terms(a, b), 0.3).unwrap();
            let result = separate_by_regrouping(&d, &tol()).unwrap();
            assert!(result.residual < 1e-9, "residual {}", result.residual);
            // cross-check against the dense 4x4 exponential
            let dense = expm_i_hermitian(&d.hamiltonian().unwrap(), 0.3, &tol()).unwrap();
            let recon = kron(
                &result.local_factors[0].scale(result.global_phase),
                &result.local_factors[1],
            )
            .unwrap();
            assert_close(&recon, &dense, 1e-9, "regrouping oracle");
        }
    }

    #[test]
    fn regrouping_rejects_entangling_terms() {
        let terms = vec![term(vec![sz(), sz()])];
        let d = TensorDecomposition::new(vec![2, 2], terms, 1.0).unwrap();
        assert!(matches!(
            separate_by_regrouping(&d, &tol()),
            Err(CriterionError::NotApplicable { term: 0, .. })
        ));
    }

    #[test]
    fn decomposition_validates_shapes() {
        let bad = TensorDecomposition::new(vec![2, 4], vec![term(vec![sx(), sz()])], 1.0);
        assert!(matches!(
            bad,
            Err(CriterionError::FactorDimension { term: 0, factor: 1, .. })
        ));
        let bad = TensorDecomposition::new(vec![2], vec![term(vec![sx(), sz()])], 1.0);
        assert!(matches!(bad, Err(CriterionError::FactorCount { .. })));
        let bad = TensorDecomposition::new(vec![2], vec![term(vec![sx()])], f64::NAN);
        assert!(matches!(bad, Err(CriterionError::NonFiniteTime)));
    }

    #[test]
    fn tensor_term_requires_hermitian_factors() {
        let skew = sx().scale(c(0.0, 1.0));
        assert!(matches!(
            TensorTerm::new(vec![skew, id2()], &tol()),
            Err(CriterionError::Factor { factor: 0, .. })
        ));
    }
}
