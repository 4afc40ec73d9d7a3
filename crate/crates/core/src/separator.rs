//! Separability of a unitary itself, independent of any Hamiltonian
//! presentation: operator Schmidt decomposition across bipartitions,
//! recursive full factorization, the structural block checker in literal and
//! corrected variants, and the nearest-local-unitary approximation.
//!
//! The Schmidt oracle is the authoritative verdict: it operates on the gate
//! directly and is immune to the logarithm-branch incompleteness that makes
//! generator-based criteria sufficient-only (`σ_Z⊗σ_Z` being the canonical
//! example).

use num_complex::Complex64;
use thiserror::Error;

use crate::hamiltonian::SeparationResult;
use crate::matrix::{
    canonicalize_phase, kron_all, phase_alignment, scalar_deviation, ComplexMatrix, MatrixError,
};
use crate::spectral::{polar_unitary, principal_log_unitary, svd};
use crate::tolerances::Tolerances;

/// Residual bound (times dimension) for exact-split reconstructions.
pub const SPLIT_RESIDUAL: f64 = 1e-9;

/// Singular values of the realigned gate across one bipartition.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    pub left_dim: usize,
    pub right_dim: usize,
    /// Descending, nonnegative; their squares sum to `‖U‖_F²`.
    pub singular_values: Vec<f64>,
}

impl SchmidtSpectrum {
    /// `σ₂/σ₁`; zero when the spectrum has a single value.
    pub fn rank_one_ratio(&self) -> f64 {
        match self.singular_values.as_slice() {
            [first, second, ..] if *first > 0.0 => second / first,
            _ => 0.0,
        }
    }
}

/// Variants of the structural block checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alg21Mode {
    /// Literal transcription of the published pseudocode, status polarity
    /// included, kept for documentation of its inconsistencies.
    PaperFaithful,
    /// The evident intent: the gate acts as the identity on every subsystem
    /// except at most one.
    Corrected,
}

/// Outcome of the structural block checker.
#[derive(Debug, Clone, PartialEq)]
pub struct Alg21Report {
    pub status: bool,
    /// Zero-based subsystem carrying the non-identity action, when the check
    /// succeeds and the action is non-trivial.
    pub non_identity_index: Option<usize>,
    pub mode: Alg21Mode,
    /// Propagated from the principal logarithm: an eigenvalue of the gate
    /// sits near −1, where generator-based criteria lose necessity.
    pub near_branch_cut: bool,
}

#[derive(Debug, Error)]
pub enum SeparatorError {
    #[error("split {left}x{right} does not partition dimension {dim}")]
    CutMismatch { dim: usize, left: usize, right: usize },
    #[error("subsystem dimensions {dims:?} do not multiply to {dim}")]
    DimsProduct { dims: Vec<usize>, dim: usize },
    #[error("dimension {dim} is not 2^{qubits}")]
    NotQubits { dim: usize, qubits: usize },
    #[error("not separable across cut {cut}: sigma2/sigma1 = {ratio:.3e}")]
    NotSeparable {
        cut: usize,
        spectrum: SchmidtSpectrum,
        ratio: f64,
    },
    #[error("borderline across cut {cut}: {detail}")]
    Borderline {
        cut: usize,
        spectrum: SchmidtSpectrum,
        detail: String,
    },
    #[error("alternating refinement increased the objective from {prev:.6e} to {next:.6e}")]
    ObjectiveIncreased { prev: f64, next: f64 },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Reshuffles a `d₁d₂ × d₁d₂` matrix into the `d₁² × d₂²` realignment with
/// `R[(i,j),(k,l)] = u[(i,k),(j,l)]`, which maps `A⊗B` to the rank-one outer
/// product `vec(A)·vec(B)ᵀ`. Entry-preserving, so `‖R‖_F = ‖u‖_F` exactly.
pub fn realign(
    u: &ComplexMatrix,
    left_dim: usize,
    right_dim: usize,
) -> Result<ComplexMatrix, SeparatorError> {
    let dim = u.ensure_square().map_err(SeparatorError::Matrix)?;
    if left_dim == 0 || right_dim == 0 || left_dim * right_dim != dim {
        return Err(SeparatorError::CutMismatch {
            dim,
            left: left_dim,
            right: right_dim,
        });
    }
    let mut r = ComplexMatrix::zeros(left_dim * left_dim, right_dim * right_dim);
    for i in 0..left_dim {
        for j in 0..left_dim {
            for k in 0..right_dim {
                for l in 0..right_dim {
                    r[(i * left_dim + j, k * right_dim + l)] =
                        u.get(i * right_dim + k, j * right_dim + l);
                }
            }
        }
    }
    Ok(r)
}

/// Operator Schmidt spectrum across the given bipartition: the singular
/// values of the realignment. The gate is a product across the cut exactly
/// when the spectrum is rank one.
pub fn operator_schmidt(
    u: &ComplexMatrix,
    left_dim: usize,
    right_dim: usize,
) -> Result<SchmidtSpectrum, SeparatorError> {
    let r = realign(u, left_dim, right_dim)?;
    let decomp = svd(&r).map_err(SeparatorError::Matrix)?;
    Ok(SchmidtSpectrum {
        left_dim,
        right_dim,
        singular_values: decomp.singular_values,
    })
}

/// Schmidt spectra across every prefix cut (subsystems `0..k` vs the rest);
/// a diagnostic companion to the left-to-right peeling of [`separate_full`].
pub fn schmidt_prefix_cuts(
    u: &ComplexMatrix,
    dims: &[usize],
) -> Result<Vec<SchmidtSpectrum>, SeparatorError> {
    let dim = u.ensure_square().map_err(SeparatorError::Matrix)?;
    if dims.iter().product::<usize>() != dim || dims.is_empty() {
        return Err(SeparatorError::DimsProduct {
            dims: dims.to_vec(),
            dim,
        });
    }
    let mut out = Vec::new();
    let mut left = 1usize;
    for d in &dims[..dims.len() - 1] {
        left *= d;
        out.push(operator_schmidt(u, left, dim / left)?);
    }
    Ok(out)
}

fn unvec(values: impl Iterator<Item = Complex64>, dim: usize) -> ComplexMatrix {
    let entries: Vec<Complex64> = values.collect();
    debug_assert_eq!(entries.len(), dim * dim);
    ComplexMatrix::new(dim, dim, entries).expect("unvec shape")
}

struct SplitFactors {
    left: ComplexMatrix,
    right: ComplexMatrix,
    spectrum: SchmidtSpectrum,
}

/// Core of the bipartite split: rank-one test with a borderline band, factor
/// extraction from the top singular pair, rescale and unitarity check.
fn split_factors(
    u: &ComplexMatrix,
    left_dim: usize,
    right_dim: usize,
    cut: usize,
    tol: &Tolerances,
) -> Result<SplitFactors, SeparatorError> {
    let r = realign(u, left_dim, right_dim)?;
    let decomp = svd(&r).map_err(SeparatorError::Matrix)?;
    let spectrum = SchmidtSpectrum {
        left_dim,
        right_dim,
        singular_values: decomp.singular_values.clone(),
    };
    let ratio = spectrum.rank_one_ratio();
    if ratio >= 10.0 * tol.tol_schmidt {
        return Err(SeparatorError::NotSeparable { cut, spectrum, ratio });
    }
    if ratio > 0.1 * tol.tol_schmidt {
        return Err(SeparatorError::Borderline {
            cut,
            spectrum,
            detail: format!(
                "sigma2/sigma1 = {ratio:.3e} inside the ({:.1e}, {:.1e}) band",
                0.1 * tol.tol_schmidt,
                10.0 * tol.tol_schmidt
            ),
        });
    }

    // top singular pair: R ≈ σ₁ · u₁ · v₁†, with vec(A) ∝ u₁ and
    // vec(B) ∝ the first row of V†
    let left_raw = unvec((0..left_dim * left_dim).map(|i| decomp.u.get(i, 0)), left_dim);
    let right_raw = unvec(
        (0..right_dim * right_dim).map(|j| decomp.v_t.get(0, j)),
        right_dim,
    );
    let mut factors = Vec::with_capacity(2);
    for (raw, d) in [(left_raw, left_dim), (right_raw, right_dim)] {
        let scaled = raw.scale(Complex64::new((d as f64).sqrt(), 0.0));
        let deviation = scaled.unitary_deviation();
        let bound = tol.unitary_bound((d as f64).sqrt());
        if deviation > bound {
            return Err(SeparatorError::Borderline {
                cut,
                spectrum: spectrum.clone(),
                detail: format!(
                    "extracted factor is not unitary: deviation {deviation:.3e} exceeds {bound:.3e}"
                ),
            });
        }
        factors.push(polar_unitary(&scaled).map_err(SeparatorError::Matrix)?);
    }
    let right = factors.pop().expect("two factors");
    let left = factors.pop().expect("two factors");
    Ok(SplitFactors { left, right, spectrum })
}

fn aligned_separation(
    mut factors: Vec<ComplexMatrix>,
    target: &ComplexMatrix,
    cut: usize,
    spectrum: impl Fn() -> SchmidtSpectrum,
) -> Result<SeparationResult, SeparatorError> {
    for f in factors.iter_mut() {
        let (canon, _) = canonicalize_phase(f);
        *f = canon;
    }
    let recon = kron_all(&factors).map_err(SeparatorError::Matrix)?;
    let align = phase_alignment(target, &recon).map_err(SeparatorError::Matrix)?;
    let bound = SPLIT_RESIDUAL * target.dim() as f64;
    if align.distance > bound {
        return Err(SeparatorError::Borderline {
            cut,
            spectrum: spectrum(),
            detail: format!(
                "reconstruction residual {:.3e} exceeds {bound:.3e}",
                align.distance
            ),
        });
    }
    Ok(SeparationResult {
        local_factors: factors,
        global_phase: align.phase.unwrap_or(Complex64::new(1.0, 0.0)),
        residual: align.distance,
    })
}

/// Splits a unitary across one bipartition, or reports the Schmidt spectrum
/// that obstructs the split.
pub fn split_bipartite(
    u: &ComplexMatrix,
    left_dim: usize,
    right_dim: usize,
    tol: &Tolerances,
) -> Result<SeparationResult, SeparatorError> {
    u.ensure_unitary(tol).map_err(SeparatorError::Matrix)?;
    let split = split_factors(u, left_dim, right_dim, 0, tol)?;
    let spectrum = split.spectrum.clone();
    aligned_separation(vec![split.left, split.right], u, 0, move || spectrum.clone())
}

/// Full factorization by peeling subsystems left to right. A gate is a full
/// product exactly when it is a product across every left-vs-rest cut, so
/// the first failing cut decides the verdict and its spectrum is reported.
pub fn separate_full(
    u: &ComplexMatrix,
    dims: &[usize],
    tol: &Tolerances,
) -> Result<SeparationResult, SeparatorError> {
    let dim = u.ensure_square().map_err(SeparatorError::Matrix)?;
    if dims.is_empty() || dims.iter().product::<usize>() != dim {
        return Err(SeparatorError::DimsProduct {
            dims: dims.to_vec(),
            dim,
        });
    }
    u.ensure_unitary(tol).map_err(SeparatorError::Matrix)?;

    let mut factors: Vec<ComplexMatrix> = Vec::with_capacity(dims.len());
    let mut current = u.clone();
    for (cut, &left_dim) in dims.iter().enumerate().take(dims.len() - 1) {
        let right_dim = current.dim() / left_dim;
        let split = split_factors(&current, left_dim, right_dim, cut, tol)?;
        factors.push(split.left);
        current = split.right;
    }
    factors.push(current);

    let last_cut = dims.len().saturating_sub(1);
    let fallback_spectrum = move || SchmidtSpectrum {
        left_dim: dim,
        right_dim: 1,
        singular_values: vec![(dim as f64).sqrt()],
    };
    aligned_separation(factors, u, last_cut, fallback_spectrum)
}

fn half_blocks(h: &ComplexMatrix) -> [ComplexMatrix; 4] {
    let half = h.dim() / 2;
    let block = |r0: usize, c0: usize| {
        ComplexMatrix::from_fn(half, half, |i, j| h.get(r0 + i, c0 + j))
    };
    [block(0, 0), block(0, half), block(half, 0), block(half, half)]
}

struct BlockTests {
    threshold: f64,
}

impl BlockTests {
    fn is_zero(&self, m: &ComplexMatrix) -> bool {
        m.frobenius_norm() <= self.threshold
    }
    fn equal(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> bool {
        (a - b).frobenius_norm() <= self.threshold
    }
    fn is_scalar(&self, m: &ComplexMatrix) -> bool {
        scalar_deviation(m).1 <= self.threshold
    }
}

/// Literal transcription of the published pseudocode, including the status
/// polarity exactly as printed. The branch layout mirrors the original
/// control flow line by line, so the lint-preferred collapses do not apply.
#[allow(clippy::if_same_then_else, clippy::needless_bool)]
fn pos_checker_literal(h: &ComplexMatrix, index: usize, tests: &BlockTests) -> bool {
    if index == 1 {
        return check_pos_last_dim_n(h, tests);
    }
    let [c11, c12, c21, c22] = half_blocks(h);
    if !(tests.is_zero(&c12) && tests.is_zero(&c21)) {
        false
    } else if !tests.equal(&c11, &c22) {
        false
    } else if pos_checker_literal(&c11, index - 1, tests) {
        false
    } else {
        true
    }
}

#[allow(clippy::needless_bool)]
fn check_pos_last_dim_n(h: &ComplexMatrix, tests: &BlockTests) -> bool {
    if h.dim() < 4 {
        return true;
    }
    let blocks = half_blocks(h);
    if blocks.iter().all(|b| tests.is_scalar(b)) {
        false
    } else {
        true
    }
}

/// Does `h` equal `I ⊗ … ⊗ g ⊗ … ⊗ I` with the action confined to qubit
/// `k`? Peels the leading qubits via zero off-diagonal blocks and equal
/// diagonal blocks, then demands the trailing qubits act trivially.
fn identity_except(h: &ComplexMatrix, k: usize, tests: &BlockTests) -> bool {
    let mut block = h.clone();
    for _ in 0..k {
        let [c11, c12, c21, c22] = half_blocks(&block);
        if !tests.is_zero(&c12) || !tests.is_zero(&c21) || !tests.equal(&c11, &c22) {
            return false;
        }
        block = c11;
    }
    if block.dim() == 2 {
        return true;
    }
    // block must be g ⊗ I on the remaining qubits: all four half-blocks
    // proportional to the identity
    half_blocks(&block).iter().all(|b| tests.is_scalar(b))
}

/// Structural block checker on the principal logarithm of the gate.
///
/// The corrected variant reports whether the generator (trace part removed)
/// acts on at most one qubit, and which; the literal variant reproduces the
/// original pseudocode e
/// xactly as printed, inconsistent polarity included.
pub fn algorithm21_check(
    u: &ComplexMatrix,
    n_qubits: usize,
    mode: Alg21Mode,
    tol: &Tolerances,
) -> Result<Alg21Report, SeparatorError> {
    let dim = u.ensure_square().map_err(SeparatorError::Matrix)?;
    if n_qubits == 0 || dim != 1usize << n_qubits {
        return Err(SeparatorError::NotQubits {
            dim,
            qubits: n_qubits,
        });
    }
    let log = principal_log_unitary(u, tol).map_err(SeparatorError::Matrix)?;
    let h = log.hermitian;
    let tests = BlockTests {
        threshold: tol.hermitian_bound(h.frobenius_norm()),
    };

    match mode {
        Alg21Mode::PaperFaithful => {
            for index in 1..=n_qubits {
                if pos_checker_literal(&h, index, &tests) {
                    return Ok(Alg21Report {
                        status: true,
                        non_identity_index: Some(index - 1),
                        mode,
                        near_branch_cut: log.near_branch_cut,
                    });
                }
            }
            Ok(Alg21Report {
                status: false,
                non_identity_index: None,
                mode,
                near_branch_cut: log.near_branch_cut,
            })
        }
        Alg21Mode::Corrected => {
            let traceless = &h - &ComplexMatrix::scalar(dim, h.trace() / dim as f64);
            if traceless.frobenius_norm() <= tests.threshold {
                // pure global phase: trivially separable, no action anywhere
                return Ok(Alg21Report {
                    status: true,
                    non_identity_index: None,
                    mode,
                    near_branch_cut: log.near_branch_cut,
                });
            }
            for k in 0..n_qubits {
                if identity_except(&traceless, k, &tests) {
                    return Ok(Alg21Report {
                        status: true,
                        non_identity_index: Some(k),
                        mode,
                        near_branch_cut: log.near_branch_cut,
                    });
                }
            }
            Ok(Alg21Report {
                status: false,
                non_identity_index: None,
                mode,
                near_branch_cut: log.near_branch_cut,
            })
        }
    }
}

/// Result of the alternating nearest-local-unitary refinement.
#[derive(Debug, Clone)]
pub struct ApproxOutcome {
    /// Best local factors found, global phase and final residual. A local
    /// optimum, not certified global.
    pub result: SeparationResult,
    /// Objective `min_φ ‖u − φ·⊗Vₖ‖_F` after the initial guess and after
    /// each sweep; non-increasing by construction.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn subsystem_strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    strides
}

/// Partial contraction of `u` against the conjugated factors on every
/// subsystem except `k`: maximizing `Re tr(Vₖ† Eₖ)` over unitary `Vₖ` is the
/// single-factor subproblem, solved by the polar factor of `Eₖ`.
fn environment(
    u: &ComplexMatrix,
    factors: &[ComplexMatrix],
    k: usize,
    dims: &[usize],
    strides: &[usize],
) -> ComplexMatrix {
    let dim = u.dim();
    let mut env = ComplexMatrix::zeros(dims[k], dims[k]);
    let mut row_digits = vec![0usize; dims.len()];
    let mut col_digits = vec![0usize; dims.len()];
    for row in 0..dim {
        for (j, &d) in dims.iter().enumerate() {
            row_digits[j] = (row / strides[j]) % d;
        }
        for col in 0..dim {
            let entry = u.get(row, col);
            if entry.norm_sqr() == 0.0 {
                continue;
            }
            for (j, &d) in dims.iter().enumerate() {
                col_digits[j] = (col / strides[j]) % d;
            }
            let mut weight = Complex64::new(1.0, 0.0);
            for j in 0..dims.len() {
                if j != k {
                    weight *= factors[j].get(row_digits[j], col_digits[j]).conj();
                }
            }
            env[(row_digits[k], col_digits[k])] += entry * weight;
        }
    }
    env
}

/// Rank-one Schmidt initialization: peel each subsystem's top singular
/// factor and project it onto the unitary group.
fn schmidt_initial_factors(
    u: &ComplexMatrix,
    dims: &[usize],
) -> Result<Vec<ComplexMatrix>, SeparatorError> {
    let mut factors = Vec::with_capacity(dims.len());
    let mut current = u.clone();
    for &left_dim in dims.iter().take(dims.len() - 1) {
        let right_dim = current.dim() / left_dim;
        let r = realign(&current, left_dim, right_dim)?;
        let decomp = svd(&r).map_err(SeparatorError::Matrix)?;
        let left_raw = unvec((0..left_dim * left_dim).map(|i| decomp.u.get(i, 0)), left_dim);
        let right_raw = unvec(
            (0..right_dim * right_dim).map(|j| decomp.v_t.get(0, j)),
            right_dim,
        );
        factors.push(polar_unitary(&left_raw).map_err(SeparatorError::Matrix)?);
        current = polar_unitary(&right_raw).map_err(SeparatorError::Matrix)?;
    }
    factors.push(current);
    Ok(factors)
}

/// Heuristic minimizer of `‖u − ⊗Vₖ‖_F` over local unitaries (up to global
/// phase) by alternating polar updates, initialized from the truncated
/// Schmidt factors. The objective never increases between sweeps;
/// convergence is declared when the relative improvement drops below
/// `rel_tol`.
///
/// The result is a local optimum. Gates with degenerate Schmidt spectra can
/// stall the default initialization on a saddle (CNOT does); run
/// [`nearest_local_unitary_from`] from extra starting points and keep the
/// best outcome when that matters.
pub fn nearest_local_unitary(
    u: &ComplexMatrix,
    dims: &[usize],
    max_iters: usize,
    rel_tol: f64,
    tol: &Tolerances,
) -> Result<ApproxOutcome, SeparatorError> {
    let init = schmidt_initial_factors_checked(u, dims, tol)?;
    nearest_local_unitary_from(u, dims, init, max_iters, rel_tol, tol)
}

fn schmidt_initial_factors_checked(
    u: &ComplexMatrix,
    dims: &[usize],
    tol: &Tolerances,
) -> Result<Vec<ComplexMatrix>, SeparatorError> {
    let dim = u.ensure_square().map_err(SeparatorError::Matrix)?;
    if dims.is_empty() || dims.iter().product::<usize>() != dim {
        return Err(SeparatorError::DimsProduct {
            dims: dims.to_vec(),
            dim,
        });
    }
    u.ensure_unitary(tol).map_err(SeparatorError::Matrix)?;
    schmidt_initial_factors(u, dims)
}

/// Alternating refinement from caller-supplied starting factors (one
/// unitary per subsystem).
pub fn nearest_local_unitary_from(
    u: &ComplexMatrix,
    dims: &[usize],
    init: Vec<ComplexMatrix>,
    max_iters: usize,
    rel_tol: f64,
    tol: &Tolerances,
) -> Result<ApproxOutcome, SeparatorError> {
    let dim = u.ensure_square().map_err(SeparatorError::Matrix)?;
    if dims.is_empty() || dims.iter().product::<usize>() != dim {
        return Err(SeparatorError::DimsProduct {
            dims: dims.to_vec(),
            dim,
        });
    }
    u.ensure_unitary(tol).map_err(SeparatorError::Matrix)?;
    if init.len() != dims.len() || init.iter().zip(dims).any(|(f, &d)| !f.is_square() || f.dim() != d)
    {
        return Err(SeparatorError::DimsProduct {
            dims: init.iter().map(|f| f.rows()).collect(),
            dim,
        });
    }
    for f in &init {
        f.ensure_unitary(tol).map_err(SeparatorError::Matrix)?;
    }

    let strides = subsystem_strides(dims);
    let mut factors = init;
    let objective = |factors: &[ComplexMatrix]| -> Result<f64, SeparatorError> {
        let recon = kron_all(factors).map_err(SeparatorError::Matrix)?;
        Ok(phase_alignment(u, &recon)
            .map_err(SeparatorError::Matrix)?
            .distance)
    };

    let mut history = vec![objective(&factors)?];
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..max_iters {
        for k in 0..dims.len() {
            let env = environment(u, &factors, k, dims, &strides);
            if env.frobenius_norm() > 1e-14 {
                factors[k] = polar_unitary(&env).map_err(SeparatorError::Matrix)?;
            }
        }
        iterations += 1;
        let prev = *history.last().expect("seeded");
        let next = objective(&factors)?;
        if next > prev + 1e-9 * (1.0 + prev) {
            return Err(SeparatorError::ObjectiveIncreased { prev, next });
        }
        history.push(next);
        if prev - next < rel_tol * prev.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    for f in factors.iter_mut() {
        let (canon, _) = canonicalize_phase(f);
        *f = canon;
    }
    let recon = kron_all(&factors).map_err(SeparatorError::Matrix)?;
    let align = phase_alignment(u, &recon).map_err(SeparatorError::Matrix)?;
    // the canonicalized reconstruction realizes the last recorded objective
    Ok(ApproxOutcome {
        result: SeparationResult {
            local_factors: factors,
            global_phase: align.phase.unwrap_or(Complex64::new(1.0, 0.0)),
            residual: align.distance,
        },
        objective_history: history,
        iterations,
        converged,
    })
}
