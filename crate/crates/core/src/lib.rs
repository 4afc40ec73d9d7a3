//! Tensor-product separation of quantum gates.
//!
//! A multipartite gate is separable when it equals a Kronecker product of
//! per-subsystem unitaries up to a global phase. This crate decides that
//! question along two independent routes and synthesizes the local factors
//! when the answer is yes:
//!
//! - **Generator criteria** ([`hamiltonian`]): given a presentation
//!   `U = exp(itH)` with `H` a sum of Hermitian elementary tensors, the
//!   rank-one and commuting-sum checks decide separability structurally and
//!   build each local gate from the δ-scaled factor exponentials, plus the
//!   per-subsystem regrouping that handles sums of one-local terms.
//! - **The Schmidt oracle** ([`separator`]): operating on the unitary
//!   itself, realignment plus SVD decides product form across every cut,
//!   immune to logarithm-branch artifacts. The oracle is authoritative; the
//!   generator criteria are presentation-bound.
//!
//! [`pauli`] converts dense qubit matrices to and from Pauli-string sums,
//! which provides the Hermitian tensor decomposition the criteria consume.
//! [`zassenhaus`] quantifies the product-formula corrections behind the
//! commuting-sum condition, and [`separator::nearest_local_unitary`]
//! answers the approximate question for gates that are not exactly
//! separable.
//!
//! Conventions: subsystem 1 is the leftmost Kronecker factor (most
//! significant index block); the evolution parameter is signed, so a
//! convention of `exp(-itH)` maps to `t ↦ -t`; all public indices are
//! zero-based.

pub mod hamiltonian;
pub mod matrix;
pub mod pauli;
pub mod separator;
pub mod spectral;
pub mod tolerances;
pub mod zassenhaus;

pub use hamiltonian::{
    check_commuting_sum, check_rank_one, delta, separate_by_regrouping, synthesize_commuting_sum,
    synthesize_rank_one, CriterionError, CriterionReason, CriterionReport, SeparationResult,
    TensorDecomposition, TensorTerm,
};
pub use matrix::{
    canonicalize_phase, dist_up_to_phase, is_scalar_matrix, kron, kron_all, max_dim,
    phase_alignment, set_max_dim, ComplexMatrix, MatrixError, PhaseAlignment, DEFAULT_MAX_DIM,
};
pub use num_complex::Complex64;
pub use pauli::{decompose, synthesize, to_tensor_decomposition, PauliLetter, PauliString, PauliSum};
pub use separator::{
    algorithm21_check, nearest_local_unitary, nearest_local_unitary_from, operator_schmidt,
    realign, separate_full, split_bipartite, Alg21Mode, Alg21Report, ApproxOutcome,
    SchmidtSpectrum, SeparatorError,
};
pub use spectral::{
    expm_i_hermitian, expm_series, polar_unitary, principal_log_unitary, PrincipalLog,
};
pub use tolerances::Tolerances;
pub use zassenhaus::{
    commutator, multi_term_scalar_tail_check, truncated_product_residual, zassenhaus_terms,
    ScalarTail, ZassenhausTerms,
};
