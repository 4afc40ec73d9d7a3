//! Spectral transcendental functions: exp and log of normal matrices,
//! singular value decomposition and the polar projection onto the unitary
//! group. Backed by nalgebra's complex Schur, symmetric-eigen and SVD
//! kernels behind this crate's matrix type.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::matrix::{ComplexMatrix, MatrixError};
use crate::tolerances::Tolerances;

/// Eigenvalues of a unitary this close to −1 trigger the branch-cut flag on
/// [`principal_log_unitary`].
pub const BRANCH_CUT_PROXIMITY: f64 = 1e-8;

fn to_na(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j))
}

fn from_na(m: &DMatrix<Complex64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues and a unitary
/// matrix of eigenvector columns. The input is symmetrized first so callers
/// only need Hermiticity within tolerance.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), MatrixError> {
    h.ensure_square()?;
    let se = nalgebra::SymmetricEigen::new(to_na(&h.symmetrized()));
    let values = se.eigenvalues.iter().copied().collect();
    Ok((values, from_na(&se.eigenvectors)))
}

/// Eigendecomposition of a unitary (normal) matrix via complex Schur:
/// unit-modulus eigenvalues and a unitary eigenvector matrix.
pub fn unitary_eigen(u: &ComplexMatrix) -> Result<(Vec<Complex64>, ComplexMatrix), MatrixError> {
    u.ensure_square()?;
    let dim = u.rows();
    let schur = nalgebra::Schur::try_new(to_na(u), f64::EPSILON, 0)
        .ok_or(MatrixError::DecompositionFailed("complex Schur"))?;
    let (q, t) = schur.unpack();
    // For a normal matrix T is diagonal up to roundoff; the diagonal holds
    // the eigenvalues in the basis given by Q's columns.
    let mut values = Vec::with_capacity(dim);
    for i in 0..dim {
        let lambda = t[(i, i)];
        let mag = lambda.norm();
        values.push(if mag > 0.0 { lambda / mag } else { Complex64::new(1.0, 0.0) });
    }
    Ok((values, from_na(&q)))
}

fn assemble(v: &ComplexMatrix, diag: &[Complex64]) -> ComplexMatrix {
    let d = ComplexMatrix::diagonal(diag);
    &(v * &d) * &v.adjoint()
}

/// `exp(i·t·h)` for Hermitian `h`, evaluated through the spectral
/// decomposition `h = VΛV†`. The result is unitary by construction.
pub fn expm_i_hermitian(
    h: &ComplexMatrix,
    t: f64,
    tol: &Tolerances,
) -> Result<ComplexMatrix, MatrixError> {
    h.ensure_hermitian(tol)?;
    let (values, v) = hermitian_eigen(h)?;
    let phases: Vec<Complex64> = values
        .iter()
        .map(|&lam| Complex64::new(0.0, t * lam).exp())
        .collect();
    Ok(assemble(&v, &phases))
}

/// Principal logarithm of a unitary.
#[derive(Debug, Clone)]
pub struct PrincipalLog {
    /// Hermitian `H` with `exp(iH) = u` and eigenvalues in `(−π, π]`.
    pub hermitian: ComplexMatrix,
    /// Set when some eigenvalue of `u` lies within [`BRANCH_CUT_PROXIMITY`]
    /// of −1, where the branch choice makes log-based criteria
    /// sufficient-only.
    pub near_branch_cut: bool,
}

/// Hermitian generator of a unitary on the principal branch: eigenphases in
/// `(−π, π]`, with +π chosen for eigenvalue −1.
pub fn principal_log_unitary(
    u: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<PrincipalLog, MatrixError> {
    u.ensure_unitary(tol)?;
    let (values, v) = unitary_eigen(u)?;
    let near_branch_cut = values
        .iter()
        .any(|lam| (lam + Complex64::new(1.0, 0.0)).norm() <= BRANCH_CUT_PROXIMITY);
    // arg() maps onto (−π, π], which is exactly the branch we promise.
    let thetas: Vec<Complex64> = values.iter().map(|lam| Complex64::new(lam.arg(), 0.0)).collect();
    let hermitian = assemble(&v, &thetas).symmetrized();
    Ok(PrincipalLog {
        hermitian,
        near_branch_cut,
    })
}

/// `exp(a)` for an arbitrary square matrix via scaling-and-squaring over the
/// Taylor series. Spectral evaluation is preferred whenever the generator is
/// i·Hermitian; this exists for the general correction terms.
pub fn expm_series(a: &ComplexMatrix) -> Result<ComplexMatrix, MatrixError> {
    let dim = a.ensure_square()?;
    let norm = a.frobenius_norm();
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.scale(Complex64::new((0.5f64).powi(squarings as i32), 0.0));
    let mut result = ComplexMatrix::identity(dim);
    let mut term = ComplexMatrix::identity(dim);
    for k in 1..200 {
        term = (&term * &scaled).scale(Complex64::new(1.0 / k as f64, 0.0));
        result = &result + &term;
        if term.frobenius_norm() <= 1e-18 * result.frobenius_norm().max(1.0) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

/// Singular value decomposition `m = U Σ V†` with values sorted descending.
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v_t: ComplexMatrix,
}

pub fn svd(m: &ComplexMatrix) -> Result<Svd, MatrixError> {
    // Fast path through nalgebra's bidiagonal SVD, verified by
    // reconstruction: on some rank-deficient rectangular complex inputs it
    // returns orthonormal factors that do not multiply back to the input.
    // Those cases fall back to the Jordan-Wielandt embedding, which reduces
    // the SVD to one Hermitian eigenproblem at twice the size.
    if let Some(decomp) = nalgebra::SVD::try_new(to_na(m), true, true, 5.0 * f64::EPSILON, 0) {
        let u = from_na(decomp.u.as_ref().expect("u requested"));
        let v_t = from_na(decomp.v_t.as_ref().expect("v_t requested"));
        let singular_values: Vec<f64> = decomp.singular_values.iter().copied().collect();
        if svd_is_consistent(m, &u, &singular_values, &v_t) {
            return Ok(Svd {
                u,
                singular_values,
                v_t,
            });
        }
    }
    svd_jordan_wielandt(m)
}

fn svd_is_consistent(m: &ComplexMatrix, u: &ComplexMatrix, sigma: &[f64], v_t: &ComplexMatrix) -> bool {
    let k = sigma.len();
    let weighted = ComplexMatrix::from_fn(u.rows(), k, |i, j| u.get(i, j) * sigma[j]);
    let recon = &weighted * v_t;
    (&recon - m).frobenius_norm() <= 1e-10 * m.frobenius_norm().max(1.0)
}

/// SVD through the Hermitian embedding `[[0, m], [m†, 0]]`, whose spectrum
/// is `±σᵢ` plus zeros. Right vectors are re-derived from `m†u/σ` so the
/// triple is consistent by construction; null directions are completed to an
/// orthonormal set.
fn svd_jordan_wielandt(m: &ComplexMatrix) -> Result<Svd, MatrixError> {
    let (rows, cols) = (m.rows(), m.cols());
    let k = rows.min(cols);
    let total = rows + cols;
    let adjoint = m.adjoint();
    let mut embedding = ComplexMatrix::zeros(total, total);
    for i in 0..rows {
        for j in 0..cols {
            embedding[(i, rows + j)] = m.get(i, j);
            embedding[(rows + j, i)] = adjoint.get(j, i);
        }
    }
    let (values, vectors) = hermitian_eigen(&embedding)?;
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).expect("finite eigenvalues"));

    let scale = values[order[0]].abs().max(1e-300);
    let cutoff = scale * 1e-13;
    let mut singular_values = Vec::with_capacity(k);
    let mut u_cols: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    let mut v_cols: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let sigma = values[idx].max(0.0);
        singular_values.push(if sigma > cutoff { sigma } else { 0.0 });
        if sigma <= cutoff {
            continue;
        }
        let mut x: Vec<Complex64> = (0..rows).map(|i| vectors.get(i, idx)).collect();
        let x_norm = x.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        if x_norm <= 1e-150 {
            singular_values.pop();
            singular_values.push(0.0);
            continue;
        }
        for e in x.iter_mut() {
            *e /= x_norm;
        }
        // v = m†u/σ keeps the triple exactly consistent
        let mut y = vec![Complex64::new(0.0, 0.0); cols];
        for (j, slot) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, xi) in x.iter().enumerate() {
                acc += adjoint.get(j, i) * xi;
            }
            *slot = acc / sigma;
        }
        let y_norm = y.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        for e in y.iter_mut() {
            *e /= y_norm.max(1e-300);
        }
        u_cols.push(x);
        v_cols.push(y);
    }
    complete_basis(&mut u_cols, rows, k);
    complete_basis(&mut v_cols, cols, k);

    let u = ComplexMatrix::from_fn(rows, k, |i, j| u_cols[j][i]);
    let v_t = ComplexMatrix::from_fn(k, cols, |i, j| v_cols[i][j].conj());
    Ok(Svd {
        u,
        singular_values,
        v_t,
    })
}

/// Extends a partial orthonormal column set to `want` columns by projecting
/// standard basis vectors.
fn complete_basis(cols: &mut Vec<Vec<Complex64>>, len: usize, want: usize) {
    let mut candidate_idx = 0usize;
    while cols.len() < want && candidate_idx < len {
        let mut candidate = vec![Complex64::new(0.0, 0.0); len];
        candidate[candidate_idx] = Complex64::new(1.0, 0.0);
        candidate_idx += 1;
        for existing in cols.iter() {
            let overlap: Complex64 = existing
                .iter()
                .zip(candidate.iter())
                .map(|(e, cdt)| e.conj() * cdt)
                .sum();
            for (slot, e) in candidate.iter_mut().zip(existing.iter()) {
                *slot -= overlap * e;
            }
        }
        let norm = candidate.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for e in candidate.iter_mut() {
                *e /= norm;
            }
            cols.push(candidate);
        }
    }
}

/// Nearest unitary in Frobenius norm: the unitary polar factor `U V†` of the
/// SVD. Returns the identity for the zero matrix, where every unitary is
/// equally near.
pub fn polar_unitary(m: &ComplexMatrix) -> Result<ComplexMatrix, MatrixError> {
    let dim = m.ensure_square()?;
    if m.frobenius_norm() == 0.0 {
        return Ok(ComplexMatrix::identity(dim));
    }
    let decomp = svd(m)?;
    Ok(&decomp.u * &decomp.v_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::testutil::{assert_close, c};
    use crate::matrix::{dist_up_to_phase, kron, kron_all};
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

    #[test]
    fn expm_zero_hamiltonian() {
        let zero = ComplexMatrix::zeros(3, 3);
        let u = expm_i_hermitian(&zero, 1.7, &tol()).unwrap();
        assert_close(&u, &ComplexMatrix::identity(3), 1e-14, "exp(0)");
    }

    #[test]
    fn expm_sigma_z_quarter_turn() {
        let u = expm_i_hermitian(&sz(), std::f64::consts::FRAC_PI_2, &tol()).unwrap();
        let expected = ComplexMatrix::diagonal(&[c(0.0, 1.0), c(0.0, -1.0)]);
        assert_close(&u, &expected, 1e-14, "exp(i pi/2 Z)");
    }

    #[test]
    fn expm_sigma_x_matches_power_series() {
        // independent oracle: raw Taylor series of exp(i t X) at t = 0.3
        let t = 0.3;
        let mut series = ComplexMatrix::zeros(2, 2);
        let mut term = ComplexMatrix::identity(2);
        for k in 1..60 {
            series = &series + &term;
            term = &term * &sx().scale(c(0.0, t / k as f64));
        }
        let u = expm_i_hermitian(&sx(), t, &tol()).unwrap();
        assert_close(&u, &series, 1e-12, "series oracle");

        // closed form cos(t) I + i sin(t) X
        let closed = &ComplexMatrix::scalar(2, c(t.cos(), 0.0)) + &sx().scale(c(0.0, t.sin()));
        assert_close(&u, &closed, 1e-14, "closed form");
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let m = ComplexMatrix::square_from_pairs(2, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)])
            .unwrap();
        assert!(matches!(
            expm_i_hermitian(&m, 1.0, &tol()),
            Err(MatrixError::NotHermitian { .. })
        ));
    }

    #[test]
    fn principal_log_identity_is_zero() {
        let log = principal_log_unitary(&ComplexMatrix::identity(4), &tol()).unwrap();
        assert!(log.hermitian.frobenius_norm() < 1e-12);
        assert!(!log.near_branch_cut);
    }

    #[test]
    fn principal_log_diagonal_phases() {
        let u = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(0.0, 1.0)]);
        let log = principal_log_unitary(&u, &tol()).unwrap();
        let expected = ComplexMatrix::diagonal(&[c(0.0, 0.0), c(std::f64::consts::FRAC_PI_2, 0.0)]);
        assert_close(&log.hermitian, &expected, 1e-13, "diag(0, pi/2)");
    }

    #[test]
    fn principal_log_round_trip() {
        let h = sy().scale(c(0.4, 0.0));
        let u = expm_i_hermitian(&h, 1.0, &tol()).unwrap();
        let log = principal_log_unitary(&u, &tol()).unwrap();
        assert_close(&log.hermitian, &h, 1e-12, "log(exp(i 0.4 Y))");
    }

    #[test]
    fn principal_log_branch_cut_flag() {
        // eigenvalue exactly −1: phase +π is chosen and the flag fires
        let u = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let log = principal_log_unitary(&u, &tol()).unwrap();
        assert!(log.near_branch_cut);
        assert!((log.hermitian[(1, 1)].re - std::f64::consts::PI).abs() < 1e-12);
        let back = expm_i_hermitian(&log.hermitian, 1.0, &tol()).unwrap();
        assert_close(&back, &u, 1e-12, "round trip through the cut");
    }

    #[test]
    fn principal_log_rejects_non_unitary() {
        let m = ComplexMatrix::scalar(2, c(2.0, 0.0));
        assert!(matches!(
            principal_log_unitary(&m, &tol()),
            Err(MatrixError::NotUnitary { .. })
        ));
    }

    #[test]
    fn expm_series_agrees_with_spectral() {
        let h = &sx().scale(c(0.7, 0.0)) + &sz().scale(c(-0.3, 0.0));
        let spectral = expm_i_hermitian(&h, 1.0, &tol()).unwrap();
        let series = expm_series(&h.scale(c(0.0, 1.0))).unwrap();
        assert_close(&series, &spectral, 1e-13, "series vs spectral");
    }

    #[test]
    fn expm_series_handles_larger_norms() {
        let h = sy().scale(c(5.0, 0.0));
        let series = expm_series(&h.scale(c(0.0, 1.0))).unwrap();
        let spectral = expm_i_hermitian(&h, 1.0, &tol()).unwrap();
        assert_close(&series, &spectral, 1e-11, "scaling and squaring");
    }

    #[test]
    fn polar_projection_recovers_unitary() {
        let u = expm_i_hermitian(&sy(), 0.8, &tol()).unwrap();
        // scale away from the unitary group and project back
        let m = u.scale(c(3.0, 0.0));
        let p = polar_unitary(&m).unwrap();
        assert!(dist_up_to_phase(&p, &u).unwrap() < 1e-12);
        assert!(p.unitary_deviation() < 1e-13);
    }

    #[test]
    fn svd_survives_wide_rank_deficient_inputs() {
        // realignments of many-factor product gates are wide and exactly
        // rank one; the nalgebra fast path miscomputes some of these and the
        // embedding fallback must take over
        use crate::separator::realign;
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let mut rand_u2 = || {
            let h = ComplexMatrix::from_fn(2, 2, |_, _| {
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            })
            .symmetrized();
            expm_i_hermitian(&h, 1.0, &tol()).unwrap()
        };
        for n in [3usize, 4] {
            for _ in 0..10 {
                let factors: Vec<ComplexMatrix> = (0..n).map(|_| rand_u2()).collect();
                let u = kron(&factors[0], &kron_all(&factors[1..]).unwrap()).unwrap();
                let r = realign(&u, 2, u.dim() / 2).unwrap();
                let d = svd(&r).unwrap();
                assert!(
                    (d.singular_values[0] - u.frobenius_norm()).abs() < 1e-10,
                    "sigma1 {} vs norm {}",
                    d.singular_values[0],
                    u.frobenius_norm()
                );
                assert!(d.singular_values[1] < 1e-10);
                let k = d.singular_values.len();
                let sigma = ComplexMatrix::from_fn(k, k, |i, j| {
                    if i == j {
                        c(d.singular_values[i], 0.0)
                    } else {
                        c(0.0, 0.0)
                    }
                });
                let recon = &(&d.u * &sigma) * &d.v_t;
                let err = (&recon - &r).frobenius_norm();
                assert!(err < 1e-10, "reconstruction error {err:.3e}");
            }
        }
    }

    #[test]
    fn svd_fallback_completes_null_directions() {
        // square singular matrix through the embedding path: the polar
        // factor must still come out unitary
        let m = ComplexMatrix::from_fn(3, 3, |i, j| {
            if i == 0 && j == 0 {
                c(2.0, 1.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let d = svd(&m).unwrap();
        assert!((d.singular_values[0] - 5.0f64.sqrt()).abs() < 1e-12);
        assert!(d.singular_values[1] < 1e-12);
        let p = polar_unitary(&m).unwrap();
        assert!(p.unitary_deviation() < 1e-10);
    }

    #[test]
    fn svd_reconstructs_rectangular() {
        let m = kron(&sx(), &ComplexMatrix::identity(2)).unwrap();
        let rect = ComplexMatrix::from_fn(2, 4, |i, j| m.get(i, j) + c(0.1 * (i + j) as f64, 0.05));
        let d = svd(&rect).unwrap();
        let k = 2;
        let sigma = ComplexMatrix::from_fn(k, k, |i, j| {
            if i == j {
                c(d.singular_values[i], 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        // u is 2x2, v_t is 2x4 here (nalgebra's thin SVD)
        let recon = &(&d.u * &sigma) * &d.v_t;
        assert_close(&recon, &rect, 1e-12, "svd reconstruction");
        assert!(d.singular_values[0] >= d.singular_values[1]);
    }
}
