//! Pauli-string sums: the self-adjoint elementary-tensor decomposition of
//! n-qubit Hermitian matrices.
//!
//! Every n-qubit matrix expands uniquely over the 4^n Pauli strings with
//! coefficient `tr(P·m)/2^n`; the coefficients are all real exactly when the
//! matrix is Hermitian, which makes this the standard route from a dense
//! Hamiltonian to a tensor decomposition with Hermitian factors.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::hamiltonian::{TensorDecomposition, TensorTerm};
use crate::matrix::ComplexMatrix;
use crate::tolerances::Tolerances;

/// Coefficients at or below this magnitude are dropped so numeric noise does
/// not inflate the term count.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Imaginary parts above this make a coefficient count as non-real.
pub const HERMITIAN_IM_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum PauliError {
    #[error("matrix dimension {dim} is not 2^{n}")]
    DimensionMismatch { dim: usize, n: usize },
    #[error("string length {got} does not match register size {expected}")]
    StringLength { expected: usize, got: usize },
    #[error("coefficient of {string} has imaginary part {im:.3e}; the sum is not Hermitian")]
    NonHermitian { string: String, im: f64 },
    #[error("register size must be at least 1")]
    EmptyRegister,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    pub const ALL: [PauliLetter; 4] = [PauliLetter::I, PauliLetter::X, PauliLetter::Y, PauliLetter::Z];

    pub fn as_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }

    pub fn from_char(ch: char) -> Option<Self> {
        match ch.to_ascii_uppercase() {
            'I' => Some(PauliLetter::I),
            'X' => Some(PauliLetter::X),
            'Y' => Some(PauliLetter::Y),
            'Z' => Some(PauliLetter::Z),
            _ => None,
        }
    }

    /// Dense 2×2 matrix of the letter.
    pub fn matrix(self) -> ComplexMatrix {
        let e = |re: f64, im: f64| Complex64::new(re, im);
        let entries = match self {
            PauliLetter::I => vec![e(1.0, 0.0), e(0.0, 0.0), e(0.0, 0.0), e(1.0, 0.0)],
            PauliLetter::X => vec![e(0.0, 0.0), e(1.0, 0.0), e(1.0, 0.0), e(0.0, 0.0)],
            PauliLetter::Y => vec![e(0.0, 0.0), e(0.0, -1.0), e(0.0, 1.0), e(0.0, 0.0)],
            PauliLetter::Z => vec![e(1.0, 0.0), e(0.0, 0.0), e(0.0, 0.0), e(-1.0, 0.0)],
        };
        ComplexMatrix::square(2, entries).expect("static 2x2")
    }

    /// Action on a basis bit: whether the bit flips, and the phase picked up.
    fn action(self, bit: bool) -> (bool, Complex64) {
        match self {
            PauliLetter::I => (false, Complex64::new(1.0, 0.0)),
            PauliLetter::X => (true, Complex64::new(1.0, 0.0)),
            PauliLetter::Y => (true, Complex64::new(0.0, if bit { -1.0 } else { 1.0 })),
            PauliLetter::Z => (false, Complex64::new(if bit { -1.0 } else { 1.0 }, 0.0)),
        }
    }
}

/// An n-qubit Pauli string such as `IXZ`; the first letter acts on the most
/// significant index block (subsystem 1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<PauliLetter>);

impl PauliString {
    pub fn new(letters: Vec<PauliLetter>) -> Result<Self, PauliError> {
        if letters.is_empty() {
            return Err(PauliError::EmptyRegister);
        }
        Ok(PauliString(letters))
    }

    pub fn identity(n: usize) -> Result<Self, PauliError> {
        Self::new(vec![PauliLetter::I; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[PauliLetter] {
        &self.0
    }

    pub fn parse(text: &str) -> Result<Self, PauliError> {
        let letters: Option<Vec<_>> = text.chars().map(PauliLetter::from_char).collect();
        match letters {
            Some(v) if !v.is_empty() => Ok(PauliString(v)),
            _ => Err(PauliError::Parse {
                line: 0,
                message: format!("invalid Pauli string {text:?}"),
            }),
        }
    }

    /// Dense 2^n matrix of the full string.
    pub fn matrix(&self) -> ComplexMatrix {
        let n = self.len();
        let dim = 1usize << n;
        let mut out = ComplexMatrix::zeros(dim, dim);
        let (mask, phases) = self.action_table();
        for (col, phase) in phases.iter().enumerate() {
            out[(col ^ mask, col)] = *phase;
        }
        out
    }

    /// The string as a signed permutation: basis column `j` maps to row
    /// `j ^ mask` with the returned phase.
    fn action_table(&self) -> (usize, Vec<Complex64>) {
        let n = self.len();
        let dim = 1usize << n;
        let mut mask = 0usize;
        for (pos, letter) in self.0.iter().enumerate() {
            let (flips, _) = letter.action(false);
            if flips {
                mask |= 1 << (n - 1 - pos);
            }
        }
        let mut phases = Vec::with_capacity(dim);
        for col in 0..dim {
            let mut phase = Complex64::new(1.0, 0.0);
            for (pos, letter) in self.0.iter().enumerate() {
                let bit = (col >> (n - 1 - pos)) & 1 == 1;
                let (_, p) = letter.action(bit);
                phase *= p;
            }
            phases.push(phase);
        }
        (mask, phases)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for letter in &self.0 {
            write!(f, "{}", letter.as_char())?;
        }
        Ok(())
    }
}

/// Linear combination of Pauli strings on a fixed register size, with
/// near-zero coefficients pruned away.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn new(n: usize) -> Result<Self, PauliError> {
        if n == 0 {
            return Err(PauliError::EmptyRegister);
        }
        Ok(PauliSum {
            n,
            terms: BTreeMap::new(),
        })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coeff · string`, pruning the entry if the total lands at or
    /// below [`PRUNE_THRESHOLD`].
    pub fn add(&mut self, string: PauliString, coeff: Complex64) -> Result<(), PauliError> {
        if string.len() != self.n {
            return Err(PauliError::StringLength {
                expected: self.n,
                got: string.len(),
            });
        }
        let total = self.terms.get(&string).copied().unwrap_or_default() + coeff;
        if total.norm() <= PRUNE_THRESHOLD {
            self.terms.remove(&string);
        } else {
            self.terms.insert(string, total);
        }
        Ok(())
    }

    pub fn coefficient(&self, string: &PauliString) -> Complex64 {
        self.terms.get(string).copied().unwrap_or_default()
    }

    /// Terms in lexicographic string order.
    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, Complex64)> {
        self.terms.iter().map(|(s, &c)| (s, c))
    }

    /// True when every coefficient is real within [`HERMITIAN_IM_TOL`].
    pub fn is_hermitian(&self) -> bool {
        self.terms.values().all(|c| c.im.abs() <= HERMITIAN_IM_TOL)
    }

    /// Parses the shared text format: one `<real-coeff> <letters>` term per
    /// line, `#` comments and blank lines allowed.
    pub fn parse_text(text: &str) -> Result<Self, PauliError> {
        let mut sum: Option<PauliSum> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut parts = content.split_whitespace();
            let coeff_text = parts.next().ok_or_else(|| PauliError::Parse {
                line,
                message: "missing coefficient".into(),
            })?;
            let string_text = parts.next().ok_or_else(|| PauliError::Parse {
                line,
                message: "missing Pauli string".into(),
            })?;
            if parts.next().is_some() {
                return Err(PauliError::Parse {
                    line,
                    message: "expected exactly `<coeff> <letters>`".into(),
                });
            }
            let coeff: f64 = coeff_text.parse().map_err(|_| PauliError::Parse {
                line,
                message: format!("invalid coefficient {coeff_text:?}"),
            })?;
            let string = PauliString::parse(string_text).map_err(|_| PauliError::Parse {
                line,
                message: format!("invalid Pauli string {string_text:?}"),
            })?;
            let sum = match &mut sum {
                Some(s) => s,
                None => {
                    sum = Some(PauliSum::new(string.len())?);
                    sum.as_mut().unwrap()
                }
            };
            sum.add(string, Complex64::new(coeff, 0.0))
                .map_err(|e| PauliError::Parse {
                    line,
                    message: e.to_string(),
                })?;
        }
        sum.ok_or(PauliError::Parse {
            line: 0,
            message: "no terms found".into(),
        })
    }

    /// Emits the text format; fails when some coefficient is not real.
    pub fn to_text(&self) -> Result<String, PauliError> {
        let mut out = String::new();
        for (string, coeff) in self.terms() {
            if coeff.im.abs() > HERMITIAN_IM_TOL {
                return Err(PauliError::NonHermitian {
                    string: string.to_string(),
                    im: coeff.im,
                });
            }
            out.push_str(&format!("{:.12e} {}\n", coeff.re, string));
        }
        Ok(out)
    }
}

/// Expands a `2^n` matrix over the Pauli basis: the coefficient of string
/// `P` is `tr(P·m)/2^n`.
pub fn decompose(m: &ComplexMatrix, n: usize) -> Result<PauliSum, PauliError> {
    if n == 0 {
        return Err(PauliError::EmptyRegister);
    }
    let dim = 1usize
        .checked_shl(n as u32)
        .ok_or(PauliError::DimensionMismatch { dim: usize::MAX, n })?;
    if !m.is_square() || m.rows() != dim {
        return Err(PauliError::DimensionMismatch { dim: m.rows(), n });
    }
    let mut sum = PauliSum::new(n)?;
    let mut letters = vec![PauliLetter::I; n];
    decompose_rec(m, n, dim, 0, &mut letters, &mut sum)?;
    Ok(sum)
}

fn decompose_rec(
    m: &ComplexMatrix,
    n: usize,
    dim: usize,
    pos: usize,
    letters: &mut Vec<PauliLetter>,
    sum: &mut PauliSum,
) -> Result<(), PauliError> {
    if pos == n {
        let string = PauliString::new(letters.clone())?;
        let (mask, phases) = string.action_table();
        // tr(P·m) = Σ_j phase(j) · m[j, j^mask]
        let mut tr = Complex64::new(0.0, 0.0);
        for (col, phase) in phases.iter().enumerate() {
            tr += phase * m.get(col, col ^ mask);
        }
        sum.add(string, tr / dim as f64)?;
        return Ok(());
    }
    for letter in PauliLetter::ALL {
        letters[pos] = letter;
        decompose_rec(m, n, dim, pos + 1, letters, sum)?;
    }
    letters[pos] = PauliLetter::I;
    Ok(())
}

/// Dense matrix of the sum; the exact linear combination of its strings.
pub fn synthesize(p: &PauliSum) -> ComplexMatrix {
    let dim = 1usize << p.n;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (string, coeff) in p.terms() {
        let (mask, phases) = string.action_table();
        for (col, phase) in phases.iter().enumerate() {
            out[(col ^ mask, col)] += coeff * phase;
        }
    }
    out
}

/// Turns a Hermitian Pauli sum into an explicit tensor decomposition: one
/// term per string, 2×2 factors, with the real coefficient absorbed into the
/// first factor.
pub fn to_tensor_decomposition(
    p: &PauliSum,
    tol: &Tolerances,
) -> Result<TensorDecomposition, PauliError> {
    let mut terms = Vec::with_capacity(p.len());
    for (string, coeff) in p.terms() {
        if coeff.im.abs() > HERMITIAN_IM_TOL {
            return Err(PauliError::NonHermitian {
                string: string.to_string(),
                im: coeff.im,
            });
        }
        let factors: Vec<ComplexMatrix> = string
            .letters()
            .iter()
            .enumerate()
            .map(|(idx, letter)| {
                let m = letter.matrix();
                if idx == 0 {
                    m.scale(Complex64::new(coeff.re, 0.0))
                } else {
                    m
                }
            })
            .collect();
        let term = TensorTerm::new(factors, tol).map_err(|e| PauliError::Parse {
            line: 0,
            message: format!("tensor term from {string}: {e}"),
        })?;
        terms.push(term);
    }
    if terms.is_empty() {
        // the zero matrix still has a decomposition: 0 · I…I
        let factors = vec![PauliLetter::I.matrix().scale(Complex64::new(0.0, 0.0))]
            .into_iter()
            .chain((1..p.n).map(|_| PauliLetter::I.matrix()))
            .collect();
        terms.push(TensorTerm::new(factors, tol).expect("identity factors"));
    }
    TensorDecomposition::new(vec![2; p.n], terms, 1.0).map_err(|e| PauliError::Parse {
        line: 0,
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::testutil::{assert_close, c};
    use crate::matrix::{kron, kron_all};

    fn cnot() -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(0, 0)] = c(1.0, 0.0);
        m[(1, 1)] = c(1.0, 0.0);
        m[(2, 3)] = c(1.0, 0.0);
        m[(3, 2)] = c(1.0, 0.0);
        m
    }

    fn string(text: &str) -> PauliString {
        PauliString::parse(text).unwrap()
    }

    #[test]
    fn letter_matrices_match_kron_strings() {
        // the fast signed-permutation path must agree with dense kron
        for letters in ["XZ", "YI", "ZY", "XX", "IYX"] {
            let s = string(letters);
            let dense = kron_all(
                &s.letters().iter().map(|l| l.matrix()).collect::<Vec<_>>(),
            )
            .unwrap();
            assert_close(&s.matrix(), &dense, 1e-15, letters);
        }
    }

    #[test]
    fn decompose_identity() {
        let sum = decompose(&ComplexMatrix::identity(4), 2).unwrap();
        assert_eq!(sum.len(), 1);
        assert_eq!(sum.coefficient(&string("II")), c(1.0, 0.0));
    }

    #[test]
    fn decompose_spin_x_hamiltonian() {
        let hx = &kron(&PauliLetter::I.matrix(), &PauliLetter::X.matrix()).unwrap()
            + &kron(&PauliLetter::X.matrix(), &PauliLetter::I.matrix()).unwrap();
        let sum = decompose(&hx, 2).unwrap();
        assert_eq!(sum.len(), 2);
        assert!((sum.coefficient(&string("IX")) - c(1.0, 0.0)).norm() < 1e-14);
        assert!((sum.coefficient(&string("XI")) - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn decompose_cnot_oracle() {
        // brute-force oracle: coefficients from dense trace inner products
        let gate = cnot();
        let sum = decompose(&gate, 2).unwrap();
        let mut expected = Vec::new();
        for a in PauliLetter::ALL {
            for b in PauliLetter::ALL {
                let p = kron(&a.matrix(), &b.matrix()).unwrap();
                let coeff = (&p * &gate).trace() / 4.0;
                if coeff.norm() > PRUNE_THRESHOLD {
                    expected.push((format!("{}{}", a.as_char(), b.as_char()), coeff));
                }
            }
        }
        assert_eq!(expected.len(), 4);
        assert_eq!(sum.len(), 4);
        for (name, coeff) in expected {
            assert!(
                (sum.coefficient(&string(&name)) - coeff).norm() < 1e-14,
                "{name}"
            );
        }
        // the known closed form: (II + IX + ZI − ZX)/2
        assert!((sum.coefficient(&string("II")) - c(0.5, 0.0)).norm() < 1e-14);
        assert!((sum.coefficient(&string("IX")) - c(0.5, 0.0)).norm() < 1e-14);
        assert!((sum.coefficient(&string("ZI")) - c(0.5, 0.0)).norm() < 1e-14);
        assert!((sum.coefficient(&string("ZX")) - c(-0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn synthesize_zz_is_diagonal() {
        let mut sum = PauliSum::new(2).unwrap();
        sum.add(string("ZZ"), c(1.0, 0.0)).unwrap();
        let m = synthesize(&sum);
        let expected =
            ComplexMatrix::diagonal(&[c(1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]);
        assert_close(&m, &expected, 0.0, "ZZ");
    }

    #[test]
    fn round_trip_random_hermitian() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let raw = ComplexMatrix::from_fn(8, 8, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let h = raw.symmetrized();
        let sum = decompose(&h, 3).unwrap();
        assert!(sum.is_hermitian());
        assert_close(&synthesize(&sum), &h, 1e-12, "synthesize(decompose(h))");
    }

    #[test]
    fn tensor_decomposition_from_strings() {
        let tol = Tolerances::default();
        let mut sum = PauliSum::new(2).unwrap();
        sum.add(string("IX"), c(1.0, 0.0)).unwrap();
        sum.add(string("XI"), c(1.0, 0.0)).unwrap();
        let d = to_tensor_decomposition(&sum, &tol).unwrap();
        assert_eq!(d.terms().len(), 2);
        // BTreeMap order: IX before XI
        assert_close(
            &d.terms()[0].factors()[0],
            &PauliLetter::I.matrix(),
            1e-15,
            "IX first factor",
        );
        assert_close(
            &d.terms()[0].factors()[1],
            &PauliLetter::X.matrix(),
            1e-15,
            "IX second factor",
        );
        assert_close(
            &d.terms()[1].factors()[0],
            &PauliLetter::X.matrix(),
            1e-15,
            "XI first factor",
        );

        // scalar absorbed into the first factor
        let mut scaled = PauliSum::new(2).unwrap();
        scaled.add(string("II"), c(2.5, 0.0)).unwrap();
        let d = to_tensor_decomposition(&scaled, &tol).unwrap();
        assert_close(
            &d.terms()[0].factors()[0],
            &ComplexMatrix::scalar(2, c(2.5, 0.0)),
            1e-15,
            "2.5 I",
        );

        // CNOT expands into four terms
        let d = to_tensor_decomposition(&decompose(&cnot(), 2).unwrap(), &tol).unwrap();
        assert_eq!(d.terms().len(), 4);
        assert_close(&d.hamiltonian().unwrap(), &cnot(), 1e-13, "CNOT rebuilt");
    }

    #[test]
    fn non_hermitian_rejected_for_tensor_terms() {
        let tol = Tolerances::default();
        // i·X is not Hermitian: coefficient picks up an imaginary part
        let m = PauliLetter::X.matrix().scale(c(0.0, 1.0));
        let padded = kron(&m, &PauliLetter::I.matrix()).unwrap();
        let sum = decompose(&padded, 2).unwrap();
        assert!(!sum.is_hermitian());
        assert!(matches!(
            to_tensor_decomposition(&sum, &tol),
            Err(PauliError::NonHermitian { .. })
        ));
    }

    #[test]
    fn text_format_round_trip() {
        let text = "# spin chain\n1.0 IX\n1.0 XI\n-0.25 ZZ\n";
        let sum = PauliSum::parse_text(text).unwrap();
        assert_eq!(sum.len(), 3);
        let emitted = sum.to_text().unwrap();
        let reparsed = PauliSum::parse_text(&emitted).unwrap();
        assert_eq!(sum, reparsed);
    }

    #[test]
    fn text_format_errors_carry_line_numbers() {
        let err = PauliSum::parse_text("1.0 IX\nbogus line here\n").unwrap_err();
        match err {
            PauliError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
        let err = PauliSum::parse_text("1.0 IX\n2.0 IXZ\n").unwrap_err();
        match err {
            PauliError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn pruning_drops_cancelled_terms() {
        let mut sum = PauliSum::new(1).unwrap();
        sum.add(string("X"), c(1.0, 0.0)).unwrap();
        sum.add(string("X"), c(-1.0, 0.0)).unwrap();
        assert!(sum.is_empty());
    }
}
