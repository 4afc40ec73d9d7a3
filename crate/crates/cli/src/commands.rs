//! Subcommand dispatch. Exit codes are a stable contract: 0 for a separable
//! verdict or successful conversion, 1 for a negative or undecided verdict,
//! 2 for I/O, parse or contract errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use gatesep_core::{
    algorithm21_check, check_commuting_sum, check_rank_one, decompose, multi_term_scalar_tail_check,
    nearest_local_unitary, principal_log_unitary, separate_by_regrouping, separate_full,
    synthesize, synthesize_commuting_sum, synthesize_rank_one, to_tensor_decomposition,
    truncated_product_residual, zassenhaus_terms, Alg21Mode, ComplexMatrix, CriterionReason,
    CriterionReport, PauliSum, SchmidtSpectrum, SeparationResult, SeparatorError, Tolerances,
};

use crate::formats::{
    emit_matrix, emit_tensor_terms, format_float, parse_matrix, parse_tensor_terms, FormatError,
};
use crate::verdict::{Method, Verdict, VerdictKind};

pub const EXIT_SEPARABLE: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Decide and synthesize tensor-product separations of quantum gates.
#[derive(Parser, Debug)]
#[command(name = "gatesep", version, about)]
pub struct Cli {
    /// Override the Hermiticity tolerance (relative to the Frobenius norm).
    #[arg(long, global = true)]
    pub tol_hermitian: Option<f64>,
    /// Override the unitarity tolerance.
    #[arg(long, global = true)]
    pub tol_unitary: Option<f64>,
    /// Override the scalar-matrix tolerance.
    #[arg(long, global = true)]
    pub tol_scalar: Option<f64>,
    /// Override the Schmidt rank-one tolerance.
    #[arg(long, global = true)]
    pub tol_schmidt: Option<f64>,
    /// Emit verdicts as single-line JSON instead of the text document.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide separability from a Hamiltonian tensor-term file.
    ///
    /// Single-term files run the rank-one criterion; multi-term files run
    /// the commuting-sum check and fall back to per-subsystem regrouping
    /// when the terms fail to commute pairwise.
    CheckH {
        /// Tensor-term file (`dims`/`t` header, then `term` blocks).
        file: PathBuf,
    },
    /// Decide separability of a unitary from a matrix file.
    CheckU {
        /// Matrix file (`dim <d>` header, then rows of complex entries).
        file: PathBuf,
        /// Comma-separated subsystem dimensions; defaults to qubits.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        /// oracle: operator-Schmidt peeling (authoritative).
        /// alg21 / alg21-paper: structural checker on the principal log.
        #[arg(long, value_enum, default_value_t = CheckUMode::Oracle)]
        mode: CheckUMode,
        /// Also report the Schmidt spectrum across every prefix cut.
        #[arg(long)]
        all_cuts: bool,
    },
    /// Nearest local unitary by alternating polar refinement.
    Approx {
        file: PathBuf,
        /// Comma-separated subsystem dimensions; defaults to qubits.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long, default_value_t = 200)]
        max_iters: usize,
        /// Relative improvement below which the refinement stops.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Extra refinement passes from random starting factors; the best
        /// local optimum wins. Degenerate gates stall the default start.
        #[arg(long, default_value_t = 0)]
        restarts: usize,
        /// Seed for the restart starting points.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Convert between dense matrices, Pauli-sum text and tensor-term files.
    Pauli {
        /// Matrix file or Pauli-sum text (auto-detected).
        file: PathBuf,
        #[arg(long, value_enum)]
        to: PauliTarget,
    },
    /// Product-formula diagnostics: correction norms, truncation residual
    /// and the scalar-tail test on two or more matrix files.
    Zassenhaus {
        /// Matrix files holding the exponents, in product order.
        files: Vec<PathBuf>,
    },
    /// Run one command line per manifest line; results are independent.
    Batch { manifest: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckUMode {
    Oracle,
    Alg21,
    Alg21Paper,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliTarget {
    Pauli,
    Matrix,
    Terms,
}

struct Ctx {
    tol: Tolerances,
    json: bool,
}

impl Cli {
    fn context(&self) -> Result<Ctx, FormatError> {
        let mut tol = Tolerances::default();
        if let Some(v) = self.tol_hermitian {
            tol.tol_hermitian = v;
        }
        if let Some(v) = self.tol_unitary {
            tol.tol_unitary = v;
        }
        if let Some(v) = self.tol_scalar {
            tol.tol_scalar = v;
        }
        if let Some(v) = self.tol_schmidt {
            tol.tol_schmidt = v;
        }
        tol.validate()
            .map_err(|e| FormatError::Contract(e.to_string()))?;
        Ok(Ctx {
            tol,
            json: self.json,
        })
    }
}

/// Full dispatch; everything written through `out`/`err` so tests can
/// capture it. Returns the process exit code.
pub fn run(cli: Cli, out: &mut String, err: &mut String) -> i32 {
    let ctx = match cli.context() {
        Ok(ctx) => ctx,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ERROR;
        }
    };
    let result = match cli.command {
        Command::CheckH { ref file } => cmd_check_h(file, &ctx),
        Command::CheckU {
            ref file,
            ref dims,
            mode,
            all_cuts,
        } => cmd_check_u(file, dims.as_deref(), mode, all_cuts, &ctx),
        Command::Approx {
            ref file,
            ref dims,
            max_iters,
            tol,
            restarts,
            seed,
        } => cmd_approx(file, dims.as_deref(), max_iters, tol, restarts, seed, &ctx),
        Command::Pauli { ref file, to } => {
            return flush_text(cmd_pauli(file, to, &ctx), out, err)
        }
        Command::Zassenhaus { ref files } => {
            return flush_text(cmd_zassenhaus(files, &ctx), out, err)
        }
        Command::Batch { ref manifest } => return cmd_batch(manifest, &cli, out, err),
    };
    match result {
        Ok((verdict, code)) => {
            if ctx.json {
                let _ = writeln!(out, "{}", verdict.emit_json());
            } else {
                let _ = write!(out, "{}", verdict.emit_text());
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn flush_text(result: Result<(String, i32), FormatError>, out: &mut String, err: &mut String) -> i32 {
    match result {
        Ok((text, code)) => {
            let _ = write!(out, "{text}");
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn read_file(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(FormatError::Io)
}

fn one_based(indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|i| i + 1).collect()
}

fn push_report_warnings(verdict: &mut Verdict, report: &CriterionReport) {
    for warning in &report.warnings {
        verdict.warnings.push(warning.to_string());
    }
}

fn attach_result(verdict: &mut Verdict, result: &SeparationResult) {
    verdict.factors = result.local_factors.clone();
    verdict.global_phase = Some(result.global_phase);
    verdict.residual = Some(result.residual);
}

fn cmd_check_h(path: &Path, ctx: &Ctx) -> Result<(Verdict, i32), FormatError> {
    let parsed = parse_tensor_terms(&read_file(path)?)?;
    let d = parsed.into_decomposition(&ctx.tol)?;

    if d.terms().len() == 1 {
        let term = &d.terms()[0];
        let report = check_rank_one(term, &ctx.tol);
        if report.separable {
            match synthesize_rank_one(term, d.t(), &ctx.tol) {
                Ok(result) => {
                    let mut verdict = Verdict::new(VerdictKind::Separable, Method::RankOne);
                    attach_result(&mut verdict, &result);
                    push_report_warnings(&mut verdict, &report);
                    Ok((verdict, EXIT_SEPARABLE))
                }
                Err(e) => {
                    let mut verdict = Verdict::new(VerdictKind::Borderline, Method::RankOne);
                    verdict.warnings.push(format!("synthesis failed: {e}"));
                    push_report_warnings(&mut verdict, &report);
                    Ok((verdict, EXIT_NEGATIVE))
                }
            }
        } else {
            let mut verdict = Verdict::new(VerdictKind::NotSeparable, Method::RankOne);
            verdict.warnings.push(format!(
                "factors {:?} of the single term are all non-scalar; at most one may be",
                one_based(&report.offending_factor_indices)
            ));
            verdict.warnings.push(
                "the verdict is about this generator presentation; isolated t values can \
                 still produce a product gate (see check-u --mode oracle)"
                    .into(),
            );
            push_report_warnings(&mut verdict, &report);
            Ok((verdict, EXIT_NEGATIVE))
        }
    } else {
        let report = check_commuting_sum(&d, &ctx.tol)
            .map_err(|e| FormatError::Contract(e.to_string()))?;
        match report.reason {
            CriterionReason::CommutingSumOk => {
                match synthesize_commuting_sum(&d, &ctx.tol) {
                    Ok(result) => {
                        let mut verdict =
                            Verdict::new(VerdictKind::Separable, Method::CommutingSum);
                        attach_result(&mut verdict, &result);
                        push_report_warnings(&mut verdict, &report);
                        Ok((verdict, EXIT_SEPARABLE))
                    }
                    Err(e) => {
                        let mut verdict =
                            Verdict::new(VerdictKind::Borderline, Method::CommutingSum);
                        verdict.warnings.push(format!("synthesis failed: {e}"));
                        Ok((verdict, EXIT_NEGATIVE))
                    }
                }
            }
            CriterionReason::NoncommutingTerms => match separate_by_regrouping(&d, &ctx.tol) {
                Ok(result) => {
                    let mut verdict = Verdict::new(VerdictKind::Separable, Method::Regrouping);
                    attach_result(&mut verdict, &result);
                    verdict.warnings.push(format!(
                        "terms {:?} do not pairwise commute; separated by regrouping the \
                         one-local generators per subsystem",
                        one_based(&report.offending_term_indices)
                    ));
                    push_report_warnings(&mut verdict, &report);
                    Ok((verdict, EXIT_SEPARABLE))
                }
                Err(e) => {
                    let mut verdict = Verdict::new(VerdictKind::NotApplicable, Method::Regrouping);
                    verdict.warnings.push(format!(
                        "terms {:?} do not pairwise commute and regrouping failed: {e}",
                        one_based(&report.offending_term_indices)
                    ));
                    verdict
                        .warnings
                        .push("the sufficient criteria do not decide this input".into());
                    Ok((verdict, EXIT_NEGATIVE))
                }
            },
            CriterionReason::MultiScalarViolation => {
                let mut verdict = Verdict::new(VerdictKind::NotApplicable, Method::CommutingSum);
                verdict.warnings.push(format!(
                    "terms {:?} have two or more non-scalar factors; the sufficient criteria \
                     do not apply (first offender: term {}, factors {:?})",
                    one_based(&report.offending_term_indices),
                    report.offending_term_indices.first().map_or(0, |i| i + 1),
                    one_based(&report.offending_factor_indices)
                ));
                verdict.warnings.push(
                    "synthesize the gate and try check-u --mode oracle for a \
                     presentation-free verdict"
                        .into(),
                );
                push_report_warnings(&mut verdict, &report);
                Ok((verdict, EXIT_NEGATIVE))
            }
            CriterionReason::RankOneOk => unreachable!("multi-term analysis"),
        }
    }
}

fn qubit_dims(dim: usize) -> Option<Vec<usize>> {
    if !dim.is_power_of_two() || dim < 2 {
        return None;
    }
    Some(vec![2; dim.trailing_zeros() as usize])
}

fn resolve_dims(dim: usize, dims: Option<&[usize]>) -> Result<Vec<usize>, FormatError> {
    match dims {
        Some(list) => {
            let product: usize = list.iter().product();
            if product != dim || list.is_empty() {
                return Err(FormatError::Contract(format!(
                    "--dims {list:?} do not multiply to the gate dimension {dim}"
                )));
            }
            Ok(list.to_vec())
        }
        None => qubit_dims(dim).ok_or_else(|| {
            FormatError::Contract(format!(
                "dimension {dim} is not a power of two; supply --dims explicitly"
            ))
        }),
    }
}

fn branch_cut_warning() -> String {
    "an eigenvalue of the gate lies within 1e-8 of -1: the principal logarithm sits on \
     its branch cut and generator-based criteria are sufficient-only here"
        .into()
}

fn spectrum_summary(spectrum: &SchmidtSpectrum) -> String {
    spectrum
        .singular_values
        .iter()
        .map(|&s| format_float(s))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_check_u(
    path: &Path,
    dims: Option<&[usize]>,
    mode: CheckUMode,
    all_cuts: bool,
    ctx: &Ctx,
) -> Result<(Verdict, i32), FormatError> {
    let u = parse_matrix(&read_file(path)?)?;
    u.ensure_unitary(&ctx.tol)
        .map_err(|e| FormatError::Contract(e.to_string()))?;
    let dims = resolve_dims(u.dim(), dims)?;

    match mode {
        CheckUMode::Oracle => {
            let log = principal_log_unitary(&u, &ctx.tol)
                .map_err(|e| FormatError::Contract(e.to_string()))?;
            let mut extra_warnings = Vec::new();
            if log.near_branch_cut {
                extra_warnings.push(branch_cut_warning());
            }
            if all_cuts {
                if let Ok(cuts) = gatesep_core::separator::schmidt_prefix_cuts(&u, &dims) {
                    for (idx, spectrum) in cuts.iter().enumerate() {
                        extra_warnings.push(format!(
                            "cut {} ({}|{}): spectrum {}",
                            idx + 1,
                            spectrum.left_dim,
                            spectrum.right_dim,
                            spectrum_summary(spectrum)
                        ));
                    }
                }
            }
            match separate_full(&u, &dims, &ctx.tol) {
                Ok(result) => {
                    let mut verdict = Verdict::new(VerdictKind::Separable, Method::SchmidtOracle);
                    attach_result(&mut verdict, &result);
                    verdict.warnings.extend(extra_warnings);
                    Ok((verdict, EXIT_SEPARABLE))
                }
                Err(SeparatorError::NotSeparable { cut, spectrum, .. }) => {
                    let mut verdict =
                        Verdict::new(VerdictKind::NotSeparable, Method::SchmidtOracle);
                    verdict.schmidt_spectrum = Some(spectrum.singular_values.clone());
                    verdict
                        .warnings
                        .push(format!("blocked at cut {} ({}|{})", cut + 1, spectrum.left_dim, spectrum.right_dim));
                    verdict.warnings.extend(extra_warnings);
                    Ok((verdict, EXIT_NEGATIVE))
                }
                Err(SeparatorError::Borderline { cut, spectrum, detail }) => {
                    let mut verdict = Verdict::new(VerdictKind::Borderline, Method::SchmidtOracle);
                    verdict.schmidt_spectrum = Some(spectrum.singular_values.clone());
                    verdict
                        .warnings
                        .push(format!("cut {}: {detail}", cut + 1));
                    verdict.warnings.extend(extra_warnings);
                    Ok((verdict, EXIT_NEGATIVE))
                }
                Err(e) => Err(FormatError::Contract(e.to_string())),
            }
        }
        CheckUMode::Alg21 | CheckUMode::Alg21Paper => {
            let n_qubits = qubit_dims(u.dim())
                .map(|d| d.len())
                .ok_or_else(|| {
                    FormatError::Contract(format!(
                        "dimension {} is not a power of two; the structural checker needs qubits",
                        u.dim()
                    ))
                })?;
            let (alg_mode, method) = match mode {
                CheckUMode::Alg21 => (Alg21Mode::Corrected, Method::Alg21Corrected),
                CheckUMode::Alg21Paper => (Alg21Mode::PaperFaithful, Method::Alg21Paper),
                CheckUMode::Oracle => unreachable!(),
            };
            let report = algorithm21_check(&u, n_qubits, alg_mode, &ctx.tol)
                .map_err(|e| FormatError::Contract(e.to_string()))?;
            let kind = if report.status {
                VerdictKind::Separable
            } else {
                VerdictKind::NotSeparable
            };
            let mut verdict = Verdict::new(kind, method);
            if let Some(idx) = report.non_identity_index {
                verdict
                    .warnings
                    .push(format!("non-identity action on subsystem {}", idx + 1));
            }
            if report.near_branch_cut {
                verdict.warnings.push(branch_cut_warning());
            }
            match alg_mode {
                Alg21Mode::Corrected => {
                    if !report.status {
                        verdict.warnings.push(
                            "the structural checker recognizes only gates acting on a single \
                             subsystem; a negative answer is not a proof (try --mode oracle)"
                                .into(),
                        );
                    }
                }
                Alg21Mode::PaperFaithful => {
                    verdict.warnings.push(
                        "literal mode reproduces the original pseudocode verbatim, including \
                         its inconsistent status polarity; prefer --mode alg21 or oracle"
                            .into(),
                    );
                }
            }
            let code = if report.status {
                EXIT_SEPARABLE
            } else {
                EXIT_NEGATIVE
            };
            Ok((verdict, code))
        }
    }
}

fn random_local_unitaries(
    dims: &[usize],
    rng: &mut rand_chacha::ChaCha8Rng,
    tol: &Tolerances,
) -> Vec<ComplexMatrix> {
    use rand::Rng;
    dims.iter()
        .map(|&d| {
            let h = ComplexMatrix::from_fn(d, d, |_, _| {
                gatesep_core::Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            })
            .symmetrized();
            gatesep_core::expm_i_hermitian(&h, 1.0, tol).expect("random generator is Hermitian")
        })
        .collect()
}

fn cmd_approx(
    path: &Path,
    dims: Option<&[usize]>,
    max_iters: usize,
    rel_tol: f64,
    restarts: usize,
    seed: u64,
    ctx: &Ctx,
) -> Result<(Verdict, i32), FormatError> {
    use rand::SeedableRng;
    let u = parse_matrix(&read_file(path)?)?;
    u.ensure_unitary(&ctx.tol)
        .map_err(|e| FormatError::Contract(e.to_string()))?;
    let dims = resolve_dims(u.dim(), dims)?;
    let mut outcome = nearest_local_unitary(&u, &dims, max_iters, rel_tol, &ctx.tol)
        .map_err(|e| FormatError::Contract(e.to_string()))?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts {
        let init = random_local_unitaries(&dims, &mut rng, &ctx.tol);
        let candidate =
            gatesep_core::nearest_local_unitary_from(&u, &dims, init, max_iters, rel_tol, &ctx.tol)
                .map_err(|e| FormatError::Contract(e.to_string()))?;
        if candidate.result.residual < outcome.result.residual {
            outcome = candidate;
        }
    }

    let exact = outcome.result.residual <= ctx.tol.tol_unitary * u.dim() as f64;
    let kind = if exact {
        VerdictKind::Separable
    } else {
        VerdictKind::NotApplicable
    };
    let mut verdict = Verdict::new(kind, Method::Approx);
    attach_result(&mut verdict, &outcome.result);
    verdict.warnings.push(format!(
        "alternating refinement: {} sweeps, converged = {}, objective {} -> {}",
        outcome.iterations,
        outcome.converged,
        format_float(*outcome.objective_history.first().unwrap_or(&f64::NAN)),
        format_float(*outcome.objective_history.last().unwrap_or(&f64::NAN)),
    ));
    if !exact {
        verdict.warnings.push(
            "the residual is the best found local optimum, a distance rather than a \
             separability verdict"
                .into(),
        );
    }
    Ok((verdict, EXIT_SEPARABLE))
}

/// Whether the document looks like a matrix file rather than Pauli text.
fn looks_like_matrix(text: &str) -> bool {
    text.lines()
        .map(|raw| raw.split('#').next().unwrap_or("").trim())
        .find(|content| !content.is_empty())
        .is_some_and(|content| content.starts_with("dim "))
}

fn cmd_pauli(path: &Path, target: PauliTarget, ctx: &Ctx) -> Result<(String, i32), FormatError> {
    let text = read_file(path)?;
    let sum = if looks_like_matrix(&text) {
        let m = parse_matrix(&text)?;
        let dim = m.dim();
        let n = qubit_dims(dim).map(|d| d.len()).ok_or_else(|| {
            FormatError::Contract(format!("dimension {dim} is not a power of two"))
        })?;
        decompose(&m, n).map_err(|e| FormatError::Contract(e.to_string()))?
    } else {
        PauliSum::parse_text(&text).map_err(|e| FormatError::Contract(e.to_string()))?
    };

    let out = match target {
        PauliTarget::Pauli => sum
            .to_text()
            .map_err(|e| FormatError::Contract(e.to_string()))?,
        PauliTarget::Matrix => emit_matrix(&synthesize(&sum)),
        PauliTarget::Terms => {
            let d = to_tensor_decomposition(&sum, &ctx.tol)
                .map_err(|e| FormatError::Contract(e.to_string()))?;
            emit_tensor_terms(&d)
        }
    };
    Ok((out, EXIT_SEPARABLE))
}

fn cmd_zassenhaus(files: &[PathBuf], ctx: &Ctx) -> Result<(String, i32), FormatError> {
    if files.len() < 2 {
        return Err(FormatError::Contract(
            "provide at least two matrix files (the exponents, in product order)".into(),
        ));
    }
    let matrices: Vec<ComplexMatrix> = files
        .iter()
        .map(|f| parse_matrix(&read_file(f)?))
        .collect::<Result<_, _>>()?;
    let dim = matrices[0].dim();
    if matrices.iter().any(|m| m.dim() != dim) {
        return Err(FormatError::Contract(
            "all exponent matrices must share one dimension".into(),
        ));
    }

    let mut doc: Vec<(String, String)> = Vec::new();
    if matrices.len() == 2 {
        let terms = zassenhaus_terms(&matrices[0], &matrices[1])
            .map_err(|e| FormatError::Contract(e.to_string()))?;
        let residual = truncated_product_residual(&matrices[0], &matrices[1])
            .map_err(|e| FormatError::Contract(e.to_string()))?;
        doc.push(("c2_norm".into(), format_float(terms.c2.frobenius_norm())));
        doc.push(("c3_norm".into(), format_float(terms.c3.frobenius_norm())));
        doc.push(("truncated_product_residual".into(), format_float(residual)));
    }
    let tail = multi_term_scalar_tail_check(&matrices, &ctx.tol)
        .map_err(|e| FormatError::Contract(e.to_string()))?;
    doc.push(("scalar_tail".into(), tail.is_scalar.to_string()));
    if let Some(lambda) = tail.lambda {
        doc.push((
            "lambda".into(),
            format!("{} {}", format_float(lambda.re), format_float(lambda.im)),
        ));
    }

    let text = if ctx.json {
        let map: serde_json::Map<String, serde_json::Value> = doc
            .into_iter()
            .map(|(k, v)| (k, serde_json::Value::String(v)))
            .collect();
        format!("{}\n", serde_json::Value::Object(map))
    } else {
        let mut s = String::new();
        for (k, v) in doc {
            let _ = writeln!(s, "{k}: {v}");
        }
        s
    };
    let code = if tail.is_scalar {
        EXIT_SEPARABLE
    } else {
        EXIT_NEGATIVE
    };
    Ok((text, code))
}

fn cmd_batch(manifest: &Path, parent: &Cli, out: &mut String, err: &mut String) -> i32 {
    let text = match read_file(manifest) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ERROR;
        }
    };
    let mut worst = EXIT_SEPARABLE;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let _ = writeln!(out, "## {line}");
        let mut args: Vec<String> = vec!["gatesep".into()];
        if parent.json {
            args.push("--json".into());
        }
        args.extend(line.split_whitespace().map(str::to_string));
        let code = match Cli::try_parse_from(&args) {
            Ok(cli) => {
                if matches!(cli.command, Command::Batch { .. }) {
                    let _ = writeln!(err, "error: line {}: nested batch is not allowed", idx + 1);
                    EXIT_ERROR
                } else {
                    run(cli, out, err)
                }
            }
            Err(e) => {
                let _ = writeln!(err, "error: line {}: {e}", idx + 1);
                EXIT_ERROR
            }
        };
        worst = worst.max(code);
    }
    worst
}
