//! Text file formats: dense matrices, Hamiltonian tensor-term files and the
//! number formatting shared by every emitter.
//!
//! All numeric output is printed with 12 significant digits; re-parsing
//! reproduces values to 1e-11. Complex entries read `re<sign>imj`, e.g.
//! `0.5-0.5j`. Comments start with `#`, whole-line or trailing.

use gatesep_core::{
    max_dim, ComplexMatrix, Complex64, CriterionError, TensorDecomposition, TensorTerm,
    Tolerances,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("dimension {dim} exceeds the configured maximum {max}")]
    SizeLimit { dim: usize, max: usize },
    #[error("contract violation: {0}")]
    Contract(String),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

/// 12 significant digits, exponent notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.11e}")
}

/// `re<sign>imj` with both parts at 12 significant digits.
pub fn format_complex(z: Complex64) -> String {
    format!("{:.11e}{:+.11e}j", z.re, z.im)
}

/// Parses `re<sign>imj`, `rej` shorthand is not accepted but a bare real is.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let body = match text.strip_suffix(['j', 'J']) {
        Some(b) => b,
        None => return text.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0)),
    };
    let bytes = body.as_bytes();
    // the sign separating re from im is the last +/- not following e/E and
    // not leading the string
    let split = (1..bytes.len()).rev().find(|&i| {
        (bytes[i] == b'+' || bytes[i] == b'-')
            && bytes[i - 1] != b'e'
            && bytes[i - 1] != b'E'
    })?;
    let re: f64 = body[..split].parse().ok()?;
    let im: f64 = body[split..].parse().ok()?;
    Some(Complex64::new(re, im))
}

/// Significant lines of a document: comment-stripped, blank-skipped, with
/// original 1-based line numbers.
fn significant_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(idx, raw)| {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            None
        } else {
            Some((idx + 1, content))
        }
    })
}

/// Parses a matrix document: a `dim <d>` header followed by `d` rows of `d`
/// whitespace-separated complex entries.
pub fn parse_matrix(text: &str) -> Result<ComplexMatrix, FormatError> {
    let mut lines = significant_lines(text);
    let (header_line, header) = lines
        .next()
        .ok_or_else(|| syntax(0, "empty document; expected a `dim <d>` header"))?;
    let dim = parse_dim_header(header_line, header)?;
    let mut entries = Vec::with_capacity(dim * dim);
    for row in 0..dim {
        let (line_no, row_text) = lines
            .next()
            .ok_or_else(|| syntax(header_line, format!("expected {dim} rows, found {row}")))?;
        let values: Vec<&str> = row_text.split_whitespace().collect();
        if values.len() != dim {
            return Err(syntax(
                line_no,
                format!("expected {dim} entries in this row, found {}", values.len()),
            ));
        }
        for (col, value) in values.iter().enumerate() {
            let z = parse_complex(value).ok_or_else(|| {
                syntax(line_no, format!("column {}: invalid complex number {value:?}", col + 1))
            })?;
            entries.push(z);
        }
    }
    if let Some((line_no, extra)) = lines.next() {
        return Err(syntax(line_no, format!("unexpected trailing content {extra:?}")));
    }
    ComplexMatrix::square(dim, entries).map_err(|e| FormatError::Contract(e.to_string()))
}

fn parse_dim_header(line_no: usize, header: &str) -> Result<usize, FormatError> {
    let mut parts = header.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some("dim"), Some(d), None) => {
            let dim: usize = d
                .parse()
                .map_err(|_| syntax(line_no, format!("invalid dimension {d:?}")))?;
            if dim == 0 {
                return Err(syntax(line_no, "dimension must be at least 1"));
            }
            if dim > max_dim() {
                return Err(FormatError::SizeLimit {
                    dim,
                    max: max_dim(),
                });
            }
            Ok(dim)
        }
        _ => Err(syntax(
            line_no,
            format!("expected `dim <d>`, found {header:?}"),
        )),
    }
}

/// Emits the matrix document.
pub fn emit_matrix(m: &ComplexMatrix) -> String {
    let dim = m.dim();
    let mut out = format!("dim {dim}\n");
    for i in 0..dim {
        let row: Vec<String> = (0..dim).map(|j| format_complex(m.get(i, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parsed but not yet validated tensor-term document.
#[derive(Debug)]
pub struct TensorTermFile {
    pub dims: Vec<usize>,
    pub t: f64,
    pub terms: Vec<Vec<ComplexMatrix>>,
}

impl TensorTermFile {
    /// Validates factor Hermiticity and shape against the header and builds
    /// the decomposition.
    pub fn into_decomposition(self, tol: &Tolerances) -> Result<TensorDecomposition, FormatError> {
        let terms = self
            .terms
            .into_iter()
            .enumerate()
            .map(|(idx, factors)| {
                TensorTerm::new(factors, tol).map_err(|e: CriterionError| {
                    FormatError::Contract(format!("term {}: {e}", idx + 1))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        TensorDecomposition::new(self.dims, terms, self.t)
            .map_err(|e| FormatError::Contract(e.to_string()))
    }
}

/// Parses a tensor-term document:
///
/// ```text
/// dims 2 2
/// t 0.3
/// term
/// factor 1 dim 2
/// 0+0j 1+0j
/// 1+0j 0+0j
/// factor 2 dim 2
/// ...
/// ```
pub fn parse_tensor_terms(text: &str) -> Result<TensorTermFile, FormatError> {
    let mut lines = significant_lines(text).peekable();
    let (header_line, header) = lines
        .next()
        .ok_or_else(|| syntax(0, "empty document; expected a `dims ...` header"))?;
    let mut header_parts = header.split_whitespace();
    if header_parts.next() != Some("dims") {
        return Err(syntax(
            header_line,
            format!("expected `dims d1 d2 ...`, found {header:?}"),
        ));
    }
    let dims: Vec<usize> = header_parts
        .map(|d| {
            d.parse::<usize>()
                .map_err(|_| syntax(header_line, format!("invalid dimension {d:?}")))
                .and_then(|v| {
                    if v == 0 {
                        Err(syntax(header_line, "subsystem dimensions must be at least 1"))
                    } else {
                        Ok(v)
                    }
                })
        })
        .collect::<Result<_, _>>()?;
    if dims.is_empty() {
        return Err(syntax(header_line, "at least one subsystem dimension required"));
    }
    let total: usize = dims.iter().product();
    if total > max_dim() {
        return Err(FormatError::SizeLimit {
            dim: total,
            max: max_dim(),
        });
    }

    let mut t = 1.0f64;
    if let Some((line_no, content)) = lines.peek().copied() {
        if let Some(rest) = content.strip_prefix("t ") {
            t = rest
                .trim()
                .parse()
                .map_err(|_| syntax(line_no, format!("invalid t value {rest:?}")))?;
            lines.next();
        }
    }

    let mut terms: Vec<Vec<ComplexMatrix>> = Vec::new();
    while let Some((line_no, content)) = lines.next() {
        if content != "term" {
            return Err(syntax(line_no, format!("expected `term`, found {content:?}")));
        }
        let mut factors = Vec::with_capacity(dims.len());
        for (subsystem, &expected_dim) in dims.iter().enumerate() {
            let (fline, fheader) = lines.next().ok_or_else(|| {
                syntax(line_no, format!("term ended before factor {}", subsystem + 1))
            })?;
            let mut parts = fheader.split_whitespace();
            let ok = parts.next() == Some("factor")
                && parts.next() == Some(&(subsystem + 1).to_string())
                && parts.next() == Some("dim");
            let dim_text = parts.next();
            if !ok || parts.next().is_some() {
                return Err(syntax(
                    fline,
                    format!(
                        "expected `factor {} dim {expected_dim}`, found {fheader:?}",
                        subsystem + 1
                    ),
                ));
            }
            let dim: usize = dim_text
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| syntax(fline, "invalid factor dimension"))?;
            if dim != expected_dim {
                return Err(syntax(
                    fline,
                    format!("factor {} must have dim {expected_dim}, found {dim}", subsystem + 1),
                ));
            }
            let mut entries = Vec::with_capacity(dim * dim);
            for row in 0..dim {
                let (rline, row_text) = lines.next().ok_or_else(|| {
                    syntax(fline, format!("factor ended after {row} of {dim} rows"))
                })?;
                let values: Vec<&str> = row_text.split_whitespace().collect();
                if values.len() != dim {
                    return Err(syntax(
                        rline,
                        format!("expected {dim} entries, found {}", values.len()),
                    ));
                }
                for value in values {
                    entries.push(parse_complex(value).ok_or_else(|| {
                        syntax(rline, format!("invalid complex number {value:?}"))
                    })?);
                }
            }
            factors.push(
                ComplexMatrix::square(dim, entries)
                    .map_err(|e| FormatError::Contract(e.to_string()))?,
            );
        }
        terms.push(factors);
    }
    if terms.is_empty() {
        return Err(syntax(header_line, "no `term` blocks found"));
    }
    Ok(TensorTermFile { dims, t, terms })
}

/// Emits a tensor-term document from a validated decomposition.
pub fn emit_tensor_terms(d: &TensorDecomposition) -> String {
    let mut out = String::new();
    let dims: Vec<String> = d.dims().iter().map(|v| v.to_string()).collect();
    out.push_str(&format!("dims {}\n", dims.join(" ")));
    out.push_str(&format!("t {}\n", format_float(d.t())));
    for term in d.terms() {
        out.push_str("term\n");
        for (idx, factor) in term.factors().iter().enumerate() {
            out.push_str(&format!("factor {} dim {}\n", idx + 1, factor.dim()));
            for i in 0..factor.dim() {
                let row: Vec<String> = (0..factor.dim())
                    .map(|j| format_complex(factor.get(i, j)))
                    .collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
    }
    out
}
