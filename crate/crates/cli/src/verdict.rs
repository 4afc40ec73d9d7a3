//! The machine-readable verdict document emitted by every decision command,
//! in a line-oriented text form and a single-line JSON mirror.

use gatesep_core::{ComplexMatrix, Complex64};
use serde_json::json;

use crate::formats::{self, format_float, parse_complex, FormatError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    Separable,
    NotSeparable,
    Borderline,
    NotApplicable,
}

impl VerdictKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictKind::Separable => "separable",
            VerdictKind::NotSeparable => "not_separable",
            VerdictKind::Borderline => "borderline",
            VerdictKind::NotApplicable => "not_applicable",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Some(match text {
            "separable" => VerdictKind::Separable,
            "not_separable" => VerdictKind::NotSeparable,
            "borderline" => VerdictKind::Borderline,
            "not_applicable" => VerdictKind::NotApplicable,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    RankOne,
    CommutingSum,
    Regrouping,
    SchmidtOracle,
    Alg21Paper,
    Alg21Corrected,
    Approx,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::RankOne => "rank_one",
            Method::CommutingSum => "commuting_sum",
            Method::Regrouping => "regrouping",
            Method::SchmidtOracle => "schmidt_oracle",
            Method::Alg21Paper => "alg21_paper",
            Method::Alg21Corrected => "alg21_corrected",
            Method::Approx => "approx",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Some(match text {
            "rank_one" => Method::RankOne,
            "commuting_sum" => Method::CommutingSum,
            "regrouping" => Method::Regrouping,
            "schmidt_oracle" => Method::SchmidtOracle,
            "alg21_paper" => Method::Alg21Paper,
            "alg21_corrected" => Method::Alg21Corrected,
            "approx" => Method::Approx,
            _ => return None,
        })
    }
}

/// Structured outcome of a decision command. `residual` is present whenever
/// `factors` is non-empty.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub method: Method,
    pub factors: Vec<ComplexMatrix>,
    pub global_phase: Option<Complex64>,
    pub residual: Option<f64>,
    pub schmidt_spectrum: Option<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl Verdict {
    pub fn new(kind: VerdictKind, method: Method) -> Self {
        Verdict {
            kind,
            method,
            factors: Vec::new(),
            global_phase: None,
            residual: None,
            schmidt_spectrum: None,
            warnings: Vec::new(),
        }
    }

    pub fn emit_text(&self) -> String {
        debug_assert!(self.factors.is_empty() || self.residual.is_some());
        let mut out = String::new();
        out.push_str(&format!("schema: {SCHEMA_VERSION}\n"));
        out.push_str(&format!("verdict: {}\n", self.kind.as_str()));
        out.push_str(&format!("method: {}\n", self.method.as_str()));
        if let Some(phase) = self.global_phase {
            out.push_str(&format!(
                "global_phase: {} {}\n",
                format_float(phase.re),
                format_float(phase.im)
            ));
        }
        if let Some(residual) = self.residual {
            out.push_str(&format!("residual: {}\n", format_float(residual)));
        }
        if let Some(spectrum) = &self.schmidt_spectrum {
            let values: Vec<String> = spectrum.iter().map(|&s| format_float(s)).collect();
            out.push_str(&format!("schmidt_spectrum: {}\n", values.join(" ")));
        }
        for (idx, factor) in self.factors.iter().enumerate() {
            out.push_str(&format!("factor {} dim {}\n", idx + 1, factor.dim()));
            for i in 0..factor.dim() {
                let row: Vec<String> = (0..factor.dim())
                    .map(|j| formats::format_complex(factor.get(i, j)))
                    .collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
        for warning in &self.warnings {
            out.push_str(&format!("warning: {warning}\n"));
        }
        out
    }

    pub fn emit_json(&self) -> String {
        let factors: Vec<serde_json::Value> = self
            .factors
            .iter()
            .map(|f| {
                let entries: Vec<[f64; 2]> =
                    f.entries().iter().map(|z| [z.re, z.im]).collect();
                json!({ "dim": f.dim(), "entries": entries })
            })
            .collect();
        let value = json!({
            "schema": SCHEMA_VERSION,
            "verdict": self.kind.as_str(),
            "method": self.method.as_str(),
            "global_phase": self.global_phase.map(|p| [p.re, p.im]),
            "residual": self.residual,
            "schmidt_spectrum": self.schmidt_spectrum,
            "factors": factors,
            "warnings": self.warnings,
        });
        value.to_string()
    }

    /// Parses the text form back into a verdict; the inverse of
    /// [`Verdict::emit_text`] up to the 12-significant-digit rounding.
    pub fn parse_text(text: &str) -> Result<Verdict, FormatError> {
        let mut kind = None;
        let mut method = None;
        let mut global_phase = None;
        let mut residual = None;
        let mut schmidt_spectrum = None;
        let mut factors = Vec::new();
        let mut warnings = Vec::new();

        let mut lines = text.lines().enumerate().peekable();
        while let Some((idx, raw)) = lines.next() {
            let line_no = idx + 1;
            let content = raw.trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix("schema:") {
                let version: u32 = rest.trim().parse().map_err(|_| FormatError::Syntax {
                    line: line_no,
                    message: format!("invalid schema version {rest:?}"),
                })?;
                if version != SCHEMA_VERSION {
                    return Err(FormatError::Syntax {
                        line: line_no,
                        message: format!("unsupported schema version {version}"),
                    });
                }
            } else if let Some(rest) = content.strip_prefix("verdict:") {
                kind = VerdictKind::parse(rest.trim());
                if kind.is_none() {
                    return Err(FormatError::Syntax {
                        line: line_no,
                        message: format!("unknown verdict {rest:?}"),
                    });
                }
            } else if let Some(rest) = content.strip_prefix("method:") {
                method = Method::parse(rest.trim());
                if method.is_none() {
                    return Err(FormatError::Syntax {
                        line: line_no,
                        message: format!("unknown method {rest:?}"),
                    });
                }
            } else if let Some(rest) = content.strip_prefix("global_phase:") {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(FormatError::Syntax {
                        line: line_no,
                        message: "global_phase expects `re im`".into(),
                    });
                }
                let re: f64 = parts[0].parse().map_err(|_| FormatError::Syntax {
                    line: line_no,
                    message: "invalid phase".into(),
                })?;
                let im: f64 = parts[1].parse().map_err(|_| FormatError::Syntax {
                    line: line_no,
                    message: "invalid phase".into(),
                })?;
                global_phase = Some(Complex64::new(re, im));
            } else if let Some(rest) = content.strip_prefix("residual:") {
                residual = Some(rest.trim().parse().map_err(|_| FormatError::Syntax {
                    line: line_no,
                    message: "invalid residual".into(),
                })?);
            } else if let Some(rest) = content.strip_prefix("schmidt_spectrum:") {
                let values: Result<Vec<f64>, _> =
                    rest.split_whitespace().map(|v| v.parse()).collect();
                schmidt_spectrum = Some(values.map_err(|_| FormatError::Syntax {
                    line: line_no,
                    message: "invalid spectrum".into(),
                })?);
            } else if content.starts_with("factor ") {
                let parts: Vec<&str> = content.split_whitespace().collect();
                if parts.len() != 4 || parts[2] != "dim" {
                    return Err(FormatError::Syntax {
                        line: line_no,
                        message: format!("expected `factor <k> dim <d>`, found {content:?}"),
                    });
                }
                let dim: usize = parts[3].parse().map_err(|_| FormatError::Syntax {
                    line: line_no,
                    message: "invalid factor dimension".into(),
                })?;
                let mut entries = Vec::with_capacity(dim * dim);
                for _ in 0..dim {
                    let (ridx, row) = lines.next().ok_or(FormatError::Syntax {
                        line: line_no,
                        message: "factor rows truncated".into(),
                    })?;
                    for value in row.split_whitespace() {
                        entries.push(parse_complex(value).ok_or(FormatError::Syntax {
                            line: ridx + 1,
                            message: format!("invalid complex number {value:?}"),
                        })?);
                    }
                }
                factors.push(
                    ComplexMatrix::square(dim, entries)
                        .map_err(|e| FormatError::Contract(e.to_string()))?,
                );
            } else if let Some(rest) = content.strip_prefix("warning:") {
                warnings.push(rest.trim().to_string());
            } else {
                return Err(FormatError::Syntax {
                    line: line_no,
                    message: format!("unrecognized line {content:?}"),
                });
            }
        }

        Ok(Verdict {
            kind: kind.ok_or(FormatError::Syntax {
                line: 0,
                message: "missing verdict".into(),
            })?,
            method: method.ok_or(FormatError::Syntax {
                line: 0,
                message: "missing method".into(),
            })?,
            factors,
            global_phase,
            residual,
            schmidt_spectrum,
            warnings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gatesep_core::PauliLetter;

    #[test]
    fn text_round_trip() {
        let mut v = Verdict::new(VerdictKind::Separable, Method::SchmidtOracle);
        v.factors = vec![PauliLetter::Z.matrix(), PauliLetter::X.matrix()];
        v.global_phase = Some(Complex64::new(-1.0, 1.2e-16));
        v.residual = Some(3.5e-12);
        v.schmidt_spectrum = Some(vec![2.0, 0.0, 0.0, 0.0]);
        v.warnings = vec!["an eigenvalue lies near -1".into()];
        let text = v.emit_text();
        let back = Verdict::parse_text(&text).unwrap();
        assert_eq!(back.kind, v.kind);
        assert_eq!(back.method, v.method);
        assert_eq!(back.factors.len(), 2);
        assert!((back.global_phase.unwrap() - v.global_phase.unwrap()).norm() < 1e-11);
        assert!((back.residual.unwrap() - v.residual.unwrap()).abs() < 1e-20);
        assert_eq!(back.warnings, v.warnings);
    }

    #[test]
    fn json_is_single_line() {
        let v = Verdict::new(VerdictKind::NotSeparable, Method::RankOne);
        let text = v.emit_json();
        assert!(!text.contains('\n'));
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["verdict"], "not_separable");
        assert_eq!(parsed["schema"], 1);
    }
}
