//! Command-line front end: file formats, the verdict document and the
//! subcommand dispatch, all exposed as a library so the test suites can
//! drive every surface in-process.

pub mod commands;
pub mod formats;
pub mod verdict;

pub use commands::{run, Cli, Command, EXIT_ERROR, EXIT_NEGATIVE, EXIT_SEPARABLE};
pub use formats::{
    emit_matrix, emit_tensor_terms, parse_matrix, parse_tensor_terms, FormatError, TensorTermFile,
};
pub use verdict::{Method, Verdict, VerdictKind};
