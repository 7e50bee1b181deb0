//! Problem encoders that produce pseudo-Boolean objectives.

mod maxsat;
mod mmc;

use thiserror::Error;

pub use maxsat::{count_satisfied, encode_maxsat, parse_dimacs, CnfFormula};
pub use mmc::{decode_mmc, encode_mmc_tree, parse_tree, MulticutDecoding, MulticutEncoding, TreeMulticutInstance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrontendError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("assignment has {got} variables, expected {expected}")]
    Dimension { expected: usize, got: usize },
}

fn parse_err(line: usize, message: impl Into<String>) -> FrontendError {
    FrontendError::Parse { line, message: message.into() }
}
