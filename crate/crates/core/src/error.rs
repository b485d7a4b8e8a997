use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("not a partition: {0:?} is not weakly decreasing")]
    NotAPartition(Vec<u32>),
    #[error("componentwise sum {0:?} is not weakly decreasing")]
    NonPartitionResult(Vec<u32>),
    #[error("invalid ambient box {rows}x{cols}")]
    InvalidBox { rows: u32, cols: u32 },
    #[error("{0} does not fit in the {1} box")]
    DoesNotFit(String, String),
    #[error("the product has no valid fillings")]
    EmptyProduct,
    #[error("polynomial is not symmetric")]
    NotSymmetric,
    #[error("polynomial is not in the span of the Grothendieck basis")]
    NotInSpan,
    #[error("integer overflow in exact arithmetic")]
    Overflow,
    #[error("invalid case: {0}")]
    InvalidCase(String),
    #[error("{kind} {index} is not full")]
    NotFull { kind: &'static str, index: u32 },
    #[error("not a multiplicity-free case: {0}")]
    NotMultiplicityFreeCase(String),
    #[error("invalid filling: {0}")]
    InvalidFilling(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
