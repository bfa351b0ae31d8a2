use thiserror::Error;

use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("malformed rational {0:?}: expected \"p/q\" with q > 0")]
    ParseRational(String),

    #[error("invalid dyadic interval: index {index} out of range at level {level}")]
    InvalidDyadic { index: u64, level: u32 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("incompatible partitions: {0}")]
    IncompatiblePartitions(String),

    #[error("target partition does not refine the source partition")]
    NotARefinement,

    #[error("operands live on different partitions; refine them first")]
    PartitionMismatch,

    #[error("expected {expected} cell values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("negative mass {mass} on cell {cell}")]
    NegativeMass { cell: usize, mass: Rational },

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: Rational },

    #[error("set index {index} out of range for {cells} cells")]
    InvalidSetIndex { index: usize, cells: usize },

    #[error("not absolutely continuous: cell {cell} has zero reference mass but signed mass {mass}")]
    NotAbsolutelyContinuous { cell: usize, mass: Rational },

    #[error("{cells} cells exceed the enumeration cap of {max}")]
    TooManyCells { cells: usize, max: usize },

    #[error("invalid sequence index {0}; terms are numbered from 1")]
    InvalidTermIndex(u64),

    #[error("empty range: {0}")]
    EmptyRange(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("unknown example {0:?}")]
    UnknownExample(String),

    #[error("{quantity} at n = {n}: expected {expected}, computed {computed}")]
    ExpectationMismatch {
        quantity: String,
        n: u64,
        expected: Rational,
        computed: Rational,
    },
}
