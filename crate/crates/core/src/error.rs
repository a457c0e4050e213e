use thiserror::Error;

use crate::field::FieldSpec;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("field mismatch: {left} vs {right}")]
    FieldMismatch { left: FieldSpec, right: FieldSpec },

    #[error("division by zero")]
    DivisionByZero,

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("index set must be strictly ascending: {0:?}")]
    UnsortedIndexSet(Vec<usize>),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },

    #[error("size {n} exceeds limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("not a permutation: {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("parameter out of range: {0}")]
    InvalidRange(String),

    #[error("enumeration of {required} cases exceeds budget {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("matrices must be at least 3x3 for preserver classification, got n = {0}")]
    DimensionTooSmall(usize),

    #[error("linear map is not bijective")]
    NotBijective,

    #[error("basis elements are linearly dependent")]
    LinearlyDependent,

    #[error("operation requires an infinite field, got {0}")]
    FieldNotInfinite(FieldSpec),

    #[error("position ({i}, {j}) meets the witness rows or columns")]
    PositionInsideWitness { i: usize, j: usize },

    #[error("constraint vanishes at the input matrix")]
    ConstraintVanishesAtA,

    #[error("matrix already has full permanental rank {0}")]
    RankSaturated(usize),

    #[error("no admissible scalar among the first {0} candidates")]
    ScanExhausted(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal check failed: {0}")]
    AssertionFailure(String),
}
