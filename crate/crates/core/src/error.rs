use std::fmt;

use thiserror::Error;

/// A syntax error with the byte offset at which it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(offset: usize, message: impl Into<String>) -> Self {
        ParseError { offset, message: message.into() }
    }

    /// 1-based column in a single-line input.
    pub fn column(&self, input: &str) -> usize {
        input[..self.offset.min(input.len())].chars().count() + 1
    }
}

/// Where a quantifier sits in a formula that is not positive.
///
/// `quantifier` counts `forall` nodes in pre-order, which is also the order
/// of the `forall` keywords in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Misplaced {
    pub quantifier: usize,
    pub subformula: String,
}

impl fmt::Display for Misplaced {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "quantifier #{} (`{}`) occurs at a negative position",
            self.quantifier + 1,
            self.subformula
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("formula is not positive: {0}")]
    NotPositive(Misplaced),
    #[error("formula is not negative: `{0}` has a quantifier on its implication spine")]
    NotNegative(String),
    #[error("formula violates the Barendregt condition: variable `{0}` is bound twice or also occurs free")]
    NotBarendregt(String),
}
