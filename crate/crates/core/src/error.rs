use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ThetaError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("m = {0} is not admissible: it must be >= 2 and not a perfect square")]
    InvalidField(u64),
    #[error("operands live in different fields (m = {left} vs m = {right})")]
    FieldMismatch { left: u64, right: u64 },
    #[error("orbit terminated: the point reached 0 (digit is +infinity)")]
    OrbitTerminated,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("inadmissible digit {digit} at position {position}: digits must be >= {min}")]
    Inadmissible {
        position: usize,
        digit: u64,
        min: u64,
    },
    #[error("empty digit word")]
    EmptyWord,
    #[error("floor is ambiguous at the precision ceiling: {0}")]
    FloorAmbiguity(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("construction error: {0}")]
    Construction(String),
    #[error("enumeration of {cylinders} cylinders exceeds the budget of {budget}")]
    BudgetExceeded { cylinders: u128, budget: u128 },
    #[error("integer overflow: {0}")]
    Overflow(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, ThetaError>;
