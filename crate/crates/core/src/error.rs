use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("missing value for variable `{0}`")]
    MissingVariable(String),
    #[error("division by a non-constant polynomial")]
    NonConstantDivisor,
    #[error("division by zero")]
    DivisionByZero,
    #[error("rewrite rule rejected: {0}")]
    BadRule(String),
    #[error("leading monomials {0} and {1} are not coprime; reduction would not be confluent")]
    NonCoprimeRules(String, String),
    #[error("curve rationalizes/degenerates: {0}")]
    Degenerate(String),
    #[error("point not on curve (residual {residual:e})")]
    NotOnCurve { residual: f64 },
    #[error("chart invalid: {0}")]
    ChartInvalid(String),
    #[error("zero discriminant")]
    ZeroDiscriminant,
    #[error("modulus on the branch cut: {0}")]
    BranchCut(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("truncation order {trunc} too small for {prec} bits")]
    TruncationTooSmall { trunc: usize, prec: u32 },
    #[error("ill-conditioned root clustering: {0}")]
    IllConditioned(String),
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
