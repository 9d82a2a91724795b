use thiserror::Error;

/// Every failure the toolkit can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HullError {
    #[error("division by zero")]
    DivisionByZero,

    #[error("element does not belong to this field: {0}")]
    SpecMismatch(String),

    #[error("zero has no multiplicative order")]
    ZeroHasNoOrder,

    #[error("unsupported order r = {r}: r must divide q + 1 = {q_plus_one}")]
    UnsupportedOrder { r: u64, q_plus_one: u64 },

    #[error("polynomial has zero constant term")]
    ZeroConstantTerm,

    #[error("polynomial is constant")]
    ConstantPolynomial,

    #[error("{what}: {count} exceeds limit {limit}")]
    ScaleLimit {
        what: &'static str,
        count: u128,
        limit: u128,
    },

    #[error("{0} and {1} are not coprime")]
    NotCoprime(u64, u64),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("exponent {value} at position {index} is outside [0, {max}]")]
    ExponentRange { index: usize, value: u64, max: u64 },

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("oracle disagrees with closed form: {0}")]
    VerificationMismatch(String),

    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, HullError>;
