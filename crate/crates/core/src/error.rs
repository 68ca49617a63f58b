use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("no built-in modulus for p = {p}, m = {m}")]
    NoDefaultModulus { p: u32, m: usize },
    #[error("modulus must be a monic polynomial of degree {m} with coefficients below p")]
    BadModulus { m: usize },
    #[error("modulus is reducible over F_{p}")]
    ReducibleModulus { p: u32 },
    #[error("field of size {p}^{m} is too large")]
    FieldTooLarge { p: u32, m: usize },
    #[error("operands live over different fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("insufficient precision: {}", precision_text(*.needed, *.available))]
    InsufficientPrecision { needed: i64, available: i64 },
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degree range [{lo}, {hi}] does not cover the filtration jumps")]
    RangeTooSmall { lo: i64, hi: i64 },
    #[error("not a graded basis: {0}")]
    NotAGradedBasis(String),
    #[error("residue degree {f} does not divide the coefficient field degree {m}")]
    FieldTooSmall { f: usize, m: usize },
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("submodule is not stable under Frobenius")]
    NotStable,
    #[error("submodule is not saturated")]
    NotSaturated,
    #[error("cannot twist by zero")]
    ZeroScalar,
    #[error("residue degree {f_k} does not divide {f_l}")]
    IncompatibleDegrees { f_k: usize, f_l: usize },
    #[error("search space of {0} candidates exceeds the budget")]
    BoxTooLarge(u128),
    #[error("weight tuple has the wrong shape: {0}")]
    SizeMismatch(String),
    #[error("the induced ambient representation is reducible")]
    AmbientReducible,
    #[error("no basepoint satisfies the sign conditions")]
    NoValidLambda,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for errors caused by truncated power series rather than bad input.
    pub fn is_precision(&self) -> bool {
        matches!(self, Error::InsufficientPrecision { .. })
    }
}

fn precision_text(needed: i64, available: i64) -> String {
    if needed >= crate::algebra::EXACT {
        format!("result not determined by data known below u^{available}")
    } else {
        format!("need terms below u^{needed}, only known below u^{available}")
    }
}

pub type Result<T> = std::result::Result<T, Error>;
