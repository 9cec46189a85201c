use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("angle denominator does not divide the field order {order}")]
    OrderMismatch { order: usize },
    #[error("value is not real")]
    NotReal,
    #[error("zero input has no argument")]
    ZeroInput,
    #[error("interval refinement exceeded {bits} bits")]
    PrecisionCap { bits: u64 },
    #[error("block {block} has an eigenvalue of modulus one")]
    ModulusOneEigenvalue { block: usize },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("validation failed: {0}")]
    ValidationFailed(String),
    #[error("characteristic polynomial has a non-rational root")]
    NonRationalSpectrum,
    #[error("unsupported angle: {0}")]
    UnsupportedAngle(String),
    #[error("gadget broken by perturbation: {0}")]
    GadgetBroken(String),
    #[error("input too large: {0}")]
    TooLarge(String),
    #[error("quantifier prefix is not strictly alternating forall..exists")]
    NonCanonicalPrefix,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
    #[error("step budget of {0} exhausted")]
    BudgetExceeded(String),
    #[error("rounding tie could not be certified within the precision cap")]
    UndecidableTie,
    #[error("i/o error: {0}")]
    Io(String),
    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
