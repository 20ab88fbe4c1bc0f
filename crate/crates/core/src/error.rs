use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("modulus {modulus} is reducible: divisible by {factor}")]
    ReducibleModulus { modulus: String, factor: String },

    #[error("{0} is not a unit")]
    NotUnit(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("ring mismatch: {0}")]
    RingMismatch(String),

    #[error("composition undefined: inner series has nonzero constant term")]
    NonzeroConstantTerm,

    #[error("singular curve: discriminant {0} is not a unit")]
    SingularCurve(String),

    #[error("point {0} is not on the curve")]
    PointNotOnCurve(String),

    #[error("torsion not found within extension degree bound {bound}")]
    TorsionBoundExceeded { bound: u32 },

    #[error("3-torsion is not rational over the working field; it is defined over the degree-{degree} extension F_{{2^{degree}}}")]
    TorsionNotRational { degree: u32 },

    #[error("not an automorphism of the curve: {0}")]
    NotAutomorphism(String),

    #[error("not closed under the group operation: {0}")]
    NotClosed(String),

    #[error("precondition failed: {0}")]
    Precondition(String),
}
