use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    DimensionMismatch { expected: usize, found: usize },
    ZeroNormal,
    InvalidParameter { name: &'static str, reason: String },
    EmptyList(&'static str),
    EmptyIntersection,
    NotAffine,
    MissingFixDistance,
    MissingFixProjector,
    MissingAveragedness,
    /// A schedule failed validation; the message names the first failed hypothesis.
    ScheduleRejected(String),
    InsufficientSamples { needed: usize, found: usize },
    AllSamplesFeasible,
    Infeasible(&'static str),
    UnknownProbe(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::ZeroNormal => f.write_str("normal vector has zero norm"),
            Error::InvalidParameter { name, reason } => write!(f, "invalid `{name}`: {reason}"),
            Error::EmptyList(what) => write!(f, "`{what}` must not be empty"),
            Error::EmptyIntersection => f.write_str("sets have empty intersection"),
            Error::NotAffine => f.write_str("descriptor is not affine (hyperplane or affine subspace)"),
            Error::MissingFixDistance => f.write_str("map has no exact distance-to-Fix oracle"),
            Error::MissingFixProjector => f.write_str("map has no fixed-point selector"),
            Error::MissingAveragedness => f.write_str("map carries no averagedness constant"),
            Error::ScheduleRejected(msg) => write!(f, "schedule rejected: {msg}"),
            Error::InsufficientSamples { needed, found } => {
                write!(f, "insufficient positive samples: need {needed}, found {found}")
            }
            Error::AllSamplesFeasible => f.write_str("all samples feasible"),
            Error::Infeasible(what) => write!(f, "{what} is not feasible"),
            Error::UnknownProbe(label) => write!(f, "no probe labelled `{label}`"),
        }
    }
}

impl core::error::Error for Error {}
