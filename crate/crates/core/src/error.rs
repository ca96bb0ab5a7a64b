use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A vector or matrix had the wrong size.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// Attribute count outside the supported lattice range.
    AttributeCount(usize),
    /// Index outside `0..len`.
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },
    /// Two attribute indices that must differ were equal.
    RepeatedAttribute(usize),
    EmptySubset,
    /// A set function violated a capacity invariant.
    InvalidCapacity(String),
    InvalidMembership(String),
    /// A normalized attribute value fell outside `[0, 1]`.
    OutOfUnitInterval(f64),
    NonFinite(&'static str),
    NotPositiveDefinite,
    UnknownColumn(String),
    InvalidSpec(String),
    InvalidData(String),
    /// Standard deviation of true values is zero.
    ZeroSpread,
    Infeasible(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                what,
                expected,
                found,
            } => write!(f, "{what}: expected length {expected}, found {found}"),
            Error::AttributeCount(g) => {
                write!(f, "attribute count {g} outside supported range 1..=12")
            }
            Error::IndexOutOfRange { what, index, len } => {
                write!(f, "{what} index {index} out of range (len {len})")
            }
            Error::RepeatedAttribute(q) => {
                write!(f, "attribute {q} given twice where distinct attributes are required")
            }
            Error::EmptySubset => write!(f, "subset must be nonempty"),
            Error::InvalidCapacity(msg) => write!(f, "invalid capacity: {msg}"),
            Error::InvalidMembership(msg) => write!(f, "invalid membership function: {msg}"),
            Error::OutOfUnitInterval(x) => {
                write!(f, "normalized attribute value {x} outside [0, 1]")
            }
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::NotPositiveDefinite => write!(f, "covariance matrix is not positive definite"),
            Error::UnknownColumn(name) => write!(f, "unknown column `{name}`"),
            Error::InvalidSpec(msg) => write!(f, "invalid model specification: {msg}"),
            Error::InvalidData(msg) => write!(f, "invalid data: {msg}"),
            Error::ZeroSpread => write!(f, "true parameter values have zero standard deviation"),
            Error::Infeasible(msg) => write!(f, "infeasible point: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
