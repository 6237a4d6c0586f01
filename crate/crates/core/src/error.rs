use alloc::string::String;
use core::fmt;

/// Errors raised by lattice construction, assembly and the solvers.
///
/// Validation failures are not errors; they are reported as entries of a
/// [`crate::ValidationReport`].
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Requested builtin structure does not exist.
    UnknownName(String),
    /// A construction would exceed a configured size cap.
    SizeCapExceeded { requested: usize, cap: usize },
    /// Blow-up word length does not match the lattice level.
    LengthMismatch { expected: usize, got: usize },
    /// The Dirichlet problem is undefined: every vertex is on the boundary.
    EmptyInterior,
    /// Pencil matrix is not symmetric.
    NotSymmetric,
    /// Mass vector has a non-positive entry.
    NonpositiveMass { index: usize },
    /// Vertex index out of range.
    IndexOutOfRange { index: usize, len: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnknownName(name) => write!(f, "unknown builtin structure `{name}`"),
            Error::SizeCapExceeded { requested, cap } => {
                write!(f, "size cap exceeded: requested {requested}, cap {cap}")
            }
            Error::LengthMismatch { expected, got } => {
                write!(f, "blow-up word length mismatch: expected {expected}, got {got}")
            }
            Error::EmptyInterior => write!(f, "empty interior: Dirichlet problem undefined"),
            Error::NotSymmetric => write!(f, "pencil matrix is not symmetric"),
            Error::NonpositiveMass { index } => {
                write!(f, "mass vector has non-positive entry at index {index}")
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "vertex index {index} out of range (size {len})")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
