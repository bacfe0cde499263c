use alloc::string::String;
use core::fmt;

/// Errors raised by the phase-space and oracle routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the range an operation is defined on.
    Domain { op: &'static str, detail: String },
    /// A numerical quantity left its valid range (e.g. a negative discriminant).
    Numerical { op: &'static str, detail: String },
    /// A caller broke an operation contract (wrong variable set, unnormalized input, ...).
    Contract { op: &'static str, detail: String },
    /// A conditional branch carries zero probability weight.
    ZeroWeight { stage: usize, detail: String },
    /// A covariance matrix violates the uncertainty relation.
    Unphysical {
        op: &'static str,
        min_symplectic: f64,
    },
    /// Fock truncation is too small for the state being represented.
    Truncation { population: f64, suggested: usize },
    /// The requested combination is not supported by this code path.
    Unsupported { op: &'static str, detail: String },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn numerical(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn contract(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Contract {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn unsupported(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Unsupported {
            op,
            detail: detail.into(),
        }
    }

    /// True for errors that come from invalid user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. } | Error::Contract { .. } | Error::Unsupported { .. }
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { op, detail } => write!(f, "{op}: domain error: {detail}"),
            Error::Numerical { op, detail } => write!(f, "{op}: numerical error: {detail}"),
            Error::Contract { op, detail } => write!(f, "{op}: contract violated: {detail}"),
            Error::ZeroWeight { stage, detail } => {
                write!(f, "zero-weight branch at stage {stage}: {detail}")
            }
            Error::Unphysical { op, min_symplectic } => write!(
                f,
                "{op}: unphysical covariance (min symplectic eigenvalue {min_symplectic:.3e} < 1/2)"
            ),
            Error::Truncation {
                population,
                suggested,
            } => write!(
                f,
                "Fock truncation too small: edge population {population:.2e}, try N >= {suggested}"
            ),
            Error::Unsupported { op, detail } => write!(f, "{op}: unsupported: {detail}"),
        }
    }
}
