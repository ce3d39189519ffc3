use thiserror::Error;

/// Failure taxonomy shared by every operation in the crate.
///
/// The variants map onto process exit codes: `Input` is a malformed or
/// inconsistent problem description (exit 2), `Domain` and `Numerical` are
/// runtime failures of the computation itself (exit 3).  Verification
/// routines that run to completion but observe a violated bound report that
/// through their report types, not through this enum; exit 1 is reserved for
/// that case and never produced by `Error`.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the operation.
    #[error("domain: {0}")]
    Domain(String),
    /// A numerical method failed to converge or lost all precision.
    #[error("numerical: {0}")]
    Numerical(String),
    /// Malformed input: spec files, command-line arguments, mismatched grids.
    #[error("input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) => 2,
            Error::Domain(_) | Error::Numerical(_) => 3,
        }
    }
}
