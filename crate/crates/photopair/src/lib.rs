//! Simulation of two-photon cascade emission following electron-impact
//! excitation by sculpted photoelectron wave packets.
//!
//! The crate is organized bottom-up: angular-momentum algebra and numerics,
//! optical field envelopes, atomic structure data, photoionization wave-packet
//! synthesis, the first-order collision step that maps a free-electron packet
//! onto an excited-state density matrix, and the two-step radiative cascade
//! whose photon-photon coincidence patterns are the observable. A truncated
//! state-space integrator (`oracle`) cross-checks the factorized cascade
//! formulas, and `runner` exposes the whole chain as config-driven scans.

pub mod angular;
pub mod atoms;
pub mod cascade;
pub mod collision;
pub mod field;
pub mod ionization;
pub mod numeric;
pub mod oracle;
pub mod rotation;
pub mod runner;
pub mod units;

mod book;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Configuration file could not be parsed.
    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },
    /// Configuration parsed but failed validation.
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    /// A radial matrix element table was malformed.
    #[error("matrix element table, line {line}: {message}")]
    TableParse { line: usize, message: String },
    /// A requested matrix element is absent from the table.
    #[error("missing radial matrix element for {0}")]
    MissingMatrixElement(String),
    /// Angular-momentum arguments violate coupling rules.
    #[error("invalid angular momentum arguments: {0}")]
    AngularMomentum(String),
    /// Direction coincides with the polarization-basis singularity.
    #[error("emission basis is singular along the quantization axis")]
    SingularBasis,
    /// Photon mode energy does not match the selected transition channel.
    #[error("photon channel mismatch: {0}")]
    ChannelMismatch(String),
    /// Truncated oracle state space exceeded its configured bound.
    #[error("oracle basis too large: {size} states exceeds cap {cap}")]
    OracleBasisOverflow { size: usize, cap: usize },
    /// Oracle time step too coarse for the fastest phase in the basis.
    #[error("oracle step {dt} fs too coarse for max frequency {omega_max} rad/fs")]
    OracleStepUnstable { dt: f64, omega_max: f64 },
    /// Requested photon mode not representable on the oracle mode grid.
    #[error("photon mode off grid: {0}")]
    OracleModeOffGrid(String),
    /// A numerical stage failed downstream of config validation.
    #[error("{stage}: {message}")]
    Numerical { stage: &'static str, message: String },
    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
