//! Coupled flux-qubit / torsional-cantilever model.
//!
//! A superconducting loop interrupted by a single Josephson junction is mounted
//! so that a cantilever paddle of area A twists by an angle θ in an external
//! in-plane field Bₓ, which makes the applied flux θ-dependent. The crate
//! evaluates the resulting two dimensional potential V(Φ,θ), locates and
//! classifies its stationary points, expands around any minimum to obtain the
//! coupled harmonic normal modes, constructs the analytic Gaussian ground state
//! (generally entangled between flux and angle), and verifies the closed forms
//! against an independent finite-difference eigensolver.
//!
//! All computation is in SI units; angles are in radians. Energies are reported
//! in joules, with helpers for the E/h frequency convention used in contour
//! plots.

pub mod export;
pub mod groundstate;
pub mod harmonic;
pub mod model;
pub mod potential;
pub mod schrodinger;
pub mod synthetic;

/// Library error type. The CLI maps these onto process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter violated a documented invariant (nonpositive inductance,
    /// angle outside [-pi, pi], grid too small, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A numeric procedure failed to produce a trustworthy result
    /// (non-convergence, boundary contamination, loss of symmetry).
    #[error("computation failed: {0}")]
    Computation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
