//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by constructors, parameter validation, linear solves and
/// chart operations.
///
/// Dimension mismatches between vectors/matrices of operations that are pure
/// linear algebra panic instead (as `nalgebra` itself does); `Error` is
/// reserved for data-dependent failures a caller can meaningfully handle.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix failed the antisymmetry validation `Mᵀ = -M` (1e-10 on entries).
    #[error("matrix is not antisymmetric: max |M + Mᵀ| entry = {defect:.3e}")]
    NotAntisymmetric { defect: f64 },

    /// A matrix failed the orthogonality/determinant validation for SO(n).
    #[error("matrix is not a rotation: orthogonality defect {defect:.3e}, det = {det}")]
    NotRotation { defect: f64, det: f64 },

    /// A point failed the constraint-manifold validation.
    #[error("state violates constraint {constraint}: |residual| = {residual:.3e}")]
    ConstraintViolated {
        constraint: &'static str,
        residual: f64,
    },

    /// Inertia-operator or model parameters outside the admissible range.
    /// The message names the violated inequality.
    #[error("inadmissible parameters: {0}")]
    InadmissibleParams(String),

    /// A restricted linear system turned out singular.
    #[error("singular linear system in {context}")]
    SingularSystem { context: &'static str },

    /// Spheroconical chart evaluated on or too close to a coordinate
    /// hyperplane or with a degenerate spectrum.
    #[error("spheroconical chart boundary: {0}")]
    ChartBoundary(String),

    /// Interlacing a_1 < λ_1 < a_2 < … < λ_{n-1} < a_n violated.
    #[error("interlacing violated: {0}")]
    InterlacingViolated(String),

    /// Adaptive integrator could not reach the requested accuracy.
    #[error("step rejection cascade at t = {t}: step fell below {min_step:.3e}")]
    StepRejectionCascade { t: f64, min_step: f64 },

    /// The right-hand side produced a non-finite value.
    #[error("non-finite value in right-hand side at t = {t}")]
    NonFiniteRhs { t: f64 },

    /// Trajectory comparison had no overlapping time range.
    #[error("trajectories have no overlapping time range")]
    EmptyOverlap,

    /// Scenario configuration errors (bad schema, unknown model, bad paths).
    #[error("configuration error: {0}")]
    Config(String),

    /// I/O failure while reading configs or writing outputs.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
