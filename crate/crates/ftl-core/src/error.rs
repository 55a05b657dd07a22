use thiserror::Error;

/// Errors surfaced by the geometry, renormalization and metric routines.
#[derive(Debug, Error)]
pub enum FtlError {
    /// A defining polynomial violates the model-domain invariants.
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    /// All mixed coefficients vanish at the requested point, so tau is undefined.
    #[error("infinite type: every mixed coefficient vanishes at the base point")]
    InfiniteType,

    /// An operation that requires an interior point was called on the
    /// boundary or outside (rho >= 0).
    #[error("point is not interior: rho = {rho}")]
    NotInterior { rho: f64 },

    /// A chain link fails the J < 1 admissibility condition.
    #[error("chain link {index} inadmissible: J = {j}")]
    ChainLink { index: usize, j: f64 },

    /// The engulfing scale C(p) * eps(q0) exceeds the configured eps0.
    #[error("chain scale {scale} exceeds eps0 = {eps0}")]
    ChainScale { scale: f64, eps0: f64 },

    /// The domain has no frozen C5 constant; run the constants measurement first.
    #[error("domain constants not calibrated (C5 unset)")]
    NotCalibrated,

    /// No grid pair satisfies the witness condition J >= k.
    #[error("empty witness set: no grid pair with J >= k")]
    EmptyWitnessSet,

    /// A supplied witness pair violates the renormalization hypothesis.
    #[error("invalid witness at index {index}: {reason}")]
    InvalidWitness { index: u32, reason: String },

    /// The renormalized map fails the Schwarz certification grid.
    #[error("certification failure at index {index}: J - s = {violation} at t = {t}, u = {u}")]
    Certification {
        index: u32,
        t: num_complex::Complex64,
        u: num_complex::Complex64,
        violation: f64,
    },

    /// A coefficient sequence fails the Cauchy tail test.
    #[error("rescaled polynomials do not converge: coefficient ({0}, {1}) varies by {2}")]
    NonConvergence(u32, u32, f64),

    /// An analytic disc leaves the model domain.
    #[error("disc {index} escapes the domain at t = {t}")]
    DiscEscape { index: usize, t: num_complex::Complex64 },

    /// Containment search could not place any admissible disc.
    #[error("no admissible disc found for the extremal problem")]
    NoAdmissibleDisc,

    /// A descriptor or polynomial file failed to parse.
    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },

    /// Generic precondition violation.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, FtlError>;
