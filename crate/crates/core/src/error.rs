use thiserror::Error;

/// Error type shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is outside the documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested operation needs a decay property this window cannot
    /// certify (e.g. an absolutely summable spectrum).
    #[error("unsupported window: {0}")]
    UnsupportedWindow(String),

    /// A truncation certificate could not be met at the requested precision.
    #[error("truncation certificate failed: {0}")]
    TruncationCertificate(String),

    /// An internal invariant (e.g. Hermitian symmetry) was violated.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// Two spectrum points fall in the same residue class modulo 2π/α,
    /// so the distinct-residue construction does not apply.
    #[error(
        "residue collision modulo 2*pi/alpha: mu[{i}] = {mu_i} and mu[{j}] = {mu_j} \
         differ by a lattice multiple"
    )]
    ResidueCollision {
        i: usize,
        mu_i: f64,
        j: usize,
        mu_j: f64,
    },

    /// A window specifier string could not be parsed.
    #[error("cannot parse window spec '{spec}': {reason}")]
    WindowSpec { spec: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
