use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("frequency {omega} lies outside the band [{lower}, {upper}]")]
    OutOfBand { omega: f64, lower: f64, upper: f64 },

    #[error("frequency {omega} sits on a band edge where the group velocity vanishes")]
    BandEdge { omega: f64 },

    #[error("decoupled chain: hopping is zero, the transfer matrix is singular")]
    DecoupledChain,

    #[error("invalid bath: {0}")]
    InvalidBath(String),

    #[error("eigensolver failed: {0}")]
    Diagonalization(String),

    #[error("decay fit needs at least {required} usable samples, got {found}")]
    InsufficientSamples { required: usize, found: usize },

    #[error("invalid dielectric profile: {0}")]
    InvalidProfile(String),

    #[error("no localized mode found (smallest participation ratio {best_ratio:.3})")]
    NoLocalizedMode { best_ratio: f64 },

    #[error("mode is not normalized: ∫ε₀|φ|²dx = {norm}")]
    NotNormalized { norm: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}
