use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of the operation.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// Two Gamma-function poles coincide (or nearly so) and the residue
    /// expansion would need logarithmic terms.
    #[error("pole collision: {detail}; perturb the shape parameters before building the channel")]
    PoleCollision { detail: String },

    /// A numerical procedure stopped short of its tolerance.
    #[error("accuracy failure in {func}: estimate {estimate:e}, achieved error bound {achieved:e}")]
    Accuracy {
        func: &'static str,
        estimate: f64,
        achieved: f64,
    },

    /// The transmitter and receiver axes do not intersect above the baseline.
    #[error("no common volume: {0}")]
    Geometry(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    /// A bisection target that cannot be bracketed.
    #[error("target out of range: {0}")]
    Range(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }
}
