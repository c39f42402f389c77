use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid unit system: {0}")]
    Units(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("assignment value {name} has modulus {modulus}, expected 1")]
    NotUnitModulus { name: &'static str, modulus: f64 },

    #[error("invalid optimizer parameter: {0}")]
    Optimizer(String),

    #[error("sample count must be at least 1")]
    NoSamples,

    #[error("invalid state parameters: {0}")]
    State(String),

    #[error("state norm {norm} deviates from 1")]
    NotNormalized { norm: f64 },

    #[error("invalid ensemble: {0}")]
    Ensemble(String),

    #[error("unknown observable `{0}`")]
    UnknownObservable(String),

    #[error("unknown context `{0}`")]
    UnknownContext(String),

    #[error("shot count must be at least 1")]
    NoShots,

    #[error("operator is not representable on this grid: {0}")]
    NotGridCompatible(String),

    #[error("eigenstate labels incompatible with grid: {0}")]
    Labels(String),

    #[error("serialization failed: {0}")]
    Serialize(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialize(e.to_string())
    }
}
