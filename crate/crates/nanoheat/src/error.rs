use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singularity: {0}")]
    Singular(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("assumption violated: {0}")]
    Assumption(String),
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error("resonance too exact (resonance factor {factor:e}): {msg}")]
    ResonanceTooExact { factor: f64, msg: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("probe error: {0}")]
    Probe(String),
    #[error("coefficient error: {0}")]
    Coefficient(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
