use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("coordinate {index} of the prox center lies on the domain boundary (value {value:e})")]
    DomainBoundary { index: usize, value: f64 },

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("missing parameter `{name}` for {context}")]
    MissingParameter { name: &'static str, context: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("information-flow violation: {0}")]
    InformationFlow(String),

    #[error("estimator stream: {0}")]
    Stream(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn missing(name: &'static str, context: impl Into<String>) -> Self {
        Error::MissingParameter { name, context: context.into() }
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}

pub(crate) fn check_finite(what: &str, v: &[f64]) -> Result<()> {
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("{what}[{i}] = {}", v[i])));
    }
    Ok(())
}
