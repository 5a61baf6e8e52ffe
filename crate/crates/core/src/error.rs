use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested sideband would need negative kinetic energy.
    #[error("sideband n = {order} is energetically closed (P_i^2 + 2nP_iQ = {discriminant})")]
    ClosedChannel { order: i32, discriminant: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical instability: {0}")]
    Instability(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("sideband n = {0} is below the noise floor")]
    MissingSideband(i32),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
