use thiserror::Error;

/// Errors produced by kernel construction, geometry, quadrature and the
/// experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid kernel parameters: {0}")]
    InvalidKernel(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid extension configuration: {0}")]
    InvalidExtension(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("integral appears divergent under refinement: {0}")]
    Divergent(String),

    #[error("geometry fault: {0}")]
    GeometryFault(String),

    #[error("invalid chart cover: {0}")]
    InvalidCover(String),

    #[error("expression error: {0}")]
    Expr(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
