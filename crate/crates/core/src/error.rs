use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid atom: {0}")]
    InvalidAtom(String),
    #[error("pattern must contain at least one atom")]
    EmptyPattern,
    #[error("pattern has only zero coefficients")]
    ZeroPattern,
    #[error("pair matrix is numerically singular (condition number {condition:e})")]
    SingularPairMatrix { condition: f64 },
    #[error("R0 is not positive definite (smallest eigenvalue {lambda_min:e}); the second-derivative lower bound does not apply")]
    NotPositiveDefinite { lambda_min: f64 },
    #[error("SIDEN estimate is degenerate along direction ({tx:.6}, {ty:.6}): delta = {delta:e}")]
    DegenerateSiden { tx: f64, ty: f64, delta: f64 },
    #[error("correlation bound r_pz = {r_pz:e} is not below the threshold tbar0^2 r0 / 8 = {threshold:e}")]
    CorrelationTooLarge { r_pz: f64, threshold: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
