use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("no trajectory: phi is +inf at the query point")]
    NoTrajectory,
    #[error("query (t={t}, x={x}, v={v}) lies outside the zone t <= x/v, x > 0, v >= 0")]
    NotInZone { t: f64, x: f64, v: f64 },
    #[error("no front at t={t}: mu_r > 0 for every x >= 0")]
    NoFront { t: f64 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("maximum principle violated at node (ix={ix}, iv={iv}): f={f:e}, cap={cap:e}")]
    MaxPrincipleViolation { ix: usize, iv: usize, f: f64, cap: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
