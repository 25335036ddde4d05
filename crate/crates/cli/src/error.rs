use std::process::ExitCode;

/// Failure classes with their exit statuses.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Invariant(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 1,
            CliError::Invariant(_) => 2,
            CliError::Numerical(_) => 3,
        })
    }

    /// Classifies a library error raised inside `module`.
    pub fn from_core(module: &str, e: kinld::Error) -> Self {
        use kinld::Error as E;
        let msg = format!("{module}: {e}");
        match e {
            E::InvalidParameter { .. } | E::NotInZone { .. } | E::GridMismatch(_) | E::Parse(_) => CliError::Usage(msg),
            E::MaxPrincipleViolation { .. } => CliError::Invariant(msg),
            E::NoTrajectory | E::NoFront { .. } | E::DegenerateFit(_) => CliError::Numerical(msg),
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Numerical(format!("cannot write {}: {e}", path.display()))
    }
}

/// Attaches a module prefix to library results.
pub trait Context<T> {
    fn ctx(self, module: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for kinld::Result<T> {
    fn ctx(self, module: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::from_core(module, e))
    }
}
