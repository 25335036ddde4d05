pub mod closed;
pub mod front;
pub mod kinetic;
pub mod minplus;
pub mod pdmp;

use std::path::PathBuf;

use crate::config::Resolver;

/// Settings shared by every subcommand, already resolved.
pub struct Shared<'a, 'b> {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub resolver: &'b mut Resolver<'a>,
}

/// Usage error unless `ok`.
pub fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<(), crate::error::CliError> {
    if ok {
        Ok(())
    } else {
        Err(crate::error::CliError::Usage(msg()))
    }
}
