//! Operator tooling: CSV ingest, log inspection, script replay and the
//! long-running server.

pub mod ingest;
pub mod server;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use resultline_core::gateway::ConfigError;
use resultline_core::records::{RecordsError, AUDIT_FILE};
use resultline_core::sim::{ScriptError, SimError};
use resultline_core::{GatewayConfig, RecordsStore};

pub use ingest::{load_results, load_students, IngestReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error("store: {0}")]
    Store(#[from] RecordsError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {message}", path.display())]
    Csv { path: PathBuf, message: String },
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for configuration and usage problems, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Script(_) => 2,
            _ => 1,
        }
    }
}

/// Defaults, then the config file, then a `--seed` override.
pub fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<GatewayConfig, CliError> {
    let mut config = match path {
        Some(p) => GatewayConfig::load(p)?,
        None => GatewayConfig::default(),
    };
    if seed.is_some() {
        config.rng_seed = seed;
    }
    Ok(config)
}

/// Opens the store with the integrity check the gateway relies on.
pub fn open_store(data_dir: &Path, config: &GatewayConfig) -> Result<RecordsStore, CliError> {
    Ok(RecordsStore::open(data_dir, config.auth.challenge_width)?)
}

/// The last `n` raw lines of the audit log, oldest first.
pub fn audit_tail(data_dir: &Path, n: usize) -> Result<Vec<String>, CliError> {
    if !data_dir.is_dir() {
        return Err(CliError::io(
            data_dir,
            io::Error::new(io::ErrorKind::NotFound, "data directory not found"),
        ));
    }
    let path = data_dir.join(AUDIT_FILE);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(CliError::io(path, e)),
    };
    let lines: Vec<&str> = text.lines().collect();
    let start = lines.len().saturating_sub(n);
    Ok(lines[start..].iter().map(|l| l.to_string()).collect())
}
