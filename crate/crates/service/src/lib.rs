//! Collection service: hands out experiment specs and per-participant trial
//! orders, and accepts result uploads either through a presign-then-PUT
//! exchange or a single form post.

mod collection;
mod http;
pub mod store;

use std::path::{Path, PathBuf};

use pbench_core::ExperimentSpec;
use serde::Deserialize;

pub use collection::{
    system_clock, Clock, Collection, Session, SessionState, UploadPart, UploadTicket,
    DEFAULT_SESSION_TTL_MS, MAX_UPLOAD_BYTES, TICKET_TTL_MS,
};
pub use http::{router, serve, serve_on};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("unknown upload ticket")]
    UnknownTicket,
    #[error("session `{0}` has already uploaded its results")]
    AlreadyUploaded(String),
    #[error("session `{0}` has expired")]
    SessionExpired(String),
    #[error("upload ticket has expired; request a new one")]
    TicketExpired,
    #[error("upload ticket has already been used")]
    TicketUsed,
    #[error("rejected upload: {0}")]
    Schema(String),
    #[error("upload of {0} bytes exceeds the 5 MB limit")]
    TooLarge(usize),
    #[error("{0}")]
    Config(String),
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl ServiceError {
    pub fn io(path: &Path) -> impl FnOnce(std::io::Error) -> ServiceError + '_ {
        move |e| ServiceError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    /// HTTP status code for this error.
    pub fn status(&self) -> u16 {
        match self {
            ServiceError::UnknownExperiment(_)
            | ServiceError::UnknownSession(_)
            | ServiceError::UnknownTicket => 404,
            ServiceError::AlreadyUploaded(_) | ServiceError::TicketUsed => 409,
            ServiceError::SessionExpired(_) | ServiceError::TicketExpired => 410,
            ServiceError::Schema(_) => 422,
            ServiceError::TooLarge(_) => 413,
            ServiceError::Config(_) | ServiceError::Io { .. } => 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_host")]
    pub host: String,
    #[serde(default = "default_port")]
    pub port: u16,
    pub data_dir: PathBuf,
    pub experiments_dir: PathBuf,
    #[serde(default)]
    pub stimuli_dir: Option<PathBuf>,
}

fn default_host() -> String {
    "127.0.0.1".into()
}

fn default_port() -> u16 {
    8080
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>, experiments_dir: impl Into<PathBuf>) -> Self {
        Self {
            host: default_host(),
            port: default_port(),
            data_dir: data_dir.into(),
            experiments_dir: experiments_dir.into(),
            stimuli_dir: None,
        }
    }

    /// Reads a JSON config file. Relative paths resolve against the file's
    /// directory.
    pub fn load(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path).map_err(ServiceError::io(path))?;
        let mut cfg: ServiceConfig = serde_json::from_str(&text)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.data_dir = base.join(&cfg.data_dir);
        cfg.experiments_dir = base.join(&cfg.experiments_dir);
        cfg.stimuli_dir = cfg.stimuli_dir.map(|d| base.join(d));
        Ok(cfg)
    }

    pub fn build(&self, clock: Clock) -> Result<Collection, ServiceError> {
        let experiments = load_experiments(&self.experiments_dir)?;
        Collection::new(experiments, &self.data_dir, clock)
    }
}

/// Loads every `*.json` experiment in `dir`, in file-name order.
pub fn load_experiments(dir: &Path) -> Result<Vec<ExperimentSpec>, ServiceError> {
    if !dir.is_dir() {
        return Err(ServiceError::Config(format!(
            "experiments directory {} does not exist",
            dir.display()
        )));
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(ServiceError::io(dir))?
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            ExperimentSpec::load(p).map_err(|e| {
                let msg = e.to_string();
                let name = p.display().to_string();
                ServiceError::Config(if msg.contains(&name) {
                    msg
                } else {
                    format!("{name}: {msg}")
                })
            })
        })
        .collect()
}
