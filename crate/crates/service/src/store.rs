//! Plain-file persistence under the data directory.
//!
//! ```text
//! data/
//!   results/{experimentId}/{sessionId}.csv
//!   results/{experimentId}/{sessionId}.descriptions.csv
//!   sessions/{sessionId}.json
//!   tmp/                      staging area, same filesystem
//! ```
//!
//! Files are written to `tmp/` first and renamed into place, so readers of
//! `results/` and `sessions/` never observe a partial file.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use crate::ServiceError;

#[derive(Debug)]
pub struct FileStore {
    root: PathBuf,
    staged: AtomicU64,
    crash_before_rename: AtomicBool,
}

impl FileStore {
    /// Creates the directory layout and clears leftovers from interrupted
    /// writes.
    pub fn open(root: &Path) -> Result<Self, ServiceError> {
        for sub in ["results", "sessions", "tmp"] {
            let dir = root.join(sub);
            std::fs::create_dir_all(&dir).map_err(ServiceError::io(&dir))?;
        }
        let tmp = root.join("tmp");
        for entry in std::fs::read_dir(&tmp)
            .map_err(ServiceError::io(&tmp))?
            .flatten()
        {
            let _ = std::fs::remove_file(entry.path());
        }
        Ok(Self {
            root: root.to_path_buf(),
            staged: AtomicU64::new(0),
            crash_before_rename: AtomicBool::new(false),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn results_dir(&self, experiment_id: &str) -> PathBuf {
        self.root.join("results").join(experiment_id)
    }

    pub fn result_path(&self, experiment_id: &str, session_id: &str) -> PathBuf {
        self.results_dir(experiment_id)
            .join(format!("{session_id}.csv"))
    }

    pub fn descriptions_path(&self, experiment_id: &str, session_id: &str) -> PathBuf {
        self.results_dir(experiment_id).join(format!(
            "{session_id}{}",
            pbench_core::analysis::DESCRIPTIONS_SUFFIX
        ))
    }

    pub fn sessions_dir(&self) -> PathBuf {
        self.root.join("sessions")
    }

    /// Test hook: when set, writes stop after staging, as if the process
    /// died before the rename.
    #[doc(hidden)]
    pub fn set_crash_before_rename(&self, on: bool) {
        self.crash_before_rename.store(on, Ordering::SeqCst);
    }

    /// Writes `contents` to a staging file and syncs it. The returned handle
    /// must be committed to become visible.
    pub fn stage(&self, contents: &[u8]) -> Result<Staged, ServiceError> {
        let n = self.staged.fetch_add(1, Ordering::Relaxed);
        let path = self
            .root
            .join("tmp")
            .join(format!("{}-{n}.part", std::process::id()));
        let mut f = std::fs::File::create(&path).map_err(ServiceError::io(&path))?;
        f.write_all(contents).map_err(ServiceError::io(&path))?;
        f.sync_all().map_err(ServiceError::io(&path))?;
        Ok(Staged { path })
    }

    pub fn commit(&self, staged: Staged, dest: &Path) -> Result<(), ServiceError> {
        if self.crash_before_rename.load(Ordering::SeqCst) {
            std::mem::forget(staged);
            return Err(ServiceError::Io {
                path: dest.to_path_buf(),
                message: "simulated crash before rename".into(),
            });
        }
        if let Some(parent) = dest.parent() {
            std::fs::create_dir_all(parent).map_err(ServiceError::io(parent))?;
        }
        std::fs::rename(&staged.path, dest).map_err(ServiceError::io(dest))?;
        std::mem::forget(staged);
        Ok(())
    }

    pub fn write_atomic(&self, dest: &Path, contents: &[u8]) -> Result<(), ServiceError> {
        let staged = self.stage(contents)?;
        self.commit(staged, dest)
    }
}

/// A synced staging file; removed on drop unless committed.
#[derive(Debug)]
pub struct Staged {
    path: PathBuf,
}

impl Drop for Staged {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}
