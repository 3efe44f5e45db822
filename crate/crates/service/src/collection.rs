//! Sessions, upload tickets and result persistence, independent of HTTP.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use pbench_core::model::{parse_descriptions, parse_results, ExperimentSpec, Paradigm};
use pbench_core::shuffle::{mix_seed, randomize_trials, SHUFFLE_ALGORITHM};
use serde::{Deserialize, Serialize};

use crate::store::FileStore;
use crate::ServiceError;

pub const TICKET_TTL_MS: u64 = 15 * 60 * 1000;
pub const DEFAULT_SESSION_TTL_MS: u64 = 24 * 60 * 60 * 1000;
pub const MAX_UPLOAD_BYTES: usize = 5 * 1024 * 1024;

pub type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionState {
    Open,
    Uploaded,
    Expired,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Session {
    pub session_id: String,
    pub experiment_id: String,
    /// Per-experiment creation counter the assignment seed is derived from.
    pub counter: u64,
    pub seed: u64,
    pub shuffle: String,
    pub assignment: Vec<usize>,
    pub created_at_ms: u64,
    pub state: SessionState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UploadTicket {
    pub token: String,
    pub upload_path: String,
    pub expires_at_ms: u64,
}

#[derive(Debug)]
struct TicketEntry {
    session_id: String,
    expires_at_ms: u64,
}

#[derive(Debug, Default)]
struct Registry {
    sessions: HashMap<String, Session>,
    counters: HashMap<String, u64>,
    tickets: HashMap<String, TicketEntry>,
    /// Active ticket per session.
    active: HashMap<String, String>,
    used: HashSet<String>,
}

/// Which file of a session an upload targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UploadPart {
    Results,
    Descriptions,
}

pub struct Collection {
    experiments: BTreeMap<String, Arc<ExperimentSpec>>,
    store: FileStore,
    registry: Mutex<Registry>,
    clock: Clock,
    session_ttl_ms: u64,
}

fn random_token() -> String {
    format!("{:032x}", rand::random::<u128>())
}

impl Collection {
    pub fn new(
        experiments: Vec<ExperimentSpec>,
        data_dir: &Path,
        clock: Clock,
    ) -> Result<Self, ServiceError> {
        let mut map = BTreeMap::new();
        for spec in experiments {
            if map.contains_key(&spec.id) {
                return Err(ServiceError::Config(format!(
                    "duplicate experiment id `{}`",
                    spec.id
                )));
            }
            map.insert(spec.id.clone(), Arc::new(spec));
        }
        let store = FileStore::open(data_dir)?;
        let registry = Mutex::new(load_sessions(&store)?);
        Ok(Self {
            experiments: map,
            store,
            registry,
            clock,
            session_ttl_ms: DEFAULT_SESSION_TTL_MS,
        })
    }

    pub fn with_session_ttl(mut self, ttl_ms: u64) -> Self {
        self.session_ttl_ms = ttl_ms;
        self
    }

    pub fn store(&self) -> &FileStore {
        &self.store
    }

    pub fn experiment(&self, id: &str) -> Result<&Arc<ExperimentSpec>, ServiceError> {
        self.experiments
            .get(id)
            .ok_or_else(|| ServiceError::UnknownExperiment(id.to_string()))
    }

    pub fn experiment_ids(&self) -> impl Iterator<Item = &str> {
        self.experiments.keys().map(String::as_str)
    }

    pub fn session(&self, id: &str) -> Option<Session> {
        self.registry.lock().unwrap().sessions.get(id).cloned()
    }

    fn now(&self) -> u64 {
        (self.clock)()
    }

    /// Opens a session whose trial order derives from the experiment seed
    /// and the next value of the experiment's session counter.
    pub fn create_session(&self, experiment_id: &str) -> Result<Session, ServiceError> {
        let spec = self.experiment(experiment_id)?;
        let mut reg = self.registry.lock().unwrap();
        let counter = {
            let c = reg.counters.entry(experiment_id.to_string()).or_insert(0);
            let v = *c;
            *c += 1;
            v
        };
        let seed = mix_seed(spec.seed, counter);
        let assignment = randomize_trials(&spec.trial_table, seed)
            .map_err(|e| ServiceError::Config(format!("experiment `{experiment_id}`: {e}")))?;
        let mut session_id = random_token();
        while reg.sessions.contains_key(&session_id) {
            session_id = random_token();
        }
        let session = Session {
            session_id: session_id.clone(),
            experiment_id: experiment_id.to_string(),
            counter,
            seed,
            shuffle: SHUFFLE_ALGORITHM.to_string(),
            assignment,
            created_at_ms: self.now(),
            state: SessionState::Open,
        };
        self.persist_session(&session)?;
        reg.sessions.insert(session_id, session.clone());
        Ok(session)
    }

    fn persist_session(&self, session: &Session) -> Result<(), ServiceError> {
        let path = self
            .store
            .sessions_dir()
            .join(format!("{}.json", session.session_id));
        let json = serde_json::to_vec_pretty(session).expect("session serializes");
        self.store.write_atomic(&path, &json)
    }

    /// Looks up an open session, expiring it first if its lifetime has passed.
    fn open_session(&self, reg: &mut Registry, session_id: &str) -> Result<Session, ServiceError> {
        let now = self.now();
        let session = reg
            .sessions
            .get_mut(session_id)
            .ok_or_else(|| ServiceError::UnknownSession(session_id.to_string()))?;
        if session.state == SessionState::Open && now >= session.created_at_ms + self.session_ttl_ms
        {
            session.state = SessionState::Expired;
            let snapshot = session.clone();
            self.persist_session(&snapshot)?;
        }
        match session.state {
            SessionState::Open => Ok(session.clone()),
            SessionState::Uploaded => Err(ServiceError::AlreadyUploaded(session_id.to_string())),
            SessionState::Expired => Err(ServiceError::SessionExpired(session_id.to_string())),
        }
    }

    /// Issues a single-use upload ticket, revoking any earlier one.
    pub fn presign_upload(&self, session_id: &str) -> Result<UploadTicket, ServiceError> {
        let mut reg = self.registry.lock().unwrap();
        self.open_session(&mut reg, session_id)?;
        if let Some(old) = reg.active.remove(session_id) {
            reg.tickets.remove(&old);
        }
        let token = random_token();
        let expires_at_ms = self.now() + TICKET_TTL_MS;
        reg.tickets.insert(
            token.clone(),
            TicketEntry {
                session_id: session_id.to_string(),
                expires_at_ms,
            },
        );
        reg.active.insert(session_id.to_string(), token.clone());
        Ok(UploadTicket {
            upload_path: format!("/uploads/{token}"),
            token,
            expires_at_ms,
        })
    }

    fn ticket_session(&self, reg: &mut Registry, token: &str) -> Result<Session, ServiceError> {
        if reg.used.contains(token) {
            return Err(ServiceError::TicketUsed);
        }
        let entry = reg.tickets.get(token).ok_or(ServiceError::UnknownTicket)?;
        if self.now() >= entry.expires_at_ms {
            let session_id = entry.session_id.clone();
            reg.tickets.remove(token);
            reg.active.remove(&session_id);
            return Err(ServiceError::TicketExpired);
        }
        let session_id = entry.session_id.clone();
        self.open_session(reg, &session_id)
    }

    /// Stores a result upload made with a ticket.
    pub fn store_result(
        &self,
        token: &str,
        part: UploadPart,
        body: &str,
    ) -> Result<Session, ServiceError> {
        let session = {
            let mut reg = self.registry.lock().unwrap();
            self.ticket_session(&mut reg, token)?
        };
        match part {
            UploadPart::Results => self.persist_results(&session, body, Some(token)),
            UploadPart::Descriptions => {
                self.persist_descriptions(&session, body)?;
                Ok(session)
            }
        }
    }

    /// Single-step upload of the `dataOutput` form field.
    pub fn accept_form_result(
        &self,
        session_id: &str,
        data_output: &str,
        descriptions: Option<&str>,
    ) -> Result<Session, ServiceError> {
        let session = {
            let mut reg = self.registry.lock().unwrap();
            self.open_session(&mut reg, session_id)?
        };
        if let Some(d) = descriptions {
            self.validate_results(&session, data_output)?;
            self.persist_descriptions(&session, d)?;
        }
        self.persist_results(&session, data_output, None)
    }

    fn paradigm(&self, session: &Session) -> Result<Paradigm, ServiceError> {
        Ok(self.experiment(&session.experiment_id)?.paradigm)
    }

    fn validate_results(&self, session: &Session, body: &str) -> Result<(), ServiceError> {
        check_size(body)?;
        let records = parse_results(self.paradigm(session)?, body)
            .map_err(|e| ServiceError::Schema(e.to_string()))?;
        check_session_column(records.iter().map(|r| r.session()), &session.session_id)
    }

    fn persist_descriptions(&self, session: &Session, body: &str) -> Result<(), ServiceError> {
        check_size(body)?;
        if self.paradigm(session)? != Paradigm::Bubble {
            return Err(ServiceError::Schema(
                "descriptions are only accepted for bubble experiments".into(),
            ));
        }
        let rows = parse_descriptions(body).map_err(|e| ServiceError::Schema(e.to_string()))?;
        check_session_column(rows.iter().map(|r| r.session.as_str()), &session.session_id)?;
        let dest = self
            .store
            .descriptions_path(&session.experiment_id, &session.session_id);
        self.store.write_atomic(&dest, body.as_bytes())
    }

    /// Validates, stages, then under the registry lock re-checks the session
    /// and ticket, renames into place and marks the session uploaded.
    fn persist_results(
        &self,
        session: &Session,
        body: &str,
        token: Option<&str>,
    ) -> Result<Session, ServiceError> {
        self.validate_results(session, body)?;
        let staged = self.store.stage(body.as_bytes())?;

        let mut reg = self.registry.lock().unwrap();
        match token {
            Some(t) => {
                self.ticket_session(&mut reg, t)?;
            }
            None => {
                self.open_session(&mut reg, &session.session_id)?;
            }
        }
        let dest = self
            .store
            .result_path(&session.experiment_id, &session.session_id);
        self.store.commit(staged, &dest)?;

        let mut updated = reg.sessions[&session.session_id].clone();
        updated.state = SessionState::Uploaded;
        self.persist_session(&updated)?;
        reg.sessions
            .insert(updated.session_id.clone(), updated.clone());
        if let Some(active) = reg.active.remove(&session.session_id) {
            reg.tickets.remove(&active);
            reg.used.insert(active);
        }
        if let Some(t) = token {
            reg.used.insert(t.to_string());
        }
        Ok(updated)
    }
}

fn check_size(body: &str) -> Result<(), ServiceError> {
    if body.len() > MAX_UPLOAD_BYTES {
        return Err(ServiceError::TooLarge(body.len()));
    }
    Ok(())
}

fn check_session_column<'a>(
    mut sessions: impl Iterator<Item = &'a str>,
    expected: &str,
) -> Result<(), ServiceError> {
    match sessions.position(|s| s != expected) {
        Some(i) => Err(ServiceError::Schema(format!(
            "row {}, column `session`: does not match session {expected}",
            i + 1
        ))),
        None => Ok(()),
    }
}

fn load_sessions(store: &FileStore) -> Result<Registry, ServiceError> {
    let dir = store.sessions_dir();
    let mut reg = Registry::default();
    let mut paths: Vec<_> = std::fs::read_dir(&dir)
        .map_err(ServiceError::io(&dir))?
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    for path in paths {
        let text = std::fs::read_to_string(&path).map_err(ServiceError::io(&path))?;
        let session: Session = serde_json::from_str(&text)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        let next = reg
            .counters
            .entry(session.experiment_id.clone())
            .or_insert(0);
        *next = (*next).max(session.counter + 1);
        reg.sessions.insert(session.session_id.clone(), session);
    }
    Ok(reg)
}
