use std::collections::{HashMap, HashSet};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine as _;

use super::log::{Event, EventLog, EventLogEntry};
use super::ServiceError;
use crate::engine::{Answer, EngineError, Prompt, ResultSet, Session, StepOutcome};
use crate::model::{ArchStyle, DecisionTree};

/// Milliseconds since the Unix epoch.
pub type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0)
    })
}

/// 128 random bits, URL-safe base64 without padding.
pub fn new_session_id() -> String {
    URL_SAFE_NO_PAD.encode(rand::random::<[u8; 16]>())
}

#[derive(Debug)]
pub struct SessionRecord {
    pub session_id: String,
    pub session: Session,
    pub created_at: u64,
    pub updated_at: u64,
    next_seq: u64,
    expired: bool,
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct ReplayReport {
    pub sessions: usize,
    pub events: usize,
    /// Sessions dropped because their events could not be replayed.
    pub dropped: usize,
    /// Sessions dropped because they were idle longer than the TTL.
    pub expired: usize,
    pub unreadable_lines: usize,
}

pub struct StoreConfig {
    pub log_path: PathBuf,
    pub session_ttl: Duration,
    pub clock: Clock,
}

impl StoreConfig {
    pub fn new(log_path: impl Into<PathBuf>) -> Self {
        StoreConfig {
            log_path: log_path.into(),
            session_ttl: Duration::from_secs(24 * 60 * 60),
            clock: system_clock(),
        }
    }
}

/// Sessions over one shared tree, persisted to an event log.
///
/// Lock order: a session's mutex, then the log mutex. Compaction never holds
/// a session mutex while holding the log.
pub struct SessionStore {
    tree: Arc<DecisionTree>,
    sessions: RwLock<HashMap<String, Arc<Mutex<SessionRecord>>>>,
    log: Mutex<EventLog>,
    ttl: Duration,
    clock: Clock,
}

impl SessionStore {
    /// Opens the log, replays it, and compacts away expired or broken sessions.
    pub fn open(
        tree: Arc<DecisionTree>,
        config: StoreConfig,
    ) -> Result<(Self, ReplayReport), ServiceError> {
        let (entries, unreadable_lines) = EventLog::read(&config.log_path)?;
        let log = EventLog::open(&config.log_path)?;
        let store = SessionStore {
            tree,
            sessions: RwLock::new(HashMap::new()),
            log: Mutex::new(log),
            ttl: config.session_ttl,
            clock: config.clock,
        };

        let mut report = ReplayReport {
            events: entries.len(),
            unreadable_lines,
            ..Default::default()
        };
        let mut records: HashMap<String, SessionRecord> = HashMap::new();
        let mut broken: Vec<String> = Vec::new();
        for entry in &entries {
            if broken.contains(&entry.session_id) {
                continue;
            }
            if let Err(reason) = store.replay_one(&mut records, entry) {
                log::warn!("dropping session {}: {reason}", entry.session_id);
                records.remove(&entry.session_id);
                broken.push(entry.session_id.clone());
            }
        }
        report.dropped = broken.len();
        report.sessions = records.len();
        {
            let mut sessions = store.sessions.write().expect("session map poisoned");
            for (id, record) in records {
                sessions.insert(id, Arc::new(Mutex::new(record)));
            }
        }
        report.expired = store.compact()?;
        report.sessions -= report.expired;
        Ok((store, report))
    }

    fn replay_one(
        &self,
        records: &mut HashMap<String, SessionRecord>,
        entry: &EventLogEntry,
    ) -> Result<(), String> {
        match (records.get_mut(&entry.session_id), entry.event) {
            (None, Event::Created { style }) if entry.seq == 1 => {
                records.insert(
                    entry.session_id.clone(),
                    SessionRecord {
                        session_id: entry.session_id.clone(),
                        session: Session::start(self.tree.clone(), style),
                        created_at: entry.at,
                        updated_at: entry.at,
                        next_seq: 2,
                        expired: false,
                    },
                );
                Ok(())
            }
            (None, _) => Err(format!("event {} precedes session creation", entry.seq)),
            (Some(_), Event::Created { .. }) => Err("created twice".into()),
            (Some(record), event) => {
                if entry.seq != record.next_seq {
                    return Err(format!(
                        "expected event {}, found {}",
                        record.next_seq, entry.seq
                    ));
                }
                match event {
                    Event::Answered { answer } => record.session.answer(answer).map(drop),
                    Event::Undone => record.session.undo().map(drop),
                    Event::Created { .. } => unreachable!("handled above"),
                }
                .map_err(|e| format!("event {}: {e}", entry.seq))?;
                record.next_seq += 1;
                record.updated_at = entry.at;
                Ok(())
            }
        }
    }

    pub fn tree(&self) -> &Arc<DecisionTree> {
        &self.tree
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session map poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn now(&self) -> u64 {
        (self.clock)()
    }

    fn is_idle(&self, record: &SessionRecord, now: u64) -> bool {
        now.saturating_sub(record.updated_at) > self.ttl.as_millis() as u64
    }

    fn append(&self, entry: &EventLogEntry) -> Result<(), ServiceError> {
        self.log
            .lock()
            .expect("event log poisoned")
            .append(entry)
            .map_err(ServiceError::from)
    }

    pub fn create(&self, style: ArchStyle) -> Result<(String, Option<Prompt>), ServiceError> {
        let now = self.now();
        let session = Session::start(self.tree.clone(), style);
        let prompt = session.current_prompt().ok();
        let session_id = new_session_id();
        let record = Arc::new(Mutex::new(SessionRecord {
            session_id: session_id.clone(),
            session,
            created_at: now,
            updated_at: now,
            next_seq: 2,
            expired: false,
        }));
        // Registered before logging so a concurrent compaction keeps the event.
        self.sessions
            .write()
            .expect("session map poisoned")
            .insert(session_id.clone(), record);
        let logged = self.append(&EventLogEntry {
            session_id: session_id.clone(),
            seq: 1,
            at: now,
            event: Event::Created { style },
        });
        if let Err(e) = logged {
            self.sessions
                .write()
                .expect("session map poisoned")
                .remove(&session_id);
            return Err(e);
        }
        Ok((session_id, prompt))
    }

    fn record(&self, id: &str) -> Result<Arc<Mutex<SessionRecord>>, ServiceError> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or(ServiceError::UnknownSession)
    }

    /// Runs `f` on the session under its lock.
    fn with_record<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut SessionRecord) -> Result<T, ServiceError>,
    ) -> Result<T, ServiceError> {
        let record = self.record(id)?;
        let mut record = record.lock().expect("session poisoned");
        if record.expired || self.is_idle(&record, self.now()) {
            return Err(ServiceError::UnknownSession);
        }
        f(&mut record)
    }

    /// Applies a mutation to a copy, logs it, then commits the copy.
    fn mutate<T>(
        &self,
        id: &str,
        event: Event,
        op: impl FnOnce(&mut Session) -> Result<T, EngineError>,
    ) -> Result<T, ServiceError> {
        self.with_record(id, |record| {
            let mut next = record.session.clone();
            let out = op(&mut next)?;
            let now = self.now();
            self.append(&EventLogEntry {
                session_id: record.session_id.clone(),
                seq: record.next_seq,
                at: now,
                event,
            })?;
            record.session = next;
            record.next_seq += 1;
            record.updated_at = now;
            Ok(out)
        })
    }

    /// Current prompt, or `None` once the session is complete.
    pub fn question(&self, id: &str) -> Result<Option<Prompt>, ServiceError> {
        self.with_record(id, |record| Ok(record.session.current_prompt().ok()))
    }

    pub fn answer(&self, id: &str, answer: Answer) -> Result<StepOutcome, ServiceError> {
        self.mutate(id, Event::Answered { answer }, |s| s.answer(answer))
    }

    pub fn undo(&self, id: &str) -> Result<Prompt, ServiceError> {
        self.mutate(id, Event::Undone, Session::undo)
    }

    pub fn result(&self, id: &str) -> Result<ResultSet, ServiceError> {
        self.with_record(id, |record| Ok(record.session.result_set()?))
    }

    /// Snapshot of a session, for inspection and tests.
    pub fn session(&self, id: &str) -> Result<Session, ServiceError> {
        self.with_record(id, |record| Ok(record.session.clone()))
    }

    /// Drops sessions idle longer than the TTL and rewrites the log with the
    /// events of the remaining sessions. Returns the number of sessions dropped.
    pub fn compact(&self) -> Result<usize, ServiceError> {
        let now = self.now();
        let (live, expired) = {
            let mut sessions = self.sessions.write().expect("session map poisoned");
            let mut expired = Vec::new();
            for (id, record) in sessions.iter() {
                let mut record = record.lock().expect("session poisoned");
                if self.is_idle(&record, now) {
                    record.expired = true;
                    expired.push(id.clone());
                }
            }
            for id in &expired {
                sessions.remove(id);
            }
            let live: HashSet<String> = sessions.keys().cloned().collect();
            (live, expired.len())
        };

        let mut log = self.log.lock().expect("event log poisoned");
        let (entries, _) = EventLog::read(log.path())?;
        let kept: Vec<EventLogEntry> = entries
            .into_iter()
            .filter(|e| live.contains(&e.session_id))
            .collect();
        log.rewrite(&kept)?;
        Ok(expired)
    }
}
