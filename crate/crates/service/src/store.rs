use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use topicseg::corpus::Corpus;
use topicseg::eval::{Rating, RatingStore};
use topicseg::io::read_jsonl;
use topicseg::kos::Classification;
use topicseg::render::SessionTable;
use topicseg::AnnotatedSession;

use crate::{ServiceConfig, ServiceError};

/// Append-only JSON Lines file of ratings. Every record is flushed and synced to
/// disk before [`RatingLog::append`] returns.
#[derive(Debug)]
pub struct RatingLog {
    path: PathBuf,
    file: File,
}

impl RatingLog {
    /// Opens (or creates) the log and returns the ratings it holds, in file order.
    /// A final record without a trailing newline is a write cut short by a crash;
    /// it is dropped and the file truncated to the last complete record.
    pub fn open(path: &Path) -> Result<(Self, Vec<Rating>), ServiceError> {
        let io_err = |source| ServiceError::Log { path: path.to_owned(), source };
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)
            .map_err(io_err)?;
        let mut raw = Vec::new();
        file.read_to_end(&mut raw).map_err(io_err)?;
        let complete = raw.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        if complete < raw.len() {
            file.set_len(complete as u64).map_err(io_err)?;
            file.seek(SeekFrom::End(0)).map_err(io_err)?;
        }

        let mut ratings = Vec::new();
        for (i, line) in BufReader::new(&raw[..complete]).lines().enumerate() {
            let line = line.map_err(io_err)?;
            if line.trim().is_empty() {
                continue;
            }
            let rating = serde_json::from_str(&line).map_err(|e| ServiceError::Replay {
                path: path.to_owned(),
                line: i + 1,
                message: e.to_string(),
            })?;
            ratings.push(rating);
        }
        Ok((Self { path: path.to_owned(), file }, ratings))
    }

    pub fn append(&mut self, rating: &Rating) -> Result<(), ServiceError> {
        let mut line = serde_json::to_vec(rating).expect("ratings serialize");
        line.push(b'\n');
        self.file
            .write_all(&line)
            .and_then(|()| self.file.flush())
            .and_then(|()| self.file.sync_data())
            .map_err(|source| ServiceError::Log { path: self.path.clone(), source })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SessionEntry {
    pub table: SessionTable,
    pub duration_s: i64,
}

/// Evaluation set, current ratings, and the log they are persisted to.
#[derive(Debug)]
pub struct AppState {
    pub(crate) sessions: Vec<SessionEntry>,
    index: HashMap<String, usize>,
    ratings: RwLock<RatingStore>,
    log: Mutex<RatingLog>,
}

impl AppState {
    pub fn load(config: &ServiceConfig) -> Result<Self, ServiceError> {
        let sessions: Vec<AnnotatedSession> = read_jsonl(&config.sessions)?;
        let corpus = match &config.corpus {
            Some(p) => Corpus::load(p)?,
            None => Corpus::default(),
        };
        let classification = match &config.classification {
            Some(p) => Classification::load(p)?,
            None => Classification::default(),
        };
        let (log, replayed) = RatingLog::open(&config.ratings)?;
        Self::new(&sessions, &corpus, &classification, log, replayed)
    }

    pub fn new(
        sessions: &[AnnotatedSession],
        corpus: &Corpus,
        classification: &Classification,
        log: RatingLog,
        replayed: Vec<Rating>,
    ) -> Result<Self, ServiceError> {
        let mut index = HashMap::new();
        let mut entries = Vec::with_capacity(sessions.len());
        for s in sessions {
            if index.insert(s.id.clone(), entries.len()).is_some() {
                return Err(ServiceError::DuplicateSession(s.id.clone()));
            }
            entries.push(SessionEntry {
                table: SessionTable::build(s, corpus, classification),
                duration_s: s.duration(),
            });
        }
        Ok(Self {
            sessions: entries,
            index,
            ratings: RwLock::new(RatingStore::from_ratings(replayed)),
            log: Mutex::new(log),
        })
    }

    pub(crate) fn session(&self, id: &str) -> Option<&SessionEntry> {
        self.index.get(id).map(|&i| &self.sessions[i])
    }

    pub fn session_count(&self) -> usize {
        self.sessions.len()
    }

    /// Persists the rating, then makes it visible. The log lock is held across both
    /// steps so the in-memory order always matches the file order.
    pub fn record(&self, rating: Rating) -> Result<(), ServiceError> {
        let mut log = self.log.lock().expect("log lock poisoned");
        log.append(&rating)?;
        self.ratings.write().expect("ratings lock poisoned").insert(rating);
        Ok(())
    }

    pub fn with_ratings<T>(&self, f: impl FnOnce(&RatingStore) -> T) -> T {
        f(&self.ratings.read().expect("ratings lock poisoned"))
    }
}
