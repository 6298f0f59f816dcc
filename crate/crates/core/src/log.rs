//! Transaction log parsing, sessionization and evaluation-set sampling.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Search actions are represented by at most this many result documents.
pub const MAX_RESULTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    SimpleSearch,
    AdvancedSearch,
    FacetSearch,
    DocView,
}

impl ActionKind {
    pub const ALL: [ActionKind; 4] = [
        ActionKind::SimpleSearch,
        ActionKind::AdvancedSearch,
        ActionKind::FacetSearch,
        ActionKind::DocView,
    ];

    pub fn is_search(self) -> bool {
        !matches!(self, ActionKind::DocView)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::SimpleSearch => "simple_search",
            ActionKind::AdvancedSearch => "advanced_search",
            ActionKind::FacetSearch => "facet_search",
            ActionKind::DocView => "doc_view",
        }
    }

    /// Human-readable name used in rendered tables.
    pub fn display_name(self) -> &'static str {
        match self {
            ActionKind::SimpleSearch => "Simple search",
            ActionKind::AdvancedSearch => "Advanced search",
            ActionKind::FacetSearch => "Facet search",
            ActionKind::DocView => "Document View",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One log line as written by the portal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawEvent {
    pub ts: i64,
    pub user: String,
    /// Session cookie; takes precedence over `user`/`client` as the grouping key.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cookie: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub client: Option<String>,
    pub kind: ActionKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub q: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub facets: Vec<String>,
    /// Advanced-search form fields; values are appended to the query terms.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fields: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub results: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum UserKey {
    Cookie(String),
    UserClient(String, Option<String>),
}

impl RawEvent {
    pub fn user_key(&self) -> UserKey {
        match &self.cookie {
            Some(c) => UserKey::Cookie(c.clone()),
            None => UserKey::UserClient(self.user.clone(), self.client.clone()),
        }
    }

    fn key_label(&self) -> String {
        match (&self.cookie, &self.client) {
            (Some(c), _) => c.clone(),
            (None, Some(addr)) => format!("{}@{}", self.user, addr),
            (None, None) => self.user.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    /// 1-based position within the session.
    pub index: usize,
    pub kind: ActionKind,
    pub timestamp: i64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub query_terms: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub facet_terms: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_id: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub result_doc_ids: Vec<String>,
}

impl Action {
    pub fn search(index: usize, timestamp: i64, query: &[&str], results: &[&str]) -> Self {
        Self {
            index,
            kind: ActionKind::SimpleSearch,
            timestamp,
            query_terms: query.iter().map(|s| s.to_string()).collect(),
            facet_terms: vec![],
            doc_id: None,
            result_doc_ids: results.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn doc_view(index: usize, timestamp: i64, doc: &str) -> Self {
        Self {
            index,
            kind: ActionKind::DocView,
            timestamp,
            query_terms: vec![],
            facet_terms: vec![],
            doc_id: Some(doc.to_string()),
            result_doc_ids: vec![],
        }
    }

    fn from_event(index: usize, e: &RawEvent) -> Self {
        let mut query_terms = e.q.clone();
        query_terms.extend(e.fields.values().cloned());
        Self {
            index,
            kind: e.kind,
            timestamp: e.ts,
            query_terms,
            facet_terms: e.facets.clone(),
            doc_id: e.doc.clone(),
            result_doc_ids: e.results.iter().take(MAX_RESULTS).cloned().collect(),
        }
    }

    /// Query and facet terms as entered, for display.
    pub fn display_terms(&self) -> String {
        self.query_terms
            .iter()
            .chain(&self.facet_terms)
            .map(String::as_str)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub actions: Vec<Action>,
}

impl Session {
    /// Seconds between the first and last action.
    pub fn duration(&self) -> i64 {
        match (self.actions.first(), self.actions.last()) {
            (Some(a), Some(b)) => b.timestamp - a.timestamp,
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.actions.is_empty() {
            return Err(Error::Validation(format!("session {:?} has no actions", self.id)));
        }
        for (i, a) in self.actions.iter().enumerate() {
            if a.index != i + 1 {
                return Err(Error::Validation(format!(
                    "session {:?}: action indices not contiguous at position {}",
                    self.id,
                    i + 1
                )));
            }
            if i > 0 && a.timestamp < self.actions[i - 1].timestamp {
                return Err(Error::Validation(format!(
                    "session {:?}: timestamp decreases at action {}",
                    self.id, a.index
                )));
            }
            check_action_shape(a.kind, a.doc_id.is_some(), !a.query_terms.is_empty(), a.result_doc_ids.len())
                .map_err(|m| Error::Validation(format!("session {:?} action {}: {m}", self.id, a.index)))?;
        }
        Ok(())
    }
}

fn check_action_shape(kind: ActionKind, has_doc: bool, has_query: bool, results: usize) -> std::result::Result<(), String> {
    if kind == ActionKind::DocView {
        if !has_doc {
            return Err("doc_view without a document id".into());
        }
        if has_query {
            return Err("doc_view carries query terms".into());
        }
    } else if results > MAX_RESULTS {
        return Err(format!("{results} results exceed the limit of {MAX_RESULTS}"));
    }
    Ok(())
}

/// Parses a JSON Lines transaction log. Result lists longer than [`MAX_RESULTS`]
/// are cut to their first entries.
pub fn parse_log(path: &Path) -> Result<Vec<RawEvent>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut events = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(parse_event(&line).map_err(|m| Error::parse(path, i + 1, m))?);
    }
    Ok(events)
}

fn parse_event(line: &str) -> std::result::Result<RawEvent, String> {
    let mut value: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
    // check the kind first so an unknown one is reported by name
    let kind = value
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or("missing string field `kind`")?;
    if ActionKind::parse(kind).is_none() {
        return Err(format!("unknown action kind {kind:?}"));
    }
    if let Some(results) = value.get_mut("results").and_then(|r| r.as_array_mut()) {
        results.truncate(MAX_RESULTS);
    }
    let event: RawEvent = serde_json::from_value(value).map_err(|e| e.to_string())?;
    check_action_shape(event.kind, event.doc.is_some(), !event.q.is_empty(), event.results.len())?;
    Ok(event)
}

pub const DEFAULT_INACTIVITY_TIMEOUT: i64 = 30 * 60;

/// Groups events per user key; a gap longer than `timeout` seconds, or a timestamp
/// that goes backwards, starts a new session. Sessions come out ordered by their
/// first event, and are named `<key>#<n>`.
pub fn sessionize(events: &[RawEvent], timeout: i64) -> Vec<Session> {
    let mut sessions: Vec<Session> = Vec::new();
    // key → (index into `sessions` of the open session, sessions opened so far)
    let mut open: HashMap<UserKey, (usize, usize)> = HashMap::new();
    for e in events {
        let key = e.user_key();
        let current = open.get(&key).copied();
        let continue_in = current.and_then(|(idx, _)| {
            let last = sessions[idx].actions.last().expect("sessions are non-empty").timestamp;
            let gap = e.ts - last;
            (0..=timeout).contains(&gap).then_some(idx)
        });
        match continue_in {
            Some(idx) => {
                let s = &mut sessions[idx];
                let action = Action::from_event(s.actions.len() + 1, e);
                s.actions.push(action);
            }
            None => {
                let n = current.map_or(1, |(_, n)| n + 1);
                sessions.push(Session {
                    id: format!("{}#{}", e.key_label(), n),
                    actions: vec![Action::from_event(1, e)],
                });
                open.insert(key, (sessions.len() - 1, n));
            }
        }
    }
    sessions
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionFilter {
    pub min_actions: usize,
    pub max_actions: usize,
    /// seconds
    pub max_duration: i64,
}

impl Default for SessionFilter {
    fn default() -> Self {
        Self {
            min_actions: 2,
            max_actions: 30,
            max_duration: 2 * 60 * 60,
        }
    }
}

impl SessionFilter {
    pub fn accepts(&self, s: &Session) -> bool {
        (self.min_actions..=self.max_actions).contains(&s.actions.len())
            && s.duration() <= self.max_duration
    }

    pub fn apply(&self, sessions: Vec<Session>) -> Vec<Session> {
        sessions.into_iter().filter(|s| self.accepts(s)).collect()
    }
}

pub fn filter_sessions(sessions: Vec<Session>, filter: &SessionFilter) -> Vec<Session> {
    filter.apply(sessions)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSpec {
    pub target_n: usize,
    pub per_length_cap: usize,
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            target_n: 100,
            per_length_cap: 4,
            seed: 0,
        }
    }
}

/// Picks up to `per_length_cap` sessions of each action count, shortest counts
/// first, until `target_n` are selected. Selection within a count is seeded
/// random; output is grouped by count and keeps pool order within a group.
pub fn sample_evaluation_set(sessions: &[Session], spec: &SampleSpec) -> Vec<Session> {
    let mut by_len: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, s) in sessions.iter().enumerate() {
        by_len.entry(s.actions.len()).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::new();
    for pool in by_len.values() {
        let room = spec.target_n - out.len();
        if room == 0 {
            break;
        }
        let take = spec.per_length_cap.min(room);
        let mut picked: Vec<usize> = pool.choose_multiple(&mut rng, take).copied().collect();
        picked.sort_unstable();
        out.extend(picked.into_iter().map(|i| sessions[i].clone()));
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub sessions: usize,
    pub total_actions: usize,
    pub mean_actions: f64,
    pub min_actions: usize,
    pub max_actions: usize,
    pub kind_counts: BTreeMap<ActionKind, usize>,
    /// seconds
    pub mean_duration: f64,
}

pub fn dataset_stats(sessions: &[Session]) -> DatasetStats {
    if sessions.is_empty() {
        return DatasetStats::default();
    }
    let mut kind_counts = BTreeMap::new();
    for a in sessions.iter().flat_map(|s| &s.actions) {
        *kind_counts.entry(a.kind).or_insert(0) += 1;
    }
    let lens = sessions.iter().map(|s| s.actions.len());
    let total_actions: usize = lens.clone().sum();
    let n = sessions.len() as f64;
    DatasetStats {
        sessions: sessions.len(),
        total_actions,
        mean_actions: total_actions as f64 / n,
        min_actions: lens.clone().min().unwrap_or(0),
        max_actions: lens.max().unwrap_or(0),
        kind_counts,
        mean_duration: sessions.iter().map(|s| s.duration() as f64).sum::<f64>() / n,
    }
}
