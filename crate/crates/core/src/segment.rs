//! Topic numbering and segmentation.
//!
//! Actions are numbered in order. An action reuses the number of an earlier action
//! with the same session topic; failing that, a search reuses the number of the
//! nearest earlier search whose query shares a term with its own (edit distance at
//! most 2); otherwise it opens a new number.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::annotate::{AnnotatedAction, AnnotatedSession};
use crate::error::{Error, Result};
use crate::kos::Classification;
use crate::log::Action;
use crate::scalar::Weight;
use crate::text::{terms_related, tokenize, StopWords};

/// Query and facet terms of a search, tokenized with the shared rule.
pub fn normalize_query_terms(action: &Action, stop_words: &StopWords) -> Vec<String> {
    action
        .query_terms
        .iter()
        .chain(&action.facet_terms)
        .flat_map(|t| tokenize(t, stop_words))
        .collect()
}

fn share_term(a: &[String], b: &[String]) -> bool {
    a.iter().any(|x| b.iter().any(|y| terms_related(x, y)))
}

pub fn queries_share_term(a: &Action, b: &Action, stop_words: &StopWords) -> bool {
    share_term(
        &normalize_query_terms(a, stop_words),
        &normalize_query_terms(b, stop_words),
    )
}

/// Sets `topic_number` on every action. Fails if an action has no session topic.
pub fn assign_topic_numbers<W: Weight>(session: &mut AnnotatedSession<W>, stop_words: &StopWords) -> Result<()> {
    let terms: Vec<Option<Vec<String>>> = session
        .actions
        .iter()
        .map(|a| a.kind().is_search().then(|| normalize_query_terms(&a.action, stop_words)))
        .collect();
    // every action sharing a topic shares its number, so one entry per topic suffices
    let mut by_topic: HashMap<String, u32> = HashMap::new();
    let mut numbers: Vec<u32> = Vec::with_capacity(session.actions.len());
    let mut next = 1;
    for (i, action) in session.actions.iter().enumerate() {
        let topic = action.session_topic.as_deref().ok_or_else(|| {
            Error::Input(format!(
                "session {:?}: action {} has no session topic",
                session.id, action.action.index
            ))
        })?;
        let number = by_topic.get(topic).copied().or_else(|| {
            let mine = terms[i].as_ref()?;
            (0..i).rev().find_map(|j| {
                let theirs = terms[j].as_ref()?;
                share_term(mine, theirs).then_some(numbers[j])
            })
        });
        let number = number.unwrap_or_else(|| {
            next += 1;
            next - 1
        });
        by_topic.entry(topic.to_owned()).or_insert(number);
        numbers.push(number);
    }
    for (a, n) in session.actions.iter_mut().zip(numbers) {
        a.topic_number = Some(n);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub topic_number: u32,
    /// 1-based action indices, inclusive.
    pub first: usize,
    pub last: usize,
    /// Distinct session topics in order of appearance.
    pub session_topics: Vec<String>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Maximal runs of equal consecutive topic numbers.
pub fn segments<W: Weight>(session: &AnnotatedSession<W>) -> Result<Vec<Segment>> {
    let mut out: Vec<Segment> = Vec::new();
    for (i, a) in session.actions.iter().enumerate() {
        let n = a.topic_number.ok_or_else(|| {
            Error::Input(format!("session {:?}: action {} has no topic number", session.id, i + 1))
        })?;
        let topic = a.session_topic.clone().unwrap_or_default();
        match out.last_mut() {
            Some(seg) if seg.topic_number == n => {
                seg.last = i + 1;
                if !seg.session_topics.contains(&topic) {
                    seg.session_topics.push(topic);
                }
            }
            _ => out.push(Segment {
                topic_number: n,
                first: i + 1,
                last: i + 1,
                session_topics: vec![topic],
            }),
        }
    }
    Ok(out)
}

/// Positions (1-based index of the later action) where consecutive topic numbers differ.
pub fn boundaries<W: Weight>(actions: &[AnnotatedAction<W>]) -> Vec<usize> {
    actions
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].topic_number != w[1].topic_number)
        .map(|(i, _)| i + 2)
        .collect()
}

/// Counts consecutive actions whose session topics are a main class and one of its
/// own subclasses. Such switches are reported, not merged.
pub fn class_subclass_alternations<W: Weight>(session: &AnnotatedSession<W>, classification: &Classification) -> usize {
    session
        .actions
        .windows(2)
        .filter(|w| match (&w[0].session_topic, &w[1].session_topic) {
            (Some(a), Some(b)) => classification.is_class_subclass_pair(a, b),
            _ => false,
        })
        .count()
}
