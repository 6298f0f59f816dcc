//! Annotation of actions with weighted thesaurus keywords and classification categories.
//!
//! A document view is represented by the keywords of the viewed document; a search
//! by the keywords of its (at most twenty) result documents. Keyword weights fall
//! off with the keyword's position in the document's list, and search results are
//! additionally damped linearly by their rank. Category weights are the summed
//! weights of the keywords the lookup table maps to each category.

use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::kos::KeywordCategoryTable;
use crate::log::{Action, ActionKind, Session, MAX_RESULTS};
use crate::pipeline::KnowledgeBase;
use crate::scalar::Weight;
use crate::text::{fold, tokenize};

/// Ordered `(label, weight)` pairs with unique labels.
///
/// Lists built with [`LabelList::from_weights`] are sorted by descending weight,
/// ties by label. Re-ranked category lists keep the order they were given.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelList<W> {
    entries: Vec<(String, W)>,
}

impl<W> Default for LabelList<W> {
    fn default() -> Self {
        Self { entries: Vec::new() }
    }
}

impl<W: Weight> LabelList<W> {
    /// Sums the weights of repeated labels (in iteration order) and sorts.
    pub fn from_weights<S, I>(weights: I) -> Self
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, W)>,
    {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut entries: Vec<(String, W)> = Vec::new();
        for (label, w) in weights {
            let label = label.into();
            match index.get(&label) {
                Some(&i) => entries[i].1 = entries[i].1 + w,
                None => {
                    index.insert(label.clone(), entries.len());
                    entries.push((label, w));
                }
            }
        }
        entries.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("weights are never NaN")
                .then_with(|| a.0.cmp(&b.0))
        });
        Self { entries }
    }

    /// Keeps the given order. Labels must be unique.
    pub(crate) fn from_ordered(entries: Vec<(String, W)>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[(String, W)] {
        &self.entries
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(l, _)| l.as_str())
    }

    pub fn top(&self) -> Option<&str> {
        self.entries.first().map(|(l, _)| l.as_str())
    }

    pub fn weight(&self, label: &str) -> Option<W> {
        self.entries.iter().find(|(l, _)| l == label).map(|&(_, w)| w)
    }

    pub fn total(&self) -> W {
        self.entries.iter().map(|&(_, w)| w).sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<W: Serialize> Serialize for LabelList<W> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries.serialize(s)
    }
}

impl<'de, W: Deserialize<'de>> Deserialize<'de> for LabelList<W> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Vec::<(String, W)>::deserialize(d).map(|entries| Self { entries })
    }
}

/// Discount for the keyword at 1-based `position` of a document's keyword list:
/// `1 / log2(position + 1)`.
pub fn keyword_weight<W: Weight>(position: usize) -> Result<W> {
    if position < 1 {
        return Err(Error::Domain("keyword position must be at least 1".into()));
    }
    Ok(W::one() / W::from_count(position + 1).log2())
}

/// Linear damping for the result document at 1-based `rank` in [1, 20]:
/// `1.05 - 0.05 * rank`, evaluated as `(21 - rank) / 20` so that the rounding is exact.
pub fn document_factor<W: Weight>(rank: usize) -> Result<W> {
    if !(1..=MAX_RESULTS).contains(&rank) {
        return Err(Error::Domain(format!("result rank {rank} outside [1, {MAX_RESULTS}]")));
    }
    Ok(W::from_count(21 - rank) / W::from_count(20))
}

/// Category weights as the sum of the weights of keywords mapped to each category.
pub fn derive_categories<W: Weight>(keywords: &LabelList<W>, table: &KeywordCategoryTable) -> LabelList<W> {
    LabelList::from_weights(
        keywords
            .entries()
            .iter()
            .filter_map(|(k, w)| table.lookup(k).map(|c| (c, *w))),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationFlag {
    /// A referenced document is missing from the corpus.
    UnknownDocument(String),
    /// The viewed document resolves to no thesaurus keywords.
    NoKeywords(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedAction<W> {
    #[serde(flatten)]
    pub action: Action,
    pub keywords: LabelList<W>,
    pub categories: LabelList<W>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_topic: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic_number: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<AnnotationFlag>,
}

impl<W: Weight> AnnotatedAction<W> {
    pub fn new(action: Action, keywords: LabelList<W>, categories: LabelList<W>) -> Self {
        Self {
            action,
            keywords,
            categories,
            session_topic: None,
            topic_number: None,
            flags: Vec::new(),
        }
    }

    pub fn kind(&self) -> ActionKind {
        self.action.kind
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedSession<W> {
    pub id: String,
    pub actions: Vec<AnnotatedAction<W>>,
}

impl<W: Weight> AnnotatedSession<W> {
    pub fn duration(&self) -> i64 {
        match (self.actions.first(), self.actions.last()) {
            (Some(a), Some(b)) => b.action.timestamp - a.action.timestamp,
            _ => 0,
        }
    }

    pub fn session_topics(&self) -> Vec<Option<&str>> {
        self.actions.iter().map(|a| a.session_topic.as_deref()).collect()
    }

    pub fn topic_numbers(&self) -> Vec<Option<u32>> {
        self.actions.iter().map(|a| a.topic_number).collect()
    }
}

/// Annotates actions against a corpus and a knowledge base.
#[derive(Debug, Clone, Copy)]
pub struct Annotator<'a> {
    pub corpus: &'a Corpus,
    pub kb: &'a KnowledgeBase,
}

impl<'a> Annotator<'a> {
    pub fn new(corpus: &'a Corpus, kb: &'a KnowledgeBase) -> Self {
        Self { corpus, kb }
    }

    /// Thesaurus descriptors for a document, trying in turn: its native keywords,
    /// its foreign keywords through the crosswalk, and its title through the
    /// free-term model. Only the first tier the document qualifies for is used.
    /// Repeated descriptors keep their first position.
    pub fn resolve_document_keywords(&self, doc: &Document) -> Vec<String> {
        let kb = self.kb;
        let native = fold(&kb.native_vocabulary);
        let (own, foreign): (Vec<_>, Vec<_>) =
            doc.keywords.iter().partition(|k| fold(&k.vocabulary) == native);

        let resolved: Vec<&str> = if !own.is_empty() {
            own.iter().filter_map(|k| kb.thesaurus.resolve(&k.term)).collect()
        } else if !foreign.is_empty() {
            foreign
                .iter()
                .flat_map(|k| kb.crosswalk.map(&k.vocabulary, &k.term))
                .collect()
        } else {
            tokenize(&doc.title, &kb.stop_words)
                .iter()
                .flat_map(|t| kb.str_model.map_free_term(t))
                .collect()
        };

        let mut out: Vec<String> = Vec::with_capacity(resolved.len());
        for d in resolved {
            if !out.iter().any(|x| x == d) {
                out.push(d.to_owned());
            }
        }
        out
    }

    fn positional_weights<W: Weight>(keywords: &[String]) -> impl Iterator<Item = (&str, W)> + '_ {
        keywords.iter().enumerate().map(|(i, k)| {
            (k.as_str(), keyword_weight::<W>(i + 1).expect("positions start at 1"))
        })
    }

    pub fn annotate_doc_view<W: Weight>(&self, action: &Action) -> AnnotatedAction<W> {
        let mut flags = Vec::new();
        let keywords = match action.doc_id.as_deref() {
            Some(id) => match self.corpus.get(id) {
                Some(doc) => {
                    let ks = self.resolve_document_keywords(doc);
                    if ks.is_empty() {
                        flags.push(AnnotationFlag::NoKeywords(id.to_owned()));
                    }
                    LabelList::from_weights(Self::positional_weights::<W>(&ks))
                }
                None => {
                    flags.push(AnnotationFlag::UnknownDocument(id.to_owned()));
                    LabelList::default()
                }
            },
            None => LabelList::default(),
        };
        let categories = derive_categories(&keywords, &self.kb.table);
        AnnotatedAction {
            flags,
            ..AnnotatedAction::new(action.clone(), keywords, categories)
        }
    }

    /// Sums `keyword_weight(position) * document_factor(rank)` over every keyword of
    /// every known result document.
    pub fn annotate_search<W: Weight>(&self, action: &Action) -> AnnotatedAction<W> {
        let mut flags = Vec::new();
        let mut contributions: Vec<(String, W)> = Vec::new();
        for (i, id) in action.result_doc_ids.iter().take(MAX_RESULTS).enumerate() {
            let Some(doc) = self.corpus.get(id) else {
                flags.push(AnnotationFlag::UnknownDocument(id.clone()));
                continue;
            };
            let factor = document_factor::<W>(i + 1).expect("rank within result limit");
            let ks = self.resolve_document_keywords(doc);
            contributions.extend(
                Self::positional_weights::<W>(&ks).map(|(k, w)| (k.to_owned(), w * factor)),
            );
        }
        let keywords = LabelList::from_weights(contributions);
        let categories = derive_categories(&keywords, &self.kb.table);
        AnnotatedAction {
            flags,
            ..AnnotatedAction::new(action.clone(), keywords, categories)
        }
    }

    pub fn annotate_action<W: Weight>(&self, action: &Action) -> AnnotatedAction<W> {
        if action.kind.is_search() {
            self.annotate_search(action)
        } else {
            self.annotate_doc_view(action)
        }
    }

    pub fn annotate_session<W: Weight>(&self, session: &Session) -> AnnotatedSession<W> {
        AnnotatedSession {
            id: session.id.clone(),
            actions: session.actions.iter().map(|a| self.annotate_action(a)).collect(),
        }
    }
}
