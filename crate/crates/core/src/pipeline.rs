//! End-to-end processing: annotate, assign session topics, number topics.

use std::path::Path;

use rayon::prelude::*;

use crate::annotate::{AnnotatedSession, Annotator};
use crate::corpus::{Corpus, StrModel, StrParams};
use crate::error::Result;
use crate::kos::{Classification, Crosswalk, KeywordCategoryTable, Thesaurus, DEFAULT_NATIVE_VOCABULARY};
use crate::log::Session;
use crate::scalar::Weight;
use crate::segment::assign_topic_numbers;
use crate::text::StopWords;
use crate::topics::{assign_session_topics, DEFAULT_EPSILON};

/// Vocabularies and derived models needed to annotate actions.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    pub thesaurus: Thesaurus,
    pub classification: Classification,
    pub crosswalk: Crosswalk,
    pub str_model: StrModel,
    pub table: KeywordCategoryTable,
    pub stop_words: StopWords,
    /// Vocabulary tag of keywords that are thesaurus terms.
    pub native_vocabulary: String,
}

/// Paths to the four source files of a knowledge base; lookup table and
/// free-term model are either loaded or derived from the corpus.
#[derive(Debug, Clone, Copy)]
pub struct KnowledgeFiles<'a> {
    pub thesaurus: &'a Path,
    pub classification: &'a Path,
    pub crosswalk: &'a Path,
    pub lookup: Option<&'a Path>,
    pub str_model: Option<&'a Path>,
}

impl KnowledgeBase {
    /// Derives the lookup table and free-term model from `corpus`.
    pub fn from_corpus(
        thesaurus: Thesaurus,
        classification: Classification,
        crosswalk: Crosswalk,
        corpus: &Corpus,
        stop_words: StopWords,
        str_params: StrParams,
    ) -> Result<Self> {
        let native = DEFAULT_NATIVE_VOCABULARY;
        let table = KeywordCategoryTable::build(corpus, &thesaurus, native);
        table.validate(&classification)?;
        let str_model = StrModel::build(corpus, &thesaurus, native, &stop_words, str_params)?;
        Ok(Self {
            thesaurus,
            classification,
            crosswalk,
            str_model,
            table,
            stop_words,
            native_vocabulary: native.to_owned(),
        })
    }

    pub fn load(files: KnowledgeFiles<'_>, corpus: &Corpus, stop_words: StopWords, str_params: StrParams) -> Result<Self> {
        let thesaurus = Thesaurus::load(files.thesaurus)?;
        let classification = Classification::load(files.classification)?;
        let crosswalk = Crosswalk::load(files.crosswalk, &thesaurus)?;
        let mut kb = Self::from_corpus(thesaurus, classification, crosswalk, corpus, stop_words, str_params)?;
        if let Some(p) = files.lookup {
            kb.table = KeywordCategoryTable::load(p)?;
            kb.table.validate(&kb.classification)?;
        }
        if let Some(p) = files.str_model {
            kb.str_model = StrModel::load(p)?;
        }
        Ok(kb)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Pipeline<'a> {
    pub corpus: &'a Corpus,
    pub kb: &'a KnowledgeBase,
    /// Relative closeness for category re-ranking.
    pub epsilon: f64,
}

impl<'a> Pipeline<'a> {
    pub fn new(corpus: &'a Corpus, kb: &'a KnowledgeBase) -> Self {
        Self {
            corpus,
            kb,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }

    /// Annotation and session topics, without topic numbers.
    pub fn annotate<W: Weight>(&self, session: &Session) -> AnnotatedSession<W> {
        let mut annotated = Annotator::new(self.corpus, self.kb).annotate_session(session);
        assign_session_topics(&mut annotated, W::lit(self.epsilon));
        annotated
    }

    pub fn process<W: Weight>(&self, session: &Session) -> AnnotatedSession<W> {
        let mut s = self.annotate(session);
        assign_topic_numbers(&mut s, &self.kb.stop_words).expect("every action carries a session topic");
        s
    }

    pub fn process_all<W: Weight>(&self, sessions: &[Session]) -> Vec<AnnotatedSession<W>> {
        sessions.iter().map(|s| self.process(s)).collect()
    }

    /// Same output as [`Pipeline::process_all`]; sessions are independent.
    pub fn process_all_parallel<W: Weight>(&self, sessions: &[Session]) -> Vec<AnnotatedSession<W>> {
        sessions.par_iter().map(|s| self.process(s)).collect()
    }
}
