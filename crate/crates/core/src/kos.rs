//! Knowledge organization systems: thesaurus, classification, cross-concordance
//! and the keyword→category lookup table derived from a tagged corpus.
//!
//! All structures are immutable once loaded and can be shared freely between threads.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::io::read_json_array;
use crate::text::fold;

/// Vocabulary tag that marks a document keyword as a thesaurus term.
pub const DEFAULT_NATIVE_VOCABULARY: &str = "thesaurus";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Descriptor {
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub synonyms: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Thesaurus {
    descriptors: Vec<Descriptor>,
    by_id: HashMap<String, usize>,
    /// folded preferred label or synonym → descriptor index
    terms: HashMap<String, usize>,
    synonym_count: usize,
}

impl Thesaurus {
    pub fn load(path: &Path) -> Result<Self> {
        Self::new(read_json_array(path)?)
    }

    pub fn new(descriptors: Vec<Descriptor>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(descriptors.len());
        let mut terms: HashMap<String, usize> = HashMap::new();
        for (i, d) in descriptors.iter().enumerate() {
            if by_id.insert(d.id.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate descriptor id {:?}", d.id)));
            }
            if let Some(&j) = terms.get(&fold(&d.label)) {
                return Err(Error::Validation(format!(
                    "label {:?} of {:?} collides with descriptor {:?}",
                    d.label, d.id, descriptors[j].id
                )));
            }
            terms.insert(fold(&d.label), i);
        }
        let mut synonym_count = 0;
        for (i, d) in descriptors.iter().enumerate() {
            for syn in &d.synonyms {
                match terms.get(&fold(syn)) {
                    Some(&j) if j == i => {}
                    Some(&j) => {
                        return Err(Error::Validation(format!(
                            "synonym {:?} of {:?} already resolves to {:?}",
                            syn, d.id, descriptors[j].id
                        )))
                    }
                    None => {
                        terms.insert(fold(syn), i);
                        synonym_count += 1;
                    }
                }
            }
        }
        Ok(Self {
            descriptors,
            by_id,
            terms,
            synonym_count,
        })
    }

    /// Case-insensitive lookup of a preferred label or synonym.
    pub fn resolve(&self, term: &str) -> Option<&str> {
        self.terms
            .get(&fold(term.trim()))
            .map(|&i| self.descriptors[i].id.as_str())
    }

    pub fn descriptor(&self, id: &str) -> Option<&Descriptor> {
        self.by_id.get(id).map(|&i| &self.descriptors[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    pub fn descriptors(&self) -> &[Descriptor] {
        &self.descriptors
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn synonym_count(&self) -> usize {
        self.synonym_count
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Category {
    pub code: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
}

/// Two-level category scheme: main classes and their subclasses.
#[derive(Debug, Clone, Default)]
pub struct Classification {
    categories: Vec<Category>,
    by_code: HashMap<String, usize>,
}

impl Classification {
    pub fn load(path: &Path) -> Result<Self> {
        Self::new(read_json_array(path)?)
    }

    pub fn new(categories: Vec<Category>) -> Result<Self> {
        let mut by_code = HashMap::with_capacity(categories.len());
        for (i, c) in categories.iter().enumerate() {
            if by_code.insert(c.code.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate category code {:?}", c.code)));
            }
        }
        for c in &categories {
            let Some(parent) = &c.parent else { continue };
            let Some(&p) = by_code.get(parent) else {
                return Err(Error::Validation(format!(
                    "category {:?} names unknown parent {:?}",
                    c.code, parent
                )));
            };
            // a subclass may not itself have subclasses; this also rules out cycles
            if categories[p].parent.is_some() {
                return Err(Error::Validation(format!(
                    "category {:?} is nested deeper than main class / subclass",
                    c.code
                )));
            }
        }
        Ok(Self {
            categories,
            by_code,
        })
    }

    pub fn get(&self, code: &str) -> Option<&Category> {
        self.by_code.get(code).map(|&i| &self.categories[i])
    }

    pub fn contains(&self, code: &str) -> bool {
        self.by_code.contains_key(code)
    }

    pub fn label<'a>(&'a self, code: &'a str) -> &'a str {
        self.get(code).map_or(code, |c| c.label.as_str())
    }

    pub fn parent(&self, code: &str) -> Option<&str> {
        self.get(code).and_then(|c| c.parent.as_deref())
    }

    /// True when one code is the direct parent of the other.
    pub fn is_class_subclass_pair(&self, a: &str, b: &str) -> bool {
        self.parent(a) == Some(b) || self.parent(b) == Some(a)
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Exact,
    Broader,
    Narrower,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrosswalkEntry {
    #[serde(rename = "vocab")]
    pub source_vocabulary: String,
    #[serde(rename = "term")]
    pub source_term: String,
    #[serde(rename = "target")]
    pub target_descriptor_id: String,
    pub relation: Relation,
}

/// Term mappings from foreign vocabularies into the thesaurus.
#[derive(Debug, Clone, Default)]
pub struct Crosswalk {
    entries: Vec<CrosswalkEntry>,
    /// (folded vocabulary, folded term) → entry indices, in file order
    index: HashMap<(String, String), Vec<usize>>,
}

impl Crosswalk {
    pub fn load(path: &Path, thesaurus: &Thesaurus) -> Result<Self> {
        Self::new(read_json_array(path)?, thesaurus)
    }

    pub fn new(entries: Vec<CrosswalkEntry>, thesaurus: &Thesaurus) -> Result<Self> {
        let mut index: HashMap<_, Vec<usize>> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            if !thesaurus.contains(&e.target_descriptor_id) {
                return Err(Error::Validation(format!(
                    "crosswalk target {:?} (from {}:{:?}) is not a thesaurus descriptor",
                    e.target_descriptor_id, e.source_vocabulary, e.source_term
                )));
            }
            index
                .entry((fold(&e.source_vocabulary), fold(&e.source_term)))
                .or_default()
                .push(i);
        }
        Ok(Self { entries, index })
    }

    /// Targets for a foreign term: exact before broader before narrower, file order within each.
    pub fn map(&self, source_vocabulary: &str, term: &str) -> Vec<&str> {
        let Some(hits) = self.index.get(&(fold(source_vocabulary), fold(term.trim()))) else {
            return Vec::new();
        };
        let mut hits: Vec<&CrosswalkEntry> = hits.iter().map(|&i| &self.entries[i]).collect();
        // stable sort keeps file order within a relation class
        hits.sort_by_key(|e| e.relation);
        hits.into_iter()
            .map(|e| e.target_descriptor_id.as_str())
            .collect()
    }

    pub fn entries(&self) -> &[CrosswalkEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Descriptor id → the category it co-occurs with in the most documents.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KeywordCategoryTable {
    mapping: BTreeMap<String, String>,
}

impl KeywordCategoryTable {
    /// Counts, per descriptor, the documents in which it appears together with each
    /// category. Only keywords tagged with `native_vocabulary` and resolvable in the
    /// thesaurus take part. Ties go to the lexicographically smallest code.
    pub fn build(corpus: &Corpus, thesaurus: &Thesaurus, native_vocabulary: &str) -> Self {
        let mut counts: BTreeMap<&str, BTreeMap<&str, usize>> = BTreeMap::new();
        for doc in corpus.documents() {
            let keywords: BTreeSet<&str> = doc
                .keywords
                .iter()
                .filter(|k| fold(&k.vocabulary) == fold(native_vocabulary))
                .filter_map(|k| thesaurus.resolve(&k.term))
                .collect();
            let categories: BTreeSet<&str> = doc.categories.iter().map(String::as_str).collect();
            for k in &keywords {
                let per_cat = counts.entry(k).or_default();
                for c in &categories {
                    *per_cat.entry(c).or_default() += 1;
                }
            }
        }
        let mapping = counts
            .into_iter()
            .filter_map(|(k, per_cat)| {
                // BTreeMap iterates codes ascending, so the first maximum wins ties
                let mut best: Option<(&str, usize)> = None;
                for (c, n) in per_cat {
                    if best.is_none_or(|(_, m)| n > m) {
                        best = Some((c, n));
                    }
                }
                best.map(|(c, _)| (k.to_owned(), c.to_owned()))
            })
            .collect();
        Self { mapping }
    }

    pub fn from_mapping(mapping: BTreeMap<String, String>) -> Self {
        Self { mapping }
    }

    pub fn load(path: &Path) -> Result<Self> {
        crate::io::read_json(path)
    }

    /// Checks that every value names a category of `classification`.
    pub fn validate(&self, classification: &Classification) -> Result<()> {
        match self.mapping.iter().find(|(_, c)| !classification.contains(c)) {
            Some((k, c)) => Err(Error::Validation(format!(
                "keyword {k:?} maps to unknown category {c:?}"
            ))),
            None => Ok(()),
        }
    }

    pub fn lookup(&self, keyword: &str) -> Option<&str> {
        self.mapping.get(keyword).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.mapping.iter().map(|(k, c)| (k.as_str(), c.as_str()))
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }
}
