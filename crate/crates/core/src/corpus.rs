//! Document corpus and the co-occurrence model that maps free text terms to
//! thesaurus descriptors.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::read_jsonl;
use crate::kos::Thesaurus;
use crate::text::{fold, tokenize, StopWords};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordRef {
    #[serde(rename = "vocab")]
    pub vocabulary: String,
    pub term: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(rename = "abstract", default, skip_serializing_if = "Option::is_none")]
    pub abstract_text: Option<String>,
    /// Most specific and most important keywords first.
    #[serde(default)]
    pub keywords: Vec<KeywordRef>,
    #[serde(default)]
    pub categories: Vec<String>,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
}

impl Document {
    /// `Author; Author (Year): Title`, with the year omitted when unknown.
    pub fn citation(&self) -> String {
        let mut out = self.authors.join("; ");
        if let Some(year) = self.year {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&format!("({year})"));
        }
        if out.is_empty() {
            self.title.clone()
        } else {
            format!("{out}: {}", self.title)
        }
    }

    /// Title followed by the abstract, when present.
    pub fn free_text(&self) -> String {
        match &self.abstract_text {
            Some(a) => format!("{} {}", self.title, a),
            None => self.title.clone(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    documents: Vec<Document>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn load(path: &Path) -> Result<Self> {
        let docs: Vec<Document> = read_jsonl(path)?;
        Self::new(docs)
    }

    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut index = HashMap::with_capacity(documents.len());
        for (i, d) in documents.iter().enumerate() {
            if index.insert(d.id.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate document id {:?}", d.id)));
            }
        }
        Ok(Self { documents, index })
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.index.get(id).map(|&i| &self.documents[i])
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrEntry {
    pub descriptor: String,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrParams {
    pub min_count: usize,
    pub top_k: usize,
}

impl Default for StrParams {
    fn default() -> Self {
        Self {
            min_count: 1,
            top_k: 5,
        }
    }
}

/// Free term → descriptors ranked by Dice coefficient over document co-occurrence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrModel {
    mapping: BTreeMap<String, Vec<StrEntry>>,
}

/// Document frequencies of terms, descriptors, and their pairs. Merging is plain
/// integer addition, so any partition of the corpus yields the same totals.
#[derive(Debug, Default)]
struct Cooccurrence {
    terms: HashMap<String, usize>,
    descriptors: HashMap<String, usize>,
    pairs: HashMap<(String, String), usize>,
}

impl Cooccurrence {
    fn add_document(mut self, doc: &Document, thesaurus: &Thesaurus, native: &str, stop: &StopWords) -> Self {
        let terms: BTreeSet<String> = tokenize(&doc.free_text(), stop).into_iter().collect();
        let descriptors: BTreeSet<&str> = doc
            .keywords
            .iter()
            .filter(|k| fold(&k.vocabulary) == fold(native))
            .filter_map(|k| thesaurus.resolve(&k.term))
            .collect();
        for d in &descriptors {
            *self.descriptors.entry((*d).to_owned()).or_default() += 1;
        }
        for t in terms {
            for d in &descriptors {
                *self.pairs.entry((t.clone(), (*d).to_owned())).or_default() += 1;
            }
            *self.terms.entry(t).or_default() += 1;
        }
        self
    }

    fn merge(mut self, other: Self) -> Self {
        for (k, v) in other.terms {
            *self.terms.entry(k).or_default() += v;
        }
        for (k, v) in other.descriptors {
            *self.descriptors.entry(k).or_default() += v;
        }
        for (k, v) in other.pairs {
            *self.pairs.entry(k).or_default() += v;
        }
        self
    }
}

impl StrModel {
    /// Counts are taken over the corpus in parallel and merged; the result equals
    /// [`StrModel::build_sequential`] exactly.
    pub fn build(
        corpus: &Corpus,
        thesaurus: &Thesaurus,
        native_vocabulary: &str,
        stop_words: &StopWords,
        params: StrParams,
    ) -> Result<Self> {
        Self::check(params)?;
        let counts = corpus
            .documents()
            .par_iter()
            .fold(Cooccurrence::default, |acc, d| {
                acc.add_document(d, thesaurus, native_vocabulary, stop_words)
            })
            .reduce(Cooccurrence::default, Cooccurrence::merge);
        Ok(Self::from_counts(counts, params))
    }

    pub fn build_sequential(
        corpus: &Corpus,
        thesaurus: &Thesaurus,
        native_vocabulary: &str,
        stop_words: &StopWords,
        params: StrParams,
    ) -> Result<Self> {
        Self::check(params)?;
        let counts = corpus.documents().iter().fold(Cooccurrence::default(), |acc, d| {
            acc.add_document(d, thesaurus, native_vocabulary, stop_words)
        });
        Ok(Self::from_counts(counts, params))
    }

    fn check(params: StrParams) -> Result<()> {
        if params.min_count == 0 || params.top_k == 0 {
            return Err(Error::Input("min_count and top_k must be at least 1".into()));
        }
        Ok(())
    }

    fn from_counts(counts: Cooccurrence, params: StrParams) -> Self {
        let mut mapping: BTreeMap<String, Vec<StrEntry>> = BTreeMap::new();
        for ((t, d), n) in counts.pairs {
            if n < params.min_count {
                continue;
            }
            let score = (2 * n) as f64 / (counts.terms[&t] + counts.descriptors[&d]) as f64;
            mapping.entry(t).or_default().push(StrEntry { descriptor: d, score });
        }
        for entries in mapping.values_mut() {
            entries.sort_by(|a, b| {
                b.score
                    .total_cmp(&a.score)
                    .then_with(|| a.descriptor.cmp(&b.descriptor))
            });
            entries.truncate(params.top_k);
        }
        Self { mapping }
    }

    pub fn from_mapping(mapping: BTreeMap<String, Vec<StrEntry>>) -> Self {
        let mut model = Self { mapping };
        for entries in model.mapping.values_mut() {
            entries.sort_by(|a, b| {
                b.score
                    .total_cmp(&a.score)
                    .then_with(|| a.descriptor.cmp(&b.descriptor))
            });
        }
        model
    }

    pub fn load(path: &Path) -> Result<Self> {
        crate::io::read_json::<Self>(path).map(|m| Self::from_mapping(m.mapping))
    }

    /// Descriptor ids for a free term in score order; empty when the term is unknown.
    pub fn map_free_term(&self, term: &str) -> Vec<&str> {
        self.mapping
            .get(&fold(term.trim()))
            .map(|es| es.iter().map(|e| e.descriptor.as_str()).collect())
            .unwrap_or_default()
    }

    pub fn entries(&self, term: &str) -> &[StrEntry] {
        self.mapping.get(&fold(term)).map_or(&[], Vec::as_slice)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.mapping.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kos::{Descriptor, DEFAULT_NATIVE_VOCABULARY};
    use proptest::prelude::*;

    fn thesaurus() -> Thesaurus {
        Thesaurus::new(
            ["labor", "migration", "family"]
                .iter()
                .map(|l| Descriptor {
                    id: format!("d_{l}"),
                    label: l.to_string(),
                    synonyms: vec![],
                })
                .collect(),
        )
        .unwrap()
    }

    fn doc(id: &str, title: &str, keywords: &[&str]) -> Document {
        Document {
            id: id.into(),
            title: title.into(),
            abstract_text: None,
            keywords: keywords
                .iter()
                .map(|k| KeywordRef {
                    vocabulary: DEFAULT_NATIVE_VOCABULARY.into(),
                    term: k.to_string(),
                })
                .collect(),
            categories: vec![],
            authors: vec![],
            year: None,
        }
    }

    fn build(corpus: &Corpus, params: StrParams) -> StrModel {
        StrModel::build(
            corpus,
            &thesaurus(),
            DEFAULT_NATIVE_VOCABULARY,
            &StopWords::english_german(),
            params,
        )
        .unwrap()
    }

    #[test]
    fn load_corpus_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        std::fs::write(
            &path,
            "{\"id\":\"a\",\"title\":\"A\",\"keywords\":[{\"vocab\":\"thesaurus\",\"term\":\"labor\"}],\"categories\":[\"C1\"],\"authors\":[\"X\"],\"year\":2001}\n\
             {\"id\":\"b\",\"title\":\"B\",\"abstract\":\"text\",\"keywords\":[],\"categories\":[],\"authors\":[]}\n",
        )
        .unwrap();
        let corpus = Corpus::load(&path).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.get("b").unwrap().abstract_text.as_deref(), Some("text"));

        std::fs::write(&path, "{\"id\":\"a\"}\n{\"id\":\"a\"}\n").unwrap();
        assert!(matches!(Corpus::load(&path), Err(Error::Validation(_))));

        std::fs::write(&path, "{\"id\":\"a\"}\n{\"id\":\n").unwrap();
        assert!(matches!(Corpus::load(&path), Err(Error::Parse { line: 2, .. })));

        std::fs::write(&path, "").unwrap();
        assert!(Corpus::load(&path).unwrap().is_empty());
    }

    #[test]
    fn citation_format() {
        let mut d = doc("x", "Many refugees, few data", &[]);
        d.authors = vec!["Angenendt, Steffen".into()];
        d.year = Some(2016);
        assert_eq!(d.citation(), "Angenendt, Steffen (2016): Many refugees, few data");
        d.year = None;
        assert_eq!(d.citation(), "Angenendt, Steffen: Many refugees, few data");
        d.authors.clear();
        assert_eq!(d.citation(), "Many refugees, few data");
    }

    #[test]
    fn single_document_scores_one() {
        let corpus = Corpus::new(vec![doc("1", "Unemployment", &["labor"])]).unwrap();
        let model = build(&corpus, StrParams::default());
        assert_eq!(model.entries("unemployment"), &[StrEntry { descriptor: "d_labor".into(), score: 1.0 }]);
        assert_eq!(model.map_free_term("Unemployment"), vec!["d_labor"]);
        assert!(model.map_free_term("unknown").is_empty());

        let strict = build(&corpus, StrParams { min_count: 2, top_k: 5 });
        assert!(strict.is_empty());
        assert!(StrModel::build(&corpus, &thesaurus(), "thesaurus", &StopWords::empty(), StrParams { min_count: 0, top_k: 1 }).is_err());
    }

    #[test]
    fn terms_without_controlled_documents_are_absent() {
        let corpus = Corpus::new(vec![doc("1", "Unemployment", &["labor"]), doc("2", "Astronomy", &[])]).unwrap();
        let model = build(&corpus, StrParams::default());
        assert!(model.map_free_term("astronomy").is_empty());
    }

    #[test]
    fn abstract_contributes_free_terms() {
        let mut d = doc("1", "Report", &["labor"]);
        d.abstract_text = Some("Wages and unemployment".into());
        let model = build(&Corpus::new(vec![d]).unwrap(), StrParams::default());
        assert_eq!(model.map_free_term("wages"), vec!["d_labor"]);
    }

    #[test]
    fn score_ties_ordered_by_descriptor() {
        // "mobility" co-occurs once with each of two descriptors that appear once each,
        // and appears in two docs: 2*1/(2+1) for both.
        let corpus = Corpus::new(vec![
            doc("1", "Mobility", &["migration"]),
            doc("2", "Mobility", &["family"]),
        ])
        .unwrap();
        let model = build(&corpus, StrParams::default());
        assert_eq!(model.map_free_term("mobility"), vec!["d_family", "d_migration"]);
        assert!((model.entries("mobility")[0].score - 2.0 / 3.0).abs() < 1e-15);

        let top1 = build(&corpus, StrParams { min_count: 1, top_k: 1 });
        assert_eq!(top1.map_free_term("mobility"), vec!["d_family"]);

        let manual = StrModel::from_mapping(
            [(
                "term".to_string(),
                vec![
                    StrEntry { descriptor: "d3".into(), score: 0.5 },
                    StrEntry { descriptor: "d2".into(), score: 0.5 },
                ],
            )]
            .into(),
        );
        assert_eq!(manual.map_free_term("term"), vec!["d2", "d3"]);
    }

    const WORDS: [&str; 5] = ["alpha", "bravo", "charlie", "delta", "echo"];
    const LABELS: [&str; 3] = ["labor", "migration", "family"];

    fn arb_docs() -> impl Strategy<Value = Vec<(Vec<usize>, Vec<usize>)>> {
        prop::collection::vec(
            (prop::collection::vec(0usize..5, 0..4), prop::collection::vec(0usize..3, 0..3)),
            0..50,
        )
    }

    fn corpus_of(spec: &[(Vec<usize>, Vec<usize>)]) -> Corpus {
        let docs = spec
            .iter()
            .enumerate()
            .map(|(i, (ws, ks))| {
                let title: Vec<&str> = ws.iter().map(|&w| WORDS[w]).collect();
                let ks: Vec<&str> = ks.iter().map(|&k| LABELS[k]).collect();
                doc(&format!("{i}"), &title.join(" "), &ks)
            })
            .collect();
        Corpus::new(docs).unwrap()
    }

    proptest! {
        #[test]
        fn model_properties(spec in arb_docs(), top_k in 1usize..4) {
            let params = StrParams { min_count: 1, top_k };
            let corpus = corpus_of(&spec);
            let model = build(&corpus, params);
            let seq = StrModel::build_sequential(&corpus, &thesaurus(), "thesaurus", &StopWords::english_german(), params).unwrap();
            prop_assert_eq!(&model, &seq);

            let mut reversed = spec.clone();
            reversed.reverse();
            prop_assert_eq!(&model, &build(&corpus_of(&reversed), params));

            for t in model.terms() {
                let entries = model.entries(t);
                prop_assert!(entries.len() <= top_k);
                prop_assert!(model.map_free_term(t).len() <= top_k);
                for e in entries {
                    prop_assert!(e.score > 0.0 && e.score <= 1.0);
                    // brute-force counts
                    let w = WORDS.iter().position(|w| *w == t).unwrap();
                    let k = LABELS.iter().position(|l| format!("d_{l}") == e.descriptor).unwrap();
                    let ct = spec.iter().filter(|(ws, _)| ws.contains(&w)).count();
                    let cd = spec.iter().filter(|(_, ks)| ks.contains(&k)).count();
                    let ctd = spec.iter().filter(|(ws, ks)| ws.contains(&w) && ks.contains(&k)).count();
                    prop_assert_eq!(e.score, (2 * ctd) as f64 / (ct + cd) as f64);
                    prop_assert_eq!(e.score == 1.0, ct == cd && cd == ctd);
                }
                for pair in entries.windows(2) {
                    prop_assert!(pair[0].score > pair[1].score
                        || (pair[0].score == pair[1].score && pair[0].descriptor < pair[1].descriptor));
                }
            }
        }
    }
}
