//! Reference implementations written from the textbook definitions, plus seeded
//! generators of random inputs. Shared by the integration and acceptance suites.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use topicseg::annotate::{AnnotatedAction, AnnotatedSession, LabelList};
use topicseg::corpus::{Corpus, Document, KeywordRef, StrModel};
use topicseg::kos::{Classification, Crosswalk, Descriptor, KeywordCategoryTable, Thesaurus, DEFAULT_NATIVE_VOCABULARY};
use topicseg::log::{Action, ActionKind};
use topicseg::pipeline::KnowledgeBase;
use topicseg::text::StopWords;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- numbering

/// Edit distance by plain recursion with a memo table.
pub fn edit_distance(a: &str, b: &str) -> usize {
    fn go(a: &[char], b: &[char], memo: &mut BTreeMap<(usize, usize), usize>) -> usize {
        if a.is_empty() {
            return b.len();
        }
        if b.is_empty() {
            return a.len();
        }
        if let Some(&d) = memo.get(&(a.len(), b.len())) {
            return d;
        }
        let sub = go(&a[1..], &b[1..], memo) + usize::from(a[0] != b[0]);
        let del = go(&a[1..], b, memo) + 1;
        let ins = go(a, &b[1..], memo) + 1;
        let d = sub.min(del).min(ins);
        memo.insert((a.len(), b.len()), d);
        d
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    go(&a, &b, &mut BTreeMap::new())
}

fn words(action: &Action, stop: &StopWords) -> Vec<String> {
    let mut out = Vec::new();
    for text in action.query_terms.iter().chain(&action.facet_terms) {
        for w in text.split(|c: char| !c.is_alphanumeric()) {
            let w = w.to_lowercase();
            if w.chars().count() > 3 && !stop.contains(&w) {
                out.push(w);
            }
        }
    }
    out
}

/// Topic numbers computed by re-checking both rules against every earlier action.
pub fn reference_numbers(actions: &[(Action, String)], stop: &StopWords) -> Vec<u32> {
    let mut numbers: Vec<u32> = Vec::new();
    for i in 0..actions.len() {
        let (ai, ti) = &actions[i];
        let mut found = None;
        for j in (0..i).rev() {
            if actions[j].1 == *ti {
                found = Some(numbers[j]);
                break;
            }
        }
        if found.is_none() && ai.kind.is_search() {
            let mine = words(ai, stop);
            for j in (0..i).rev() {
                let aj = &actions[j].0;
                if !aj.kind.is_search() {
                    continue;
                }
                let theirs = words(aj, stop);
                if mine.iter().any(|x| theirs.iter().any(|y| edit_distance(x, y) <= 2)) {
                    found = Some(numbers[j]);
                    break;
                }
            }
        }
        let n = found.unwrap_or_else(|| numbers.iter().copied().max().unwrap_or(0) + 1);
        numbers.push(n);
    }
    numbers
}

const QUERY_WORDS: [&str; 14] = [
    "migrant", "migrants", "migration", "policy", "police", "youth", "welfare", "facebook",
    "instagram", "family", "families", "the", "and", "climate",
];
const TOPICS: [&str; 4] = ["A", "B", "C", "D"];

/// Random session of 1..=8 actions with session topics and no topic numbers.
pub fn random_topic_session(r: &mut ChaCha8Rng, id: usize) -> AnnotatedSession<f64> {
    let len = r.random_range(1..=8);
    let actions = (0..len)
        .map(|i| {
            let kind = *ActionKind::ALL.choose(r).unwrap();
            let mut action = if kind.is_search() {
                let n = r.random_range(0..=3);
                let q: Vec<&str> = (0..n).map(|_| *QUERY_WORDS.choose(r).unwrap()).collect();
                let mut a = Action::search(i + 1, i as i64, &[&q.join(" ")], &[]);
                if kind == ActionKind::FacetSearch {
                    a.facet_terms = std::mem::take(&mut a.query_terms);
                }
                a
            } else {
                Action::doc_view(i + 1, i as i64, "d")
            };
            action.kind = kind;
            let mut a = AnnotatedAction::new(action, LabelList::default(), LabelList::default());
            a.session_topic = Some(TOPICS.choose(r).unwrap().to_string());
            a
        })
        .collect();
    AnnotatedSession { id: format!("s{id}"), actions }
}

// ---------------------------------------------------------------- annotation

pub struct SearchFixture {
    pub corpus: Corpus,
    pub kb: KnowledgeBase,
    pub action: Action,
    /// label (any case) -> descriptor id
    pub labels: BTreeMap<String, String>,
}

/// Up to 20 result documents, each with up to 10 native keywords drawn from a small
/// thesaurus (labels and synonyms, repeats allowed), plus an occasional unknown id.
pub fn random_search_fixture(r: &mut ChaCha8Rng) -> SearchFixture {
    let n_desc = r.random_range(1..=12);
    let descriptors: Vec<Descriptor> = (0..n_desc)
        .map(|i| Descriptor {
            id: format!("k{i}"),
            label: format!("keyword{i}"),
            synonyms: vec![format!("alias{i}")],
        })
        .collect();
    let mut labels = BTreeMap::new();
    for d in &descriptors {
        labels.insert(d.label.clone(), d.id.clone());
        labels.insert(d.synonyms[0].clone(), d.id.clone());
    }
    let n_docs = r.random_range(0..=20);
    let docs: Vec<Document> = (0..n_docs)
        .map(|i| {
            let n_kw = r.random_range(0..=10);
            let keywords = (0..n_kw)
                .map(|_| {
                    let d = descriptors.choose(r).unwrap();
                    let term = if r.random_bool(0.3) { d.synonyms[0].to_uppercase() } else { d.label.clone() };
                    KeywordRef { vocabulary: DEFAULT_NATIVE_VOCABULARY.into(), term }
                })
                .collect();
            Document {
                id: format!("doc{i}"),
                title: String::new(),
                abstract_text: None,
                keywords,
                categories: vec![],
                authors: vec![],
                year: None,
            }
        })
        .collect();
    let mut results: Vec<String> = docs.iter().map(|d| d.id.clone()).collect();
    if r.random_bool(0.2) && !results.is_empty() {
        let at = r.random_range(0..results.len());
        results[at] = "missing".into();
    }
    let cats = ["X", "Y", "Z"];
    let mut mapping = BTreeMap::new();
    for d in &descriptors {
        if r.random_bool(0.8) {
            mapping.insert(d.id.clone(), cats.choose(r).unwrap().to_string());
        }
    }
    let table = KeywordCategoryTable::from_mapping(mapping);
    let thesaurus = Thesaurus::new(descriptors).unwrap();
    let kb = KnowledgeBase {
        crosswalk: Crosswalk::new(vec![], &thesaurus).unwrap(),
        thesaurus,
        classification: Classification::default(),
        str_model: StrModel::default(),
        table,
        stop_words: StopWords::empty(),
        native_vocabulary: DEFAULT_NATIVE_VOCABULARY.into(),
    };
    let refs: Vec<&str> = results.iter().map(String::as_str).collect();
    SearchFixture {
        corpus: Corpus::new(docs).unwrap(),
        kb,
        action: Action::search(1, 0, &["q"], &refs),
        labels: labels.into_iter().map(|(k, v)| (k.to_lowercase(), v)).collect(),
    }
}

/// Keyword and category weights of a search, enumerating every
/// (result document, keyword) pair and summing `1/log2(p+1) * (1.05 - 0.05 r)`.
pub fn reference_search_weights(f: &SearchFixture) -> (BTreeMap<String, f64>, BTreeMap<String, f64>) {
    let mut keywords: BTreeMap<String, f64> = BTreeMap::new();
    for (i, id) in f.action.result_doc_ids.iter().enumerate() {
        let rank = (i + 1) as f64;
        let Some(doc) = f.corpus.get(id) else { continue };
        let mut seen: Vec<&String> = Vec::new();
        for k in &doc.keywords {
            let Some(d) = f.labels.get(&k.term.to_lowercase()) else { continue };
            if seen.contains(&d) {
                continue;
            }
            seen.push(d);
            let p = seen.len() as f64;
            *keywords.entry(d.clone()).or_default() += (1.0 / (p + 1.0).log2()) * (1.05 - 0.05 * rank);
        }
    }
    let mut categories: BTreeMap<String, f64> = BTreeMap::new();
    for (k, w) in &keywords {
        if let Some(c) = f.kb.table.lookup(k) {
            *categories.entry(c.to_owned()).or_default() += w;
        }
    }
    (keywords, categories)
}

// ---------------------------------------------------------------- agreement

/// Two-way random-effects, absolute-agreement ICC from raw sums:
/// SST = Σx² − G²/N, SSR = ΣRᵢ²/k − G²/N, SSC = ΣCⱼ²/n − G²/N, SSE = SST − SSR − SSC.
/// Returns `(single, average, msr, mse)`; `None` for a coefficient whose
/// denominator is not positive.
pub fn reference_icc(rows: &[Vec<f64>]) -> (Option<f64>, Option<f64>, f64, f64) {
    let n = rows.len() as f64;
    let k = rows[0].len() as f64;
    let g: f64 = rows.iter().flatten().sum();
    let correction = g * g / (n * k);
    let sst = rows.iter().flatten().map(|x| x * x).sum::<f64>() - correction;
    let ssr = rows.iter().map(|r| r.iter().sum::<f64>().powi(2)).sum::<f64>() / k - correction;
    let ssc = (0..rows[0].len())
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>().powi(2))
        .sum::<f64>()
        / n
        - correction;
    let sse = sst - ssr - ssc;
    let bms = ssr / (n - 1.0);
    let jms = ssc / (k - 1.0);
    let ems = sse / ((n - 1.0) * (k - 1.0));
    let clamp = |x: f64| x.clamp(-1.0, 1.0);
    let single_den = bms + (k - 1.0) * ems + k * (jms - ems) / n;
    let average_den = bms + (jms - ems) / n;
    let single = (single_den > 1e-12).then(|| clamp((bms - ems) / single_den));
    let average = (average_den > 1e-12).then(|| clamp((bms - ems) / average_den));
    (single, average, bms, ems)
}

/// Integer ratings in -2..=2, uniformly at random.
pub fn uniform_matrix(r: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..k).map(|_| f64::from(r.random_range(-2i8..=2))).collect()).collect()
}

/// Ratings from a panel that perceives a true per-subject quality with noise,
/// rounded and clipped to the five-point scale.
pub fn panel_matrix(r: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<f64>> {
    let bias: Vec<f64> = (0..k).map(|_| r.random_range(-0.5..0.5)).collect();
    (0..n)
        .map(|_| {
            let quality: f64 = r.random_range(-2.0..2.0);
            bias.iter()
                .map(|b| (quality + b + r.random_range(-1.0..1.0)).round().clamp(-2.0, 2.0))
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------- pipeline

pub struct World {
    pub corpus: Corpus,
    pub kb: KnowledgeBase,
    pub sessions: Vec<topicseg::log::Session>,
}

const CATEGORIES: [&str; 5] = ["Alpha", "Beta", "Gamma", "Delta", "Epsilon"];

/// A random corpus with native keywords and categories, a lookup table derived
/// from it, and random sessions of searches and document views over it.
pub fn random_world(r: &mut ChaCha8Rng, n_sessions: usize) -> World {
    use topicseg::corpus::StrParams;
    use topicseg::kos::Category;
    use topicseg::log::Session;

    let descriptors: Vec<Descriptor> = (0..15)
        .map(|i| Descriptor { id: format!("k{i}"), label: format!("keyword{i}"), synonyms: vec![] })
        .collect();
    let docs: Vec<Document> = (0..40)
        .map(|i| {
            let n_kw = r.random_range(0..=6);
            let keywords = (0..n_kw)
                .map(|_| KeywordRef {
                    vocabulary: DEFAULT_NATIVE_VOCABULARY.into(),
                    term: descriptors.choose(r).unwrap().label.clone(),
                })
                .collect();
            let n_cat = r.random_range(1..=2);
            Document {
                id: format!("doc{i}"),
                title: format!("Report {i} on keyword{}", r.random_range(0..15)),
                abstract_text: None,
                keywords,
                categories: (0..n_cat).map(|_| CATEGORIES.choose(r).unwrap().to_string()).collect(),
                authors: vec![format!("Author {}", i % 7)],
                year: Some(1990 + i as i32),
            }
        })
        .collect();
    let corpus = Corpus::new(docs).unwrap();
    let thesaurus = Thesaurus::new(descriptors).unwrap();
    let classification = Classification::new(
        CATEGORIES.iter().map(|c| Category { code: c.to_string(), label: c.to_string(), parent: None }).collect(),
    )
    .unwrap();
    let crosswalk = Crosswalk::new(vec![], &thesaurus).unwrap();
    let kb = KnowledgeBase::from_corpus(thesaurus, classification, crosswalk, &corpus, StopWords::english_german(), StrParams::default())
        .unwrap();

    let ids: Vec<String> = corpus.documents().iter().map(|d| d.id.clone()).collect();
    let sessions = (0..n_sessions)
        .map(|s| {
            let len = r.random_range(1..=12);
            let mut ts = 0i64;
            let actions = (0..len)
                .map(|i| {
                    ts += r.random_range(1..600);
                    if r.random_bool(0.5) {
                        let n = r.random_range(0..=20);
                        let results: Vec<&str> = ids.choose_multiple(r, n).map(String::as_str).collect();
                        let q = *QUERY_WORDS.choose(r).unwrap();
                        Action::search(i + 1, ts, &[q], &results)
                    } else {
                        Action::doc_view(i + 1, ts, ids.choose(r).unwrap())
                    }
                })
                .collect();
            Session { id: format!("w{s}"), actions }
        })
        .collect();
    World { corpus, kb, sessions }
}

/// Sessions of 1..=40 actions spread over up to three hours, kept only when they
/// pass the default filter, until `n` are collected.
pub fn filtered_pool(r: &mut ChaCha8Rng, n: usize) -> Vec<topicseg::log::Session> {
    use topicseg::log::{Session, SessionFilter};
    let filter = SessionFilter::default();
    let mut pool = Vec::new();
    while pool.len() < n {
        let len = r.random_range(1..=40);
        let span = r.random_range(0..3 * 3600);
        let mut stamps: Vec<i64> = (0..len).map(|_| r.random_range(0..=span)).collect();
        stamps.sort_unstable();
        let s = Session {
            id: format!("p{}", pool.len()),
            actions: stamps.iter().enumerate().map(|(i, &t)| Action::doc_view(i + 1, t, "d")).collect(),
        };
        if filter.accepts(&s) {
            pool.push(s);
        }
    }
    pool
}
