mod support;

use std::collections::{BTreeMap, HashMap};

use proptest::prelude::*;

use topicseg::annotate::{derive_categories, LabelList};
use topicseg::kos::KeywordCategoryTable;
use topicseg::log::{sample_evaluation_set, SampleSpec, SessionFilter};
use topicseg::pipeline::Pipeline;
use topicseg::segment::assign_topic_numbers;
use topicseg::text::StopWords;
use topicseg::topics::{rerank_action_categories, session_category_profile, SessionProfile};
use topicseg::AnnotatedSession;

use support::*;

fn check_numbering(s: &AnnotatedSession) {
    let mut by_topic: HashMap<&str, u32> = HashMap::new();
    let mut max_seen = 0;
    for a in &s.actions {
        let topic = a.session_topic.as_deref().unwrap();
        let n = a.topic_number.unwrap();
        assert_eq!(*by_topic.entry(topic).or_insert(n), n, "{}: topic {topic} split", s.id);
        // a number is either already used or exactly the next one
        assert!(n >= 1 && n <= max_seen + 1, "{}: number {n} after max {max_seen}", s.id);
        max_seen = max_seen.max(n);
    }
}

#[test]
fn numbering_invariants_on_random_sessions() {
    let stop = StopWords::english_german();
    let mut r = rng(21);
    for i in 0..1000 {
        let mut s = random_topic_session(&mut r, i);
        assign_topic_numbers(&mut s, &stop).unwrap();
        check_numbering(&s);
    }
}

#[test]
fn pipeline_invariants_on_random_worlds() {
    for seed in 0..5 {
        let w = random_world(&mut rng(seed), 60);
        let p = Pipeline::new(&w.corpus, &w.kb);
        let seq: Vec<AnnotatedSession> = p.process_all(&w.sessions);
        for s in &seq {
            check_numbering(s);
        }
        let par: Vec<AnnotatedSession> = p.process_all_parallel(&w.sessions);
        assert_eq!(serde_json::to_vec(&seq).unwrap(), serde_json::to_vec(&par).unwrap());
        let again: Vec<AnnotatedSession> = p.process_all(&w.sessions);
        assert_eq!(serde_json::to_vec(&seq).unwrap(), serde_json::to_vec(&again).unwrap());
    }
}

#[test]
fn reranking_keeps_each_action_category_multiset() {
    let w = random_world(&mut rng(99), 80);
    let p = Pipeline::new(&w.corpus, &w.kb);
    for session in &w.sessions {
        let plain: AnnotatedSession = p.with_epsilon(0.0).annotate(session);
        let reranked: AnnotatedSession = p.annotate(session);
        for (a, b) in plain.actions.iter().zip(&reranked.actions) {
            let mut x = a.categories.entries().to_vec();
            let mut y = b.categories.entries().to_vec();
            x.sort_by(|u, v| u.0.cmp(&v.0));
            y.sort_by(|u, v| u.0.cmp(&v.0));
            assert_eq!(x, y);
        }
    }
}

#[test]
fn sampler_contract_on_filtered_pool() {
    let pool = filtered_pool(&mut rng(500), 500);
    let spec = SampleSpec { seed: 42, ..SampleSpec::default() };
    let sample = sample_evaluation_set(&pool, &spec);
    assert!(sample.len() <= 100);
    let filter = SessionFilter::default();
    let mut per_len: BTreeMap<usize, usize> = BTreeMap::new();
    for s in &sample {
        assert!(filter.accepts(s));
        *per_len.entry(s.actions.len()).or_default() += 1;
    }
    assert!(per_len.values().all(|&c| c <= 4));
    assert_eq!(sample, sample_evaluation_set(&pool, &spec));
    assert_ne!(sample, sample_evaluation_set(&pool, &SampleSpec { seed: 43, ..spec }));
}

fn arb_list() -> impl Strategy<Value = LabelList<f64>> {
    prop::collection::vec(("[a-f]", 0.01f64..10.0), 0..8).prop_map(LabelList::from_weights)
}

proptest! {
    #[test]
    fn rerank_is_a_permutation(lists in prop::collection::vec(arb_list(), 1..6), eps in 0.0f64..0.9) {
        let profile = SessionProfile::from_lists(&lists);
        for l in &lists {
            let out = rerank_action_categories(l, &profile, eps);
            let mut a = l.entries().to_vec();
            let mut b = out.entries().to_vec();
            a.sort_by(|x, y| x.0.cmp(&y.0));
            b.sort_by(|x, y| x.0.cmp(&y.0));
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn category_mass_equals_mapped_keyword_mass(
        keywords in arb_list(),
        mapping in prop::collection::btree_map("[a-f]", "[XYZ]", 0..6),
    ) {
        let table = KeywordCategoryTable::from_mapping(mapping.clone());
        let cats = derive_categories(&keywords, &table);
        let mapped: f64 = keywords.entries().iter().filter(|(k, _)| mapping.contains_key(k)).map(|(_, w)| w).sum();
        prop_assert!((cats.total() - mapped).abs() <= 1e-9 * mapped.max(1.0));
    }

    #[test]
    fn profile_is_sum_of_action_categories(seed in 0u64..50) {
        let w = random_world(&mut rng(seed), 3);
        let p = Pipeline::new(&w.corpus, &w.kb);
        for session in &w.sessions {
            let s: AnnotatedSession = p.annotate(session);
            let profile = session_category_profile(&s);
            let total: f64 = s.actions.iter().map(|a| a.categories.total()).sum();
            prop_assert!((profile.list().total() - total).abs() <= 1e-9 * total.max(1.0));
        }
    }
}
