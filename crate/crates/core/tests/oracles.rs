mod support;

use topicseg::annotate::Annotator;
use topicseg::eval::{icc, IccVariant, TwoWayAnova};
use topicseg::segment::assign_topic_numbers;
use topicseg::text::{levenshtein, StopWords};

use support::*;

#[test]
fn numbering_matches_reference_on_random_sessions() {
    let stop = StopWords::english_german();
    let mut r = rng(7);
    for i in 0..2000 {
        let mut s = random_topic_session(&mut r, i);
        let input: Vec<_> = s
            .actions
            .iter()
            .map(|a| (a.action.clone(), a.session_topic.clone().unwrap()))
            .collect();
        assign_topic_numbers(&mut s, &stop).unwrap();
        let got: Vec<u32> = s.actions.iter().map(|a| a.topic_number.unwrap()).collect();
        assert_eq!(got, reference_numbers(&input, &stop), "session {i}: {input:?}");
    }
}

#[test]
fn distance_matches_recursive_definition() {
    let words = ["migrant", "migrants", "migration", "policy", "police", "", "ab", "Straße", "strasse"];
    for a in words {
        for b in words {
            assert_eq!(levenshtein(a, b), edit_distance(a, b), "{a} / {b}");
        }
    }
}

#[test]
fn search_annotation_matches_enumeration() {
    let mut r = rng(11);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let f = random_search_fixture(&mut r);
        let got = Annotator::new(&f.corpus, &f.kb).annotate_search::<f64>(&f.action);
        let (keywords, categories) = reference_search_weights(&f);
        assert_eq!(got.keywords.len(), keywords.len());
        assert_eq!(got.categories.len(), categories.len());
        for (k, w) in &keywords {
            worst = worst.max((got.keywords.weight(k).unwrap() - w).abs());
        }
        for (c, w) in &categories {
            worst = worst.max((got.categories.weight(c).unwrap() - w).abs());
        }
    }
    assert!(worst <= 1e-9, "max error {worst}");
}

#[test]
fn icc_matches_raw_sum_anova() {
    let mut r = rng(3);
    let mut compared = 0;
    for round in 0..400 {
        let rows = if round % 2 == 0 { uniform_matrix(&mut r, 10, 3) } else { panel_matrix(&mut r, 10, 3) };
        let (single, average, _, _) = reference_icc(&rows);
        if let Some(expected) = single {
            let got: f64 = icc(&rows, IccVariant::Single).unwrap();
            assert!((got - expected).abs() <= 1e-9, "{rows:?}");
            compared += 1;
        }
        if let Some(expected) = average {
            let got: f64 = icc(&rows, IccVariant::Average).unwrap();
            assert!((got - expected).abs() <= 1e-9, "{rows:?}");
            compared += 1;
        }
    }
    assert!(compared > 700);
}

#[test]
fn average_exceeds_single_exactly_when_subjects_dominate_error() {
    let mut r = rng(5);
    for _ in 0..1000 {
        let rows = uniform_matrix(&mut r, 10, 3);
        let anova = TwoWayAnova::new(&rows).unwrap();
        let (Ok(single), Ok(average)) = (anova.icc(IccVariant::Single), anova.icc(IccVariant::Average)) else {
            continue;
        };
        if anova.ms_rows >= anova.ms_error {
            assert!(average >= single - 1e-12);
        } else {
            assert!(average <= single + 1e-12);
        }
    }
}
