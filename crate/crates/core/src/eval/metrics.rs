//! Automatic comparison of a segmentation against a gold segmentation, and a
//! time-gap baseline segmenter.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentationMetrics {
    pub boundary_precision: f64,
    pub boundary_recall: f64,
    pub boundary_f1: f64,
    pub pairwise_precision: f64,
    pub pairwise_recall: f64,
    pub pairwise_f1: f64,
    pub rand_index: f64,
}

/// Precision is 1 when nothing was predicted, recall is 1 when nothing was expected.
fn prf(true_pos: usize, predicted: usize, expected: usize) -> (f64, f64, f64) {
    let p = if predicted == 0 { 1.0 } else { true_pos as f64 / predicted as f64 };
    let r = if expected == 0 { 1.0 } else { true_pos as f64 / expected as f64 };
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

fn boundary_set(numbers: &[u32]) -> BTreeSet<usize> {
    numbers
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != w[1])
        .map(|(i, _)| i + 1)
        .collect()
}

/// Boundaries are positions where consecutive topic numbers differ; pairs are
/// action pairs placed in the same topic, with gold same-topic pairs as positives.
pub fn segmentation_metrics(predicted: &[u32], gold: &[u32]) -> Result<SegmentationMetrics> {
    if predicted.len() != gold.len() {
        return Err(Error::Input(format!(
            "predicted has {} actions, gold has {}",
            predicted.len(),
            gold.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::Input("empty segmentation".into()));
    }
    let (bp, bg) = (boundary_set(predicted), boundary_set(gold));
    let (boundary_precision, boundary_recall, boundary_f1) =
        prf(bp.intersection(&bg).count(), bp.len(), bg.len());

    let n = predicted.len();
    let (mut tp, mut pred_pos, mut gold_pos, mut agree) = (0usize, 0usize, 0usize, 0usize);
    for i in 0..n {
        for j in i + 1..n {
            let p = predicted[i] == predicted[j];
            let g = gold[i] == gold[j];
            pred_pos += usize::from(p);
            gold_pos += usize::from(g);
            tp += usize::from(p && g);
            agree += usize::from(p == g);
        }
    }
    let pairs = n * (n - 1) / 2;
    let (pairwise_precision, pairwise_recall, pairwise_f1) = prf(tp, pred_pos, gold_pos);
    Ok(SegmentationMetrics {
        boundary_precision,
        boundary_recall,
        boundary_f1,
        pairwise_precision,
        pairwise_recall,
        pairwise_f1,
        rand_index: if pairs == 0 { 1.0 } else { agree as f64 / pairs as f64 },
    })
}

/// New topic number whenever the gap to the previous action exceeds `gap_threshold` seconds.
pub fn timeout_baseline(timestamps: &[i64], gap_threshold: i64) -> Vec<u32> {
    let mut out = Vec::with_capacity(timestamps.len());
    let mut current = 1;
    for (i, &t) in timestamps.iter().enumerate() {
        if i > 0 && t - timestamps[i - 1] > gap_threshold {
            current += 1;
        }
        out.push(current);
    }
    out
}
