//! Evaluation: assessor ratings, inter-rater agreement and automatic
//! segmentation metrics.

mod icc;
mod metrics;
mod ratings;

pub use icc::{icc, IccVariant, TwoWayAnova};
pub use metrics::{segmentation_metrics, timeout_baseline, SegmentationMetrics};
pub use ratings::{rating_summary, Likert, Question, Rating, RatingMatrix, RatingStore, RatingSummary};

use crate::error::Result;

/// ICC over the complete rows of a rating matrix.
pub fn matrix_icc(matrix: &RatingMatrix, variant: IccVariant) -> Result<f64> {
    icc(&matrix.complete_rows(), variant)
}
