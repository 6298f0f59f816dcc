//! Intraclass correlation for a panel of raters who all rate the same subjects:
//! two-way random effects, absolute agreement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IccVariant {
    /// Reliability of a single rater.
    Single,
    /// Reliability of the mean over all raters.
    #[default]
    Average,
}

impl IccVariant {
    pub fn name(self) -> &'static str {
        match self {
            IccVariant::Single => "ICC(2,1) single-measure, absolute agreement",
            IccVariant::Average => "ICC(2,k) average-measure, absolute agreement",
        }
    }
}

/// Mean squares of a two-way layout without replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoWayAnova<T> {
    /// subjects
    pub n: usize,
    /// raters
    pub k: usize,
    pub ms_rows: T,
    pub ms_cols: T,
    pub ms_error: T,
    pub ss_total: T,
}

impl<T: Weight> TwoWayAnova<T> {
    /// `rows[i][j]` is rater `j`'s value for subject `i`.
    pub fn new(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if n < 2 || k < 2 {
            return Err(Error::Input(format!(
                "need at least 2 complete subjects and 2 raters, got {n}x{k}"
            )));
        }
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::Input("rating rows differ in length".into()));
        }
        let (nf, kf) = (T::from_count(n), T::from_count(k));
        let grand = rows.iter().flatten().copied().sum::<T>() / (nf * kf);
        let row_means: Vec<T> = rows.iter().map(|r| r.iter().copied().sum::<T>() / kf).collect();
        let col_means: Vec<T> = (0..k)
            .map(|j| rows.iter().map(|r| r[j]).sum::<T>() / nf)
            .collect();

        let ss_rows = kf * row_means.iter().map(|&m| (m - grand).powi(2)).sum::<T>();
        let ss_cols = nf * col_means.iter().map(|&m| (m - grand).powi(2)).sum::<T>();
        let ss_error = rows
            .iter()
            .zip(&row_means)
            .flat_map(|(r, &rm)| {
                r.iter()
                    .zip(&col_means)
                    .map(move |(&x, &cm)| (x - rm - cm + grand).powi(2))
            })
            .sum::<T>();
        let ss_total = rows.iter().flatten().map(|&x| (x - grand).powi(2)).sum::<T>();

        let one = T::one();
        Ok(Self {
            n,
            k,
            ms_rows: ss_rows / (nf - one),
            ms_cols: ss_cols / (kf - one),
            ms_error: ss_error / ((nf - one) * (kf - one)),
            ss_total,
        })
    }

    pub fn icc(&self, variant: IccVariant) -> Result<T> {
        let (nf, kf) = (T::from_count(self.n), T::from_count(self.k));
        let scale = self.ss_total.abs().max(T::one());
        if self.ss_total <= T::epsilon() * scale {
            return Err(Error::Degenerate("all ratings are identical".into()));
        }
        let (msr, msc, mse) = (self.ms_rows, self.ms_cols, self.ms_error);
        let denominator = match variant {
            IccVariant::Single => msr + (kf - T::one()) * mse + kf * (msc - mse) / nf,
            IccVariant::Average => msr + (msc - mse) / nf,
        };
        if denominator <= T::epsilon() * scale {
            // The average-measure denominator only turns non-positive when error
            // variance dominates (msr < mse); the coefficient's limit there is -1.
            if variant == IccVariant::Average && msr < mse {
                return Ok(-T::one());
            }
            return Err(Error::Degenerate("ICC denominator vanishes".into()));
        }
        let icc = (msr - mse) / denominator;
        Ok(icc.max(-T::one()).min(T::one()))
    }
}

pub fn icc<T: Weight>(rows: &[Vec<T>], variant: IccVariant) -> Result<T> {
    TwoWayAnova::new(rows)?.icc(variant)
}
