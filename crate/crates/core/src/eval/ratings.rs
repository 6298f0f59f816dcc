use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::io::read_jsonl;

/// One answer on the five-point quality scale, or "do not know".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Likert {
    Score(i8),
    DoNotKnow,
}

impl Likert {
    pub const LEVELS: [i8; 5] = [-2, -1, 0, 1, 2];

    pub fn score(v: i64) -> std::result::Result<Self, String> {
        if (-2..=2).contains(&v) {
            Ok(Likert::Score(v as i8))
        } else {
            Err(format!("rating {v} outside -2..2"))
        }
    }

    pub fn value(self) -> Option<i8> {
        match self {
            Likert::Score(v) => Some(v),
            Likert::DoNotKnow => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Likert::Score(-2) => "very bad",
            Likert::Score(-1) => "bad",
            Likert::Score(0) => "acceptable",
            Likert::Score(1) => "good",
            Likert::Score(2) => "very good",
            Likert::Score(_) => "invalid",
            Likert::DoNotKnow => "do not know",
        }
    }

    /// Accepts an integer in -2..=2 or the string `"dnk"`.
    pub fn from_json(v: &serde_json::Value) -> std::result::Result<Self, String> {
        match v {
            serde_json::Value::String(s) if s == "dnk" => Ok(Likert::DoNotKnow),
            serde_json::Value::Number(n) => match n.as_i64() {
                Some(i) => Self::score(i),
                None => Err(format!("rating {n} is not an integer")),
            },
            other => Err(format!("expected an integer in -2..2 or \"dnk\", got {other}")),
        }
    }
}

impl fmt::Display for Likert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Likert::Score(v) => write!(f, "{v}"),
            Likert::DoNotKnow => f.write_str("dnk"),
        }
    }
}

impl Serialize for Likert {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Likert::Score(v) => s.serialize_i8(*v),
            Likert::DoNotKnow => s.serialize_str("dnk"),
        }
    }
}

impl<'de> Deserialize<'de> for Likert {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Likert::from_json(&v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rating {
    pub assessor: String,
    pub session_id: String,
    pub topic_quality: Likert,
    pub segmentation_quality: Likert,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    pub submitted_at: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Question {
    Topic,
    Segmentation,
}

impl Question {
    pub fn of(self, r: &Rating) -> Likert {
        match self {
            Question::Topic => r.topic_quality,
            Question::Segmentation => r.segmentation_quality,
        }
    }
}

/// Latest rating per (assessor, session). A rating replaces the stored one unless
/// it is strictly older; equal timestamps resolve to the later write.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RatingStore {
    ratings: BTreeMap<(String, String), Rating>,
}

impl RatingStore {
    pub fn from_ratings(ratings: impl IntoIterator<Item = Rating>) -> Self {
        let mut store = Self::default();
        for r in ratings {
            store.insert(r);
        }
        store
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(Self::from_ratings(read_jsonl::<Rating>(path)?))
    }

    /// Returns true when the rating became the current one.
    pub fn insert(&mut self, rating: Rating) -> bool {
        let key = (rating.assessor.clone(), rating.session_id.clone());
        match self.ratings.get(&key) {
            Some(old) if old.submitted_at > rating.submitted_at => false,
            _ => {
                self.ratings.insert(key, rating);
                true
            }
        }
    }

    pub fn get(&self, assessor: &str, session_id: &str) -> Option<&Rating> {
        self.ratings.get(&(assessor.to_owned(), session_id.to_owned()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rating> {
        self.ratings.values()
    }

    pub fn assessors_for(&self, session_id: &str) -> Vec<&str> {
        self.ratings
            .values()
            .filter(|r| r.session_id == session_id)
            .map(|r| r.assessor.as_str())
            .collect()
    }

    pub fn sessions_rated_by(&self, assessor: &str) -> BTreeSet<&str> {
        self.ratings
            .values()
            .filter(|r| r.assessor == assessor)
            .map(|r| r.session_id.as_str())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatingSummary {
    pub mean: f64,
    /// Number of non-"do not know" answers.
    pub n: usize,
    pub dnk: usize,
    /// Counts for -2, -1, 0, 1, 2.
    pub histogram: [usize; 5],
}

pub fn rating_summary<'a>(ratings: impl IntoIterator<Item = &'a Rating>, question: Question) -> Result<RatingSummary> {
    let mut histogram = [0usize; 5];
    let mut dnk = 0;
    let mut sum = 0i64;
    for r in ratings {
        match question.of(r) {
            Likert::Score(v) => {
                histogram[(v + 2) as usize] += 1;
                sum += i64::from(v);
            }
            Likert::DoNotKnow => dnk += 1,
        }
    }
    let n: usize = histogram.iter().sum();
    if n == 0 {
        return Err(Error::UndefinedMean);
    }
    Ok(RatingSummary {
        mean: sum as f64 / n as f64,
        n,
        dnk,
        histogram,
    })
}

/// Sessions × assessors; "do not know" cells are empty.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    pub subjects: Vec<String>,
    pub raters: Vec<String>,
    pub cells: Vec<Vec<Option<i8>>>,
}

impl RatingMatrix {
    pub fn from_ratings<'a>(ratings: impl IntoIterator<Item = &'a Rating>, question: Question) -> Self {
        let ratings: Vec<&Rating> = ratings.into_iter().collect();
        let subjects: Vec<String> = ratings.iter().map(|r| r.session_id.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let raters: Vec<String> = ratings.iter().map(|r| r.assessor.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let mut cells = vec![vec![None; raters.len()]; subjects.len()];
        for r in ratings {
            let i = subjects.binary_search(&r.session_id).expect("subject listed");
            let j = raters.binary_search(&r.assessor).expect("rater listed");
            cells[i][j] = question.of(r).value();
        }
        Self { subjects, raters, cells }
    }

    /// Rows with a value from every rater.
    pub fn complete_rows(&self) -> Vec<Vec<f64>> {
        self.cells
            .iter()
            .filter_map(|row| row.iter().map(|c| c.map(f64::from)).collect::<Option<Vec<f64>>>())
            .collect()
    }
}
