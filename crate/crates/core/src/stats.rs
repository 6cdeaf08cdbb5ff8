//! Per-feature distribution summaries and the chart geometry derived from
//! them: box-plot five numbers, stacked-bar counts, observation markers and
//! rule highlight spans. All positions are normalized to the dataset's
//! `[min, max]` axis for the feature so markers and highlights share one
//! coordinate system.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Column, Dataset};
use crate::model::{DatasetSchema, FeatureSpec, Predicate, PredicateBody, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("cannot summarize an empty sample")]
    EmptySample,
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("`{label}` is not a label of `{feature}`")]
    UnknownLabel { feature: String, label: String },
    #[error("value kind does not match feature `{0}`")]
    KindMismatch(String),
    #[error("predicate on `{predicate}` applied to summary of `{summary}`")]
    FeatureMismatch { predicate: String, summary: String },
}

/// Quantile of an ascending sample by linear interpolation between closest
/// ranks: order statistic at rank `1 + p (n - 1)`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Median under the same interpolation as the quartiles.
pub fn median(values: &[f64]) -> Result<f64, StatsError> {
    Ok(five_number_summary(values)?.median)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

pub fn five_number_summary(values: &[f64]) -> Result<FiveNumber, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(FiveNumber {
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCount {
    pub label: String,
    pub count: u64,
}

/// Label counts in schema domain order, zero counts included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoricalSummary {
    pub entries: Vec<CategoryCount>,
}

impl CategoricalSummary {
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.count).sum()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.label == label)
    }
}

pub fn categorical_distribution<S: AsRef<str>>(
    values: &[S],
    spec: &FeatureSpec,
) -> Result<CategoricalSummary, StatsError> {
    let Some(labels) = spec.labels() else {
        return Err(StatsError::KindMismatch(spec.name().to_owned()));
    };
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut entries: Vec<CategoryCount> = labels
        .iter()
        .map(|l| CategoryCount {
            label: l.clone(),
            count: 0,
        })
        .collect();
    for v in values {
        let v = v.as_ref();
        let slot = labels
            .iter()
            .position(|l| l == v)
            .ok_or_else(|| StatsError::UnknownLabel {
                feature: spec.name().to_owned(),
                label: v.to_owned(),
            })?;
        entries[slot].count += 1;
    }
    Ok(CategoricalSummary { entries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SummaryBody {
    Numerical(FiveNumber),
    Categorical(CategoricalSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub feature: String,
    #[serde(flatten)]
    pub body: SummaryBody,
}

/// Summaries for every schema feature, in schema order.
pub fn summarize_dataset(
    dataset: &Dataset,
    schema: &DatasetSchema,
) -> Result<Vec<FeatureSummary>, StatsError> {
    schema
        .features()
        .iter()
        .zip(dataset.columns())
        .map(|(spec, column)| {
            let body = match column {
                Column::Numerical(v) => SummaryBody::Numerical(five_number_summary(v)?),
                Column::Categorical(v) => {
                    SummaryBody::Categorical(categorical_distribution(v, spec)?)
                }
            };
            Ok(FeatureSummary {
                feature: spec.name().to_owned(),
                body,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuartileBucket {
    BelowQ1,
    Q1ToMedian,
    MedianToQ3,
    AboveQ3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    QuartileBucket(QuartileBucket),
    SegmentIndex(usize),
}

/// Where the instance's diamond sits on a row's chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkerPosition {
    pub normalized: f64,
    #[serde(flatten)]
    pub placement: Placement,
    /// Set when a numerical value fell outside `[min, max]` and was pinned
    /// to the nearest end.
    pub clamped: bool,
}

fn normalize(five: &FiveNumber, x: f64) -> f64 {
    if five.max == five.min {
        0.5
    } else {
        ((x - five.min) / (five.max - five.min)).clamp(0.0, 1.0)
    }
}

fn bucket(five: &FiveNumber, x: f64) -> QuartileBucket {
    if x < five.q1 {
        QuartileBucket::BelowQ1
    } else if x < five.median {
        QuartileBucket::Q1ToMedian
    } else if x < five.q3 {
        QuartileBucket::MedianToQ3
    } else {
        QuartileBucket::AboveQ3
    }
}

pub fn locate_observation(
    summary: &FeatureSummary,
    value: &Value,
) -> Result<MarkerPosition, StatsError> {
    match (&summary.body, value) {
        (SummaryBody::Numerical(five), Value::Number(x)) => {
            if !x.is_finite() {
                return Err(StatsError::NonFinite);
            }
            let pinned = x.clamp(five.min, five.max);
            Ok(MarkerPosition {
                normalized: normalize(five, pinned),
                placement: Placement::QuartileBucket(bucket(five, pinned)),
                clamped: pinned != *x,
            })
        }
        (SummaryBody::Categorical(cat), Value::Label(label)) => {
            let index = cat
                .index_of(label)
                .ok_or_else(|| StatsError::UnknownLabel {
                    feature: summary.feature.clone(),
                    label: label.clone(),
                })?;
            let before: u64 = cat.entries[..index].iter().map(|e| e.count).sum();
            let own = cat.entries[index].count as f64;
            let total = cat.total() as f64;
            let normalized = if total == 0.0 {
                0.5
            } else {
                ((before as f64 + own / 2.0) / total).clamp(0.0, 1.0)
            };
            Ok(MarkerPosition {
                normalized,
                placement: Placement::SegmentIndex(index),
                clamped: false,
            })
        }
        _ => Err(StatsError::KindMismatch(summary.feature.clone())),
    }
}

/// Yellow overlay for one premise predicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum HighlightSpan {
    /// Closed normalized span `[start, end]`. `degenerate` marks a predicate
    /// lying wholly outside the observed range; the span then has zero width
    /// at the nearest axis end.
    Interval {
        start: f64,
        end: f64,
        degenerate: bool,
    },
    /// One flag per summary entry.
    Segments { flags: Vec<bool> },
}

impl HighlightSpan {
    pub fn contains(&self, marker: &MarkerPosition) -> bool {
        match (self, marker.placement) {
            (HighlightSpan::Interval { start, end, .. }, Placement::QuartileBucket(_)) => {
                *start <= marker.normalized && marker.normalized <= *end
            }
            (HighlightSpan::Segments { flags }, Placement::SegmentIndex(i)) => {
                flags.get(i).copied().unwrap_or(false)
            }
            _ => false,
        }
    }
}

pub fn predicate_highlight(
    predicate: &Predicate,
    summary: &FeatureSummary,
) -> Result<HighlightSpan, StatsError> {
    if predicate.feature != summary.feature {
        return Err(StatsError::FeatureMismatch {
            predicate: predicate.feature.clone(),
            summary: summary.feature.clone(),
        });
    }
    match (&predicate.body, &summary.body) {
        (PredicateBody::Interval(iv), SummaryBody::Numerical(five)) => {
            let lo = iv.lower.map_or(five.min, |b| b.value);
            let hi = iv.upper.map_or(five.max, |b| b.value);
            let (clo, chi) = (lo.max(five.min), hi.min(five.max));
            if clo <= chi {
                Ok(HighlightSpan::Interval {
                    start: normalize(five, clo),
                    end: normalize(five, chi),
                    degenerate: false,
                })
            } else {
                let at = if lo > five.max {
                    five.max
                } else if hi < five.min {
                    five.min
                } else {
                    lo.clamp(five.min, five.max)
                };
                let p = normalize(five, at);
                Ok(HighlightSpan::Interval {
                    start: p,
                    end: p,
                    degenerate: true,
                })
            }
        }
        (PredicateBody::Set(labels), SummaryBody::Categorical(cat)) => {
            Ok(HighlightSpan::Segments {
                flags: cat
                    .entries
                    .iter()
                    .map(|e| labels.contains(&e.label))
                    .collect(),
            })
        }
        _ => Err(StatsError::KindMismatch(summary.feature.clone())),
    }
}
