//! Scoring for explanation user studies.
//!
//! Participants answer feature-selection questions by ticking features (plus
//! an "I don't know" option) under each explanation modality. Answers are
//! compared with ground-truth vectors into two error counts: E1 for features
//! selected but absent, E2 for features present but not selected. The rest of
//! the module covers counterbalanced condition ordering, raw NASA-TLX, the
//! UES short form, and completion-time medians.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::stats;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StudyError {
    #[error("answer has {answer} entries, truth has {truth}")]
    LengthMismatch { answer: usize, truth: usize },
    #[error("no truth vector for instance {instance}, question {question}")]
    UnknownTask { instance: u8, question: u8 },
    #[error("participant `{participant}` answered instance {instance}, question {question} under {condition} twice")]
    DuplicateResponse {
        participant: String,
        condition: Modality,
        instance: u8,
        question: u8,
    },
    #[error("invalid response: {0}")]
    InvalidResponse(String),
    #[error("answer vectors need at least one entry")]
    EmptyAnswer,
    #[error("baseline condition `{0}` has no responses")]
    MissingBaseline(Modality),
    #[error("NASA-TLX rating {0} is not a multiple of 5 in 0..=100")]
    InvalidTlxRating(u32),
    #[error("UES item {0} is outside 1..=5")]
    InvalidUesItem(u32),
    #[error("UES reverse-keyed item index {0} is outside 0..12")]
    InvalidUesKeying(usize),
    #[error("completion-time group {0} is empty")]
    EmptyGroup(String),
    #[error("unknown condition `{0}`")]
    UnknownCondition(String),
}

/// The explanation presentations compared in a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    /// Raw rule text.
    Text,
    /// Rule predicates drawn as graphical blocks.
    Blocks,
    /// Importance bars aligned with distribution charts.
    Fiper,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Text, Modality::Blocks, Modality::Fiper];
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Modality::Text => "text",
            Modality::Blocks => "blocks",
            Modality::Fiper => "fiper",
        })
    }
}

impl FromStr for Modality {
    type Err = StudyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Modality::Text),
            "blocks" => Ok(Modality::Blocks),
            "fiper" => Ok(Modality::Fiper),
            other => Err(StudyError::UnknownCondition(other.to_owned())),
        }
    }
}

/// One entry per dataset feature plus a final "I don't know" entry.
/// Serialized as an array of 0/1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnswerVector(Vec<bool>);

impl AnswerVector {
    pub fn new(bits: Vec<bool>) -> Result<Self, StudyError> {
        if bits.is_empty() {
            return Err(StudyError::EmptyAnswer);
        }
        Ok(AnswerVector(bits))
    }

    /// Vector for `feature_count` features with the given positions ticked.
    pub fn from_selection(feature_count: usize, selected: &[usize], dont_know: bool) -> Self {
        let mut bits = vec![false; feature_count + 1];
        for &i in selected {
            bits[i] = true;
        }
        bits[feature_count] = dont_know;
        AnswerVector(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.0.len() - 1
    }

    pub fn dont_know(&self) -> bool {
        self.0[self.0.len() - 1]
    }
}

impl Serialize for AnswerVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|&b| u8::from(b)))
    }
}

impl<'de> Deserialize<'de> for AnswerVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<u8>::deserialize(d)?;
        let bits = raw
            .into_iter()
            .map(|b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(serde::de::Error::custom(format!(
                    "answer entries must be 0 or 1, got {other}"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        AnswerVector::new(bits).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResponse {
    pub participant_id: String,
    pub condition: Modality,
    pub instance_index: u8,
    pub question_index: u8,
    pub answer: AnswerVector,
    /// Seconds.
    pub completion_time: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorCounts {
    pub e1: u32,
    pub e2: u32,
}

impl ErrorCounts {
    pub fn total(&self) -> u32 {
        self.e1 + self.e2
    }
}

impl std::ops::AddAssign for ErrorCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.e1 += rhs.e1;
        self.e2 += rhs.e2;
    }
}

/// Elementwise comparison. The "I don't know" entry counts like any other
/// position.
pub fn score_answer(
    answer: &AnswerVector,
    truth: &AnswerVector,
) -> Result<ErrorCounts, StudyError> {
    if answer.len() != truth.len() {
        return Err(StudyError::LengthMismatch {
            answer: answer.len(),
            truth: truth.len(),
        });
    }
    let mut counts = ErrorCounts::default();
    for (&a, &t) in answer.bits().iter().zip(truth.bits()) {
        match (a, t) {
            (true, false) => counts.e1 += 1,
            (false, true) => counts.e2 += 1,
            _ => {}
        }
    }
    Ok(counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskKey {
    pub instance: u8,
    pub question: u8,
}

/// Ground truth for one (instance, question) task, as stored in truth files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub instance: u8,
    pub question: u8,
    pub answer: AnswerVector,
}

pub fn truth_map(records: &[TruthRecord]) -> BTreeMap<TaskKey, AnswerVector> {
    records
        .iter()
        .map(|r| {
            (
                TaskKey {
                    instance: r.instance,
                    question: r.question,
                },
                r.answer.clone(),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub condition: Modality,
    pub instance: u8,
    pub question: u8,
    pub participant: String,
}

/// Scored answers indexed by (condition, instance, question, participant).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorMatrix {
    pub cells: BTreeMap<CellKey, ErrorCounts>,
    /// Design cells with no response. They are not zero-filled.
    pub missing: Vec<CellKey>,
}

impl ErrorMatrix {
    pub fn answers_scored(&self) -> usize {
        self.cells.len()
    }

    pub fn total(&self) -> ErrorCounts {
        let mut t = ErrorCounts::default();
        for c in self.cells.values() {
            t += *c;
        }
        t
    }

    pub fn conditions(&self) -> BTreeSet<Modality> {
        self.cells.keys().map(|k| k.condition).collect()
    }

    pub fn totals_by_condition(&self) -> BTreeMap<Modality, ErrorCounts> {
        let mut out = BTreeMap::new();
        for (k, c) in &self.cells {
            *out.entry(k.condition).or_default() += *c;
        }
        out
    }
}

/// Scores every response against the truth for its task. The design grid is
/// every observed condition × every truth task × every observed participant;
/// grid cells without a response are listed in `missing`.
pub fn aggregate_errors(
    responses: &[StudyResponse],
    truths: &BTreeMap<TaskKey, AnswerVector>,
) -> Result<ErrorMatrix, StudyError> {
    let mut matrix = ErrorMatrix::default();
    for r in responses {
        if !(r.completion_time.is_finite() && r.completion_time >= 0.0) {
            return Err(StudyError::InvalidResponse(format!(
                "participant `{}` has completion time {}",
                r.participant_id, r.completion_time
            )));
        }
        let task = TaskKey {
            instance: r.instance_index,
            question: r.question_index,
        };
        let truth = truths.get(&task).ok_or(StudyError::UnknownTask {
            instance: task.instance,
            question: task.question,
        })?;
        let counts = score_answer(&r.answer, truth)?;
        let key = CellKey {
            condition: r.condition,
            instance: task.instance,
            question: task.question,
            participant: r.participant_id.clone(),
        };
        if matrix.cells.insert(key, counts).is_some() {
            return Err(StudyError::DuplicateResponse {
                participant: r.participant_id.clone(),
                condition: r.condition,
                instance: task.instance,
                question: task.question,
            });
        }
    }

    let conditions = matrix.conditions();
    let participants: BTreeSet<&str> = responses
        .iter()
        .map(|r| r.participant_id.as_str())
        .collect();
    for &condition in &conditions {
        for task in truths.keys() {
            for &p in &participants {
                let key = CellKey {
                    condition,
                    instance: task.instance,
                    question: task.question,
                    participant: p.to_owned(),
                };
                if !matrix.cells.contains_key(&key) {
                    matrix.missing.push(key);
                }
            }
        }
    }
    Ok(matrix)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaCell {
    pub e1: i64,
    pub e2: i64,
    pub total: i64,
}

/// Per-cell `condition − baseline` error differences for every non-baseline
/// condition. Negative means fewer errors than the baseline. Cells missing on
/// either side are skipped.
pub fn delta_error_matrix(
    matrix: &ErrorMatrix,
    baseline: Modality,
) -> Result<BTreeMap<CellKey, DeltaCell>, StudyError> {
    if !matrix.cells.keys().any(|k| k.condition == baseline) {
        return Err(StudyError::MissingBaseline(baseline));
    }
    let mut out = BTreeMap::new();
    for (key, counts) in &matrix.cells {
        if key.condition == baseline {
            continue;
        }
        let base_key = CellKey {
            condition: baseline,
            ..key.clone()
        };
        if let Some(base) = matrix.cells.get(&base_key) {
            let e1 = i64::from(counts.e1) - i64::from(base.e1);
            let e2 = i64::from(counts.e2) - i64::from(base.e2);
            out.insert(
                key.clone(),
                DeltaCell {
                    e1,
                    e2,
                    total: e1 + e2,
                },
            );
        }
    }
    Ok(out)
}

/// Condition orderings from a cyclic `k × k` Latin square: participant `p`
/// takes row `p mod k`, whose `j`-th entry is `(row + j) mod k`.
pub fn latin_square_order(participants: usize, conditions: usize) -> Vec<Vec<usize>> {
    (0..participants)
        .map(|p| {
            let row = p % conditions.max(1);
            (0..conditions).map(|j| (row + j) % conditions).collect()
        })
        .collect()
}

/// NASA-TLX dimensions in the order mental, physical, temporal,
/// performance, effort, frustration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[u32; 6]", into = "[u32; 6]")]
pub struct TlxRatings([u32; 6]);

impl TlxRatings {
    pub fn new(ratings: [u32; 6]) -> Result<Self, StudyError> {
        for r in ratings {
            if r > 100 || r % 5 != 0 {
                return Err(StudyError::InvalidTlxRating(r));
            }
        }
        Ok(TlxRatings(ratings))
    }

    pub fn values(&self) -> [u32; 6] {
        self.0
    }
}

impl TryFrom<[u32; 6]> for TlxRatings {
    type Error = StudyError;

    fn try_from(r: [u32; 6]) -> Result<Self, Self::Error> {
        TlxRatings::new(r)
    }
}

impl From<TlxRatings> for [u32; 6] {
    fn from(r: TlxRatings) -> Self {
        r.0
    }
}

/// Unweighted mean of the six dimensions.
pub fn raw_tlx(ratings: &TlxRatings) -> f64 {
    f64::from(ratings.0.iter().sum::<u32>()) / 6.0
}

/// Twelve Likert items: FA 0..3, PU 3..6, AE 6..9, RW 9..12.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[u32; 12]", into = "[u32; 12]")]
pub struct UesItems([u32; 12]);

impl UesItems {
    pub fn new(items: [u32; 12]) -> Result<Self, StudyError> {
        for i in items {
            if !(1..=5).contains(&i) {
                return Err(StudyError::InvalidUesItem(i));
            }
        }
        Ok(UesItems(items))
    }
}

impl TryFrom<[u32; 12]> for UesItems {
    type Error = StudyError;

    fn try_from(r: [u32; 12]) -> Result<Self, Self::Error> {
        UesItems::new(r)
    }
}

impl From<UesItems> for [u32; 12] {
    fn from(r: UesItems) -> Self {
        r.0
    }
}

/// Which item indices are reverse-scored (`6 − x`). Empty by default.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UesKeying {
    reverse: Vec<usize>,
}

impl UesKeying {
    pub fn new(reverse: Vec<usize>) -> Result<Self, StudyError> {
        if let Some(&bad) = reverse.iter().find(|&&i| i >= 12) {
            return Err(StudyError::InvalidUesKeying(bad));
        }
        Ok(UesKeying { reverse })
    }

    pub fn is_reversed(&self, item: usize) -> bool {
        self.reverse.contains(&item)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UesScores {
    pub fa: f64,
    pub pu: f64,
    pub ae: f64,
    pub rw: f64,
    pub overall: f64,
}

pub fn ues_short_form(items: &UesItems, keying: &UesKeying) -> UesScores {
    let keyed: Vec<f64> = items
        .0
        .iter()
        .enumerate()
        .map(|(i, &x)| f64::from(if keying.is_reversed(i) { 6 - x } else { x }))
        .collect();
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    UesScores {
        fa: mean(&keyed[0..3]),
        pu: mean(&keyed[3..6]),
        ae: mean(&keyed[6..9]),
        rw: mean(&keyed[9..12]),
        overall: mean(&keyed),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantTime {
    pub participant: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSummary {
    pub condition: Modality,
    pub instance: u8,
    pub median: f64,
    /// One bar per participant, in participant order.
    pub bars: Vec<ParticipantTime>,
}

/// Per-participant time on each (condition, instance): the sum of that
/// participant's completion times over the instance's questions.
pub fn times_by_group(
    responses: &[StudyResponse],
) -> BTreeMap<(Modality, u8), Vec<ParticipantTime>> {
    let mut acc: BTreeMap<(Modality, u8), BTreeMap<&str, f64>> = BTreeMap::new();
    for r in responses {
        *acc.entry((r.condition, r.instance_index))
            .or_default()
            .entry(r.participant_id.as_str())
            .or_default() += r.completion_time;
    }
    acc.into_iter()
        .map(|(k, per)| {
            let bars = per
                .into_iter()
                .map(|(p, seconds)| ParticipantTime {
                    participant: p.to_owned(),
                    seconds,
                })
                .collect();
            (k, bars)
        })
        .collect()
}

pub fn completion_time_summary(
    groups: &BTreeMap<(Modality, u8), Vec<ParticipantTime>>,
) -> Result<Vec<TimeSummary>, StudyError> {
    groups
        .iter()
        .map(|(&(condition, instance), bars)| {
            let times: Vec<f64> = bars.iter().map(|b| b.seconds).collect();
            let median = stats::median(&times).map_err(|_| {
                StudyError::EmptyGroup(format!("({condition}, instance {instance})"))
            })?;
            Ok(TimeSummary {
                condition,
                instance,
                median,
                bars: bars.clone(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCell {
    #[serde(flatten)]
    pub key: CellKey,
    pub e1: u32,
    pub e2: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRecord {
    #[serde(flatten)]
    pub key: CellKey,
    #[serde(flatten)]
    pub delta: DeltaCell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionTotal {
    pub condition: Modality,
    pub e1: u32,
    pub e2: u32,
}

/// Everything a study figure needs: absolute errors, deltas against the
/// baseline, and completion-time medians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub answers_scored: usize,
    pub total: ErrorCounts,
    pub totals: Vec<ConditionTotal>,
    pub cells: Vec<ScoredCell>,
    pub missing: Vec<CellKey>,
    pub baseline: Option<Modality>,
    pub delta: Vec<DeltaRecord>,
    pub times: Vec<TimeSummary>,
}

/// Request body for batch scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub truths: Vec<TruthRecord>,
    pub responses: Vec<StudyResponse>,
    #[serde(default)]
    pub baseline: Option<Modality>,
}

pub fn score_study(
    truths: &[TruthRecord],
    responses: &[StudyResponse],
    baseline: Option<Modality>,
) -> Result<StudyReport, StudyError> {
    let matrix = aggregate_errors(responses, &truth_map(truths))?;
    let delta = match baseline {
        Some(b) => delta_error_matrix(&matrix, b)?
            .into_iter()
            .map(|(key, delta)| DeltaRecord { key, delta })
            .collect(),
        None => Vec::new(),
    };
    let times = completion_time_summary(&times_by_group(responses))?;
    Ok(StudyReport {
        answers_scored: matrix.answers_scored(),
        total: matrix.total(),
        totals: matrix
            .totals_by_condition()
            .into_iter()
            .map(|(condition, c)| ConditionTotal {
                condition,
                e1: c.e1,
                e2: c.e2,
            })
            .collect(),
        cells: matrix
            .cells
            .iter()
            .map(|(k, c)| ScoredCell {
                key: k.clone(),
                e1: c.e1,
                e2: c.e2,
            })
            .collect(),
        missing: matrix.missing.clone(),
        baseline,
        delta,
        times,
    })
}

impl fmt::Display for StudyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "answers scored: {}", self.answers_scored)?;
        writeln!(f, "missing answers: {}", self.missing.len())?;
        writeln!(f, "errors: E1 {} E2 {}", self.total.e1, self.total.e2)?;
        for t in &self.totals {
            writeln!(f, "  {:<7} E1 {:>4}  E2 {:>4}", t.condition, t.e1, t.e2)?;
        }
        if let Some(b) = self.baseline {
            writeln!(f, "delta vs {b}:")?;
            let mut sums: BTreeMap<Modality, i64> = BTreeMap::new();
            for d in &self.delta {
                *sums.entry(d.key.condition).or_default() += d.delta.total;
            }
            for (c, s) in sums {
                writeln!(f, "  {c:<7} {s:+}")?;
            }
        }
        writeln!(f, "median completion time (s):")?;
        for t in &self.times {
            writeln!(
                f,
                "  {:<7} instance {}  {:.1}",
                t.condition, t.instance, t.median
            )?;
        }
        Ok(())
    }
}
