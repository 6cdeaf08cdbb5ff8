//! The two-panel explanation view: importance bars on the left, aligned
//! distribution charts with rule highlights and instance markers on the
//! right. Also the two baseline presentations (raw rule text and blocks).

mod modality;
mod svg;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{rank_by_importance, DatasetSchema, ExplanationBundle, FeatureWeight, Value};
use crate::stats::{
    locate_observation, predicate_highlight, FeatureSummary, HighlightSpan, MarkerPosition,
    StatsError,
};

pub use modality::{render_block_modality, render_text_modality, Block, BlockGroup, BlockSpec};
pub use svg::{render_svg, Geometry};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ViewError {
    #[error("no summary for feature `{0}`")]
    MissingSummary(String),
    #[error("instance has no value for `{0}`")]
    MissingValue(String),
    #[error("feature `{feature}`: {source}")]
    Stats {
        feature: String,
        #[source]
        source: StatsError,
    },
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("invalid palette: {0}")]
    Palette(String),
    #[error("unknown option value `{0}`")]
    UnknownOption(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Filter {
    #[default]
    AllFeatures,
    RuleOnly,
}

impl FromStr for Filter {
    type Err = ViewError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" | "all_features" => Ok(Filter::AllFeatures),
            "rule" | "rule_only" => Ok(Filter::RuleOnly),
            other => Err(ViewError::UnknownOption(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortOrder {
    #[default]
    AbsImportance,
    SchemaOrder,
}

impl FromStr for SortOrder {
    type Err = ViewError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "abs" | "abs_importance" => Ok(SortOrder::AbsImportance),
            "schema" | "schema_order" => Ok(SortOrder::SchemaOrder),
            other => Err(ViewError::UnknownOption(other.to_owned())),
        }
    }
}

/// `#rrggbb` color.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Color(String);

impl Color {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Color {
    type Error = ViewError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        let ok =
            s.len() == 7 && s.starts_with('#') && s[1..].bytes().all(|b| b.is_ascii_hexdigit());
        if ok {
            Ok(Color(s.to_ascii_uppercase()))
        } else {
            Err(ViewError::Palette(format!("`{s}` is not a #RRGGBB color")))
        }
    }
}

impl From<Color> for String {
    fn from(c: Color) -> Self {
        c.0
    }
}

impl FromStr for Color {
    type Err = ViewError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Color::try_from(s.to_owned())
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Palette {
    positive: Color,
    negative: Color,
    highlight: Color,
    marker: Color,
}

impl Palette {
    pub fn new(
        positive: Color,
        negative: Color,
        highlight: Color,
        marker: Color,
    ) -> Result<Self, ViewError> {
        if positive == negative {
            return Err(ViewError::Palette(
                "positive and negative colors must differ".into(),
            ));
        }
        Ok(Palette {
            positive,
            negative,
            highlight,
            marker,
        })
    }

    pub fn positive(&self) -> &Color {
        &self.positive
    }

    pub fn negative(&self) -> &Color {
        &self.negative
    }

    pub fn highlight(&self) -> &Color {
        &self.highlight
    }

    pub fn marker(&self) -> &Color {
        &self.marker
    }
}

impl Default for Palette {
    /// Okabe-Ito blue, reddish purple and yellow with black markers.
    fn default() -> Self {
        Palette {
            positive: Color("#0072B2".into()),
            negative: Color("#CC79A7".into()),
            highlight: Color("#F0E442".into()),
            marker: Color("#000000".into()),
        }
    }
}

#[derive(Deserialize)]
struct RawPalette {
    positive: Color,
    negative: Color,
    highlight: Color,
    marker: Color,
}

impl<'de> Deserialize<'de> for Palette {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawPalette::deserialize(d)?;
        Palette::new(raw.positive, raw.negative, raw.highlight, raw.marker)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ViewOptions {
    pub filter: Filter,
    pub sort: SortOrder,
    pub palette: Palette,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightSign {
    Positive,
    Negative,
    Zero,
}

impl WeightSign {
    pub fn of(weight: f64) -> Self {
        if weight > 0.0 {
            WeightSign::Positive
        } else if weight < 0.0 {
            WeightSign::Negative
        } else {
            WeightSign::Zero
        }
    }
}

/// One feature row: its bar on the left and its chart on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiperRow {
    pub feature: String,
    pub weight: f64,
    pub weight_sign: WeightSign,
    /// The instance's value, shown next to the summary in tooltips.
    pub observed: Value,
    pub summary: FeatureSummary,
    pub highlight: Option<HighlightSpan>,
    pub marker: MarkerPosition,
    pub in_rule: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiperView {
    pub bundle_id: String,
    pub prediction: String,
    pub options: ViewOptions,
    pub rows: Vec<FiperRow>,
}

impl FiperView {
    pub fn max_abs_weight(&self) -> f64 {
        self.rows.iter().map(|r| r.weight.abs()).fold(0.0, f64::max)
    }
}

/// Importance list completed with zero weights for every schema feature the
/// explainer did not report, appended in schema order.
pub fn completed_importance(
    bundle: &ExplanationBundle,
    schema: &DatasetSchema,
) -> Vec<FeatureWeight> {
    let mut weights: Vec<FeatureWeight> = bundle
        .importance
        .iter()
        .filter(|w| schema.feature(&w.feature).is_some())
        .cloned()
        .collect();
    for spec in schema.features() {
        if !weights.iter().any(|w| w.feature == spec.name()) {
            weights.push(FeatureWeight::new(spec.name(), 0.0));
        }
    }
    weights
}

pub fn build_fiper_view(
    bundle: &ExplanationBundle,
    schema: &DatasetSchema,
    summaries: &BTreeMap<String, FeatureSummary>,
    options: &ViewOptions,
) -> Result<FiperView, ViewError> {
    let weights = completed_importance(bundle, schema);
    let ordered = match options.sort {
        SortOrder::AbsImportance => rank_by_importance(&weights),
        SortOrder::SchemaOrder => {
            let mut w = weights;
            w.sort_by_key(|fw| schema.position(&fw.feature));
            w
        }
    };

    let mut rows = Vec::new();
    for fw in ordered {
        let predicate = bundle.rule.predicate_for(&fw.feature);
        if options.filter == Filter::RuleOnly && predicate.is_none() {
            continue;
        }
        let summary = summaries
            .get(&fw.feature)
            .ok_or_else(|| ViewError::MissingSummary(fw.feature.clone()))?;
        let observed = bundle
            .instance
            .get(&fw.feature)
            .ok_or_else(|| ViewError::MissingValue(fw.feature.clone()))?;
        let stats_err = |source| ViewError::Stats {
            feature: fw.feature.clone(),
            source,
        };
        let marker = locate_observation(summary, observed).map_err(stats_err)?;
        let highlight = predicate
            .map(|p| predicate_highlight(p, summary))
            .transpose()
            .map_err(stats_err)?;
        rows.push(FiperRow {
            weight_sign: WeightSign::of(fw.weight),
            weight: fw.weight,
            observed: observed.clone(),
            summary: summary.clone(),
            in_rule: highlight.is_some(),
            highlight,
            marker,
            feature: fw.feature,
        });
    }

    Ok(FiperView {
        bundle_id: bundle.id.clone(),
        prediction: bundle.prediction.clone(),
        options: options.clone(),
        rows,
    })
}

/// Wire document for a view: the view itself, field for field.
pub fn view_document(view: &FiperView) -> String {
    serde_json::to_string_pretty(view).expect("view serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FeatureSpec, NumericInterval, Predicate, Rule};
    use crate::stats::{five_number_summary, CategoricalSummary, CategoryCount, SummaryBody};

    fn schema() -> DatasetSchema {
        DatasetSchema::new(
            vec![
                FeatureSpec::numerical("age", 19.0, 75.0).unwrap(),
                FeatureSpec::categorical("housing", ["rent", "own"]).unwrap(),
                FeatureSpec::numerical("amount", 0.0, 100.0).unwrap(),
            ],
            "risk",
            vec!["good".into(), "bad".into()],
        )
        .unwrap()
    }

    fn summaries() -> BTreeMap<String, FeatureSummary> {
        let num = |name: &str, v: &[f64]| FeatureSummary {
            feature: name.into(),
            body: SummaryBody::Numerical(five_number_summary(v).unwrap()),
        };
        [
            num("age", &[19.0, 27.0, 33.0, 42.0, 75.0]),
            num("amount", &[0.0, 50.0, 100.0]),
            FeatureSummary {
                feature: "housing".into(),
                body: SummaryBody::Categorical(CategoricalSummary {
                    entries: vec![
                        CategoryCount {
                            label: "rent".into(),
                            count: 3,
                        },
                        CategoryCount {
                            label: "own".into(),
                            count: 5,
                        },
                    ],
                }),
            },
        ]
        .into_iter()
        .map(|s| (s.feature.clone(), s))
        .collect()
    }

    fn bundle(premise: Vec<Predicate>) -> ExplanationBundle {
        ExplanationBundle {
            id: "b".into(),
            schema_ref: "s".into(),
            instance: [
                ("age", Value::from(23.0)),
                ("housing", Value::from("rent")),
                ("amount", Value::from(40.0)),
            ]
            .into_iter()
            .collect(),
            prediction: "bad".into(),
            rule: Rule::new(premise, "bad"),
            importance: vec![
                FeatureWeight::new("housing", -0.4),
                FeatureWeight::new("amount", 0.2),
            ],
        }
    }

    fn opts(filter: Filter, sort: SortOrder) -> ViewOptions {
        ViewOptions {
            filter,
            sort,
            palette: Palette::default(),
        }
    }

    #[test]
    fn unlisted_rule_feature_gets_zero_weight_and_sinks() {
        let b = bundle(vec![Predicate::interval(
            "age",
            NumericInterval::closed(19.0, 31.0),
        )]);
        let v = build_fiper_view(&b, &schema(), &summaries(), &ViewOptions::default()).unwrap();
        let names: Vec<_> = v.rows.iter().map(|r| r.feature.as_str()).collect();
        assert_eq!(names, ["housing", "amount", "age"]);
        let age = &v.rows[2];
        assert_eq!(age.weight_sign, WeightSign::Zero);
        assert!(age.in_rule && age.highlight.is_some());
        assert!(v.rows[..2]
            .iter()
            .all(|r| !r.in_rule && r.highlight.is_none()));
    }

    #[test]
    fn rule_only_and_schema_order() {
        let b = bundle(vec![Predicate::interval(
            "age",
            NumericInterval::closed(19.0, 31.0),
        )]);
        let v = build_fiper_view(
            &b,
            &schema(),
            &summaries(),
            &opts(Filter::RuleOnly, SortOrder::AbsImportance),
        )
        .unwrap();
        assert_eq!(v.rows.len(), 1);
        let v = build_fiper_view(
            &b,
            &schema(),
            &summaries(),
            &opts(Filter::AllFeatures, SortOrder::SchemaOrder),
        )
        .unwrap();
        let names: Vec<_> = v.rows.iter().map(|r| r.feature.as_str()).collect();
        assert_eq!(names, ["age", "housing", "amount"]);
    }

    #[test]
    fn empty_premise_rule_only_is_empty() {
        let v = build_fiper_view(
            &bundle(vec![]),
            &schema(),
            &summaries(),
            &opts(Filter::RuleOnly, SortOrder::AbsImportance),
        )
        .unwrap();
        assert!(v.rows.is_empty());
    }

    #[test]
    fn missing_summary_is_an_error() {
        let mut s = summaries();
        s.remove("amount");
        let err =
            build_fiper_view(&bundle(vec![]), &schema(), &s, &ViewOptions::default()).unwrap_err();
        assert_eq!(err, ViewError::MissingSummary("amount".into()));
        // Filtered out rows need no summary.
        assert!(build_fiper_view(
            &bundle(vec![]),
            &schema(),
            &s,
            &opts(Filter::RuleOnly, SortOrder::AbsImportance)
        )
        .is_ok());
    }

    #[test]
    fn palette_and_options() {
        let blue: Color = "#0072b2".parse().unwrap();
        assert_eq!(blue.as_str(), "#0072B2");
        assert!("blue".parse::<Color>().is_err());
        assert!(Palette::new(blue.clone(), blue.clone(), blue.clone(), blue).is_err());
        assert_eq!("rule".parse::<Filter>().unwrap(), Filter::RuleOnly);
        assert_eq!(
            "schema".parse::<SortOrder>().unwrap(),
            SortOrder::SchemaOrder
        );
        assert!("x".parse::<Filter>().is_err());
    }

    #[test]
    fn view_document_round_trips() {
        let b = bundle(vec![Predicate::set("housing", ["rent"])]);
        let v = build_fiper_view(&b, &schema(), &summaries(), &ViewOptions::default()).unwrap();
        let doc = view_document(&v);
        assert!(doc.contains("\"positive\": \"#0072B2\""));
        let back: FiperView = serde_json::from_str(&doc).unwrap();
        assert_eq!(back, v);
    }
}
