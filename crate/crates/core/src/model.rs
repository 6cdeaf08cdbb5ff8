//! Explanation objects: schemas, instances, rules and feature-importance weights.
//!
//! A local explanation pairs a decision rule `p -> y` with a list of signed
//! importance weights. The rule premise is a conjunction of predicates, each a
//! numeric interval or an admissible set of category labels on one feature.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("feature `{0}` is not part of the instance or schema")]
    UnknownFeature(String),
    #[error("predicate on `{feature}` does not match the kind of its value")]
    KindMismatch { feature: String },
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Numerical,
    Categorical,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureKind::Numerical => f.write_str("numerical"),
            FeatureKind::Categorical => f.write_str("categorical"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureDomain {
    /// Closed range `[lo, hi]` in feature units.
    Numerical { lo: f64, hi: f64 },
    /// Ordered, distinct category labels.
    Categorical { labels: Vec<String> },
}

/// One column of a tabular dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFeatureSpec", into = "RawFeatureSpec")]
pub struct FeatureSpec {
    name: String,
    domain: FeatureDomain,
}

impl FeatureSpec {
    pub fn numerical(name: impl Into<String>, lo: f64, hi: f64) -> Result<Self, ModelError> {
        let name = name.into();
        if name.is_empty() {
            return Err(ModelError::InvalidSchema("feature name is empty".into()));
        }
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(ModelError::InvalidSchema(format!(
                "feature `{name}` has invalid range [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            name,
            domain: FeatureDomain::Numerical { lo, hi },
        })
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        if name.is_empty() {
            return Err(ModelError::InvalidSchema("feature name is empty".into()));
        }
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(ModelError::InvalidSchema(format!(
                "categorical feature `{name}` has no labels"
            )));
        }
        let mut seen = BTreeSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(ModelError::InvalidSchema(format!(
                    "categorical feature `{name}` repeats label `{label}`"
                )));
            }
        }
        Ok(Self {
            name,
            domain: FeatureDomain::Categorical { labels },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &FeatureDomain {
        &self.domain
    }

    pub fn kind(&self) -> FeatureKind {
        match self.domain {
            FeatureDomain::Numerical { .. } => FeatureKind::Numerical,
            FeatureDomain::Categorical { .. } => FeatureKind::Categorical,
        }
    }

    /// Category labels, or `None` for a numerical feature.
    pub fn labels(&self) -> Option<&[String]> {
        match &self.domain {
            FeatureDomain::Categorical { labels } => Some(labels),
            FeatureDomain::Numerical { .. } => None,
        }
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.labels()
            .is_some_and(|ls| ls.iter().any(|l| l == label))
    }
}

#[derive(Serialize, Deserialize)]
struct RawFeatureSpec {
    name: String,
    kind: FeatureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl TryFrom<RawFeatureSpec> for FeatureSpec {
    type Error = ModelError;

    fn try_from(raw: RawFeatureSpec) -> Result<Self, Self::Error> {
        match (raw.kind, raw.range, raw.labels) {
            (FeatureKind::Numerical, Some([lo, hi]), None) => Self::numerical(raw.name, lo, hi),
            (FeatureKind::Categorical, None, Some(labels)) => Self::categorical(raw.name, labels),
            (kind, _, _) => Err(ModelError::InvalidSchema(format!(
                "feature `{}`: a {kind} feature needs exactly {}",
                raw.name,
                if kind == FeatureKind::Numerical {
                    "`range: [lo, hi]`"
                } else {
                    "`labels: [...]`"
                }
            ))),
        }
    }
}

impl From<FeatureSpec> for RawFeatureSpec {
    fn from(spec: FeatureSpec) -> Self {
        match spec.domain {
            FeatureDomain::Numerical { lo, hi } => RawFeatureSpec {
                name: spec.name,
                kind: FeatureKind::Numerical,
                range: Some([lo, hi]),
                labels: None,
            },
            FeatureDomain::Categorical { labels } => RawFeatureSpec {
                name: spec.name,
                kind: FeatureKind::Categorical,
                range: None,
                labels: Some(labels),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema", into = "RawSchema")]
pub struct DatasetSchema {
    features: Vec<FeatureSpec>,
    target_name: String,
    target_classes: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RawSchema {
    features: Vec<FeatureSpec>,
    target_name: String,
    target_classes: Vec<String>,
}

impl TryFrom<RawSchema> for DatasetSchema {
    type Error = ModelError;

    fn try_from(raw: RawSchema) -> Result<Self, Self::Error> {
        DatasetSchema::new(raw.features, raw.target_name, raw.target_classes)
    }
}

impl From<DatasetSchema> for RawSchema {
    fn from(schema: DatasetSchema) -> Self {
        RawSchema {
            features: schema.features,
            target_name: schema.target_name,
            target_classes: schema.target_classes,
        }
    }
}

impl DatasetSchema {
    pub fn new(
        features: Vec<FeatureSpec>,
        target_name: impl Into<String>,
        target_classes: Vec<String>,
    ) -> Result<Self, ModelError> {
        let target_name = target_name.into();
        if features.is_empty() {
            return Err(ModelError::InvalidSchema("schema has no features".into()));
        }
        let mut names = BTreeSet::new();
        for f in &features {
            if !names.insert(f.name()) {
                return Err(ModelError::InvalidSchema(format!(
                    "feature `{}` declared twice",
                    f.name()
                )));
            }
        }
        if target_name.is_empty() {
            return Err(ModelError::InvalidSchema("target name is empty".into()));
        }
        if names.contains(target_name.as_str()) {
            return Err(ModelError::InvalidSchema(format!(
                "target `{target_name}` is also a feature"
            )));
        }
        if target_classes.is_empty() {
            return Err(ModelError::InvalidSchema("no target classes".into()));
        }
        let mut classes = BTreeSet::new();
        for c in &target_classes {
            if !classes.insert(c.as_str()) {
                return Err(ModelError::InvalidSchema(format!(
                    "target class `{c}` declared twice"
                )));
            }
        }
        Ok(Self {
            features,
            target_name,
            target_classes,
        })
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn feature(&self, name: &str) -> Option<&FeatureSpec> {
        self.features.iter().find(|f| f.name() == name)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name() == name)
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn target_classes(&self) -> &[String] {
        &self.target_classes
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.target_classes.iter().any(|c| c == class)
    }
}

/// A scalar feature value: a number for numerical features, a label otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Label(String),
}

impl Value {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            Value::Label(_) => None,
        }
    }

    pub fn as_label(&self) -> Option<&str> {
        match self {
            Value::Label(s) => Some(s),
            Value::Number(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(x) => write!(f, "{x}"),
            Value::Label(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Number(x)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Label(s.to_owned())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Instance {
    pub values: BTreeMap<String, Value>,
}

impl Instance {
    pub fn get(&self, feature: &str) -> Option<&Value> {
        self.values.get(feature)
    }
}

impl<K: Into<String>, V: Into<Value>> FromIterator<(K, V)> for Instance {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Instance {
            values: iter
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        }
    }
}

/// One end of a numeric interval. `open` makes the end strict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub value: f64,
    pub open: bool,
}

impl Bound {
    pub fn closed(value: f64) -> Self {
        Bound { value, open: false }
    }

    pub fn open(value: f64) -> Self {
        Bound { value, open: true }
    }
}

/// `lower <= x <= upper`; a missing end is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NumericInterval {
    pub lower: Option<Bound>,
    pub upper: Option<Bound>,
}

impl NumericInterval {
    pub fn closed(lower: f64, upper: f64) -> Self {
        NumericInterval {
            lower: Some(Bound::closed(lower)),
            upper: Some(Bound::closed(upper)),
        }
    }

    pub fn at_most(upper: f64) -> Self {
        NumericInterval {
            lower: None,
            upper: Some(Bound::closed(upper)),
        }
    }

    pub fn at_least(lower: f64) -> Self {
        NumericInterval {
            lower: Some(Bound::closed(lower)),
            upper: None,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = match self.lower {
            None => true,
            Some(Bound { value, open: false }) => x >= value,
            Some(Bound { value, open: true }) => x > value,
        };
        let below = match self.upper {
            None => true,
            Some(Bound { value, open: false }) => x <= value,
            Some(Bound { value, open: true }) => x < value,
        };
        above && below
    }

    /// True when no real number satisfies the interval.
    pub fn is_empty(&self) -> bool {
        match (self.lower, self.upper) {
            (Some(l), Some(u)) => l.value > u.value || (l.value == u.value && (l.open || u.open)),
            _ => false,
        }
    }

    pub fn intersect(&self, other: &NumericInterval) -> NumericInterval {
        let lower = match (self.lower, other.lower) {
            (Some(a), Some(b)) => Some(if a.value > b.value {
                a
            } else if b.value > a.value {
                b
            } else {
                Bound {
                    value: a.value,
                    open: a.open || b.open,
                }
            }),
            (a, b) => a.or(b),
        };
        let upper = match (self.upper, other.upper) {
            (Some(a), Some(b)) => Some(if a.value < b.value {
                a
            } else if b.value < a.value {
                b
            } else {
                Bound {
                    value: a.value,
                    open: a.open || b.open,
                }
            }),
            (a, b) => a.or(b),
        };
        NumericInterval { lower, upper }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PredicateBody {
    Interval(NumericInterval),
    /// Admissible labels, kept in source order.
    Set(Vec<String>),
}

impl PredicateBody {
    pub fn kind(&self) -> FeatureKind {
        match self {
            PredicateBody::Interval(_) => FeatureKind::Numerical,
            PredicateBody::Set(_) => FeatureKind::Categorical,
        }
    }

    /// `None` when the body kind does not fit the value.
    pub fn is_satisfied_by(&self, value: &Value) -> Option<bool> {
        match (self, value) {
            (PredicateBody::Interval(iv), Value::Number(x)) => Some(iv.contains(*x)),
            (PredicateBody::Set(labels), Value::Label(l)) => Some(labels.iter().any(|s| s == l)),
            _ => None,
        }
    }

    /// Conjunction of two conditions on the same feature. The result may be
    /// empty; callers report that as a violation.
    pub fn intersect(&self, other: &PredicateBody) -> Option<PredicateBody> {
        match (self, other) {
            (PredicateBody::Interval(a), PredicateBody::Interval(b)) => {
                Some(PredicateBody::Interval(a.intersect(b)))
            }
            (PredicateBody::Set(a), PredicateBody::Set(b)) => Some(PredicateBody::Set(
                a.iter().filter(|l| b.contains(l)).cloned().collect(),
            )),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPredicate", into = "RawPredicate")]
pub struct Predicate {
    pub feature: String,
    pub body: PredicateBody,
}

impl Predicate {
    pub fn interval(feature: impl Into<String>, interval: NumericInterval) -> Self {
        Predicate {
            feature: feature.into(),
            body: PredicateBody::Interval(interval),
        }
    }

    pub fn set<S: Into<String>>(
        feature: impl Into<String>,
        labels: impl IntoIterator<Item = S>,
    ) -> Self {
        Predicate {
            feature: feature.into(),
            body: PredicateBody::Set(labels.into_iter().map(Into::into).collect()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawPredicateKind {
    Interval,
    Set,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPredicate {
    feature: String,
    kind: RawPredicateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    upper: Option<f64>,
    #[serde(default, skip_serializing_if = "is_false")]
    lower_open: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    upper_open: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl TryFrom<RawPredicate> for Predicate {
    type Error = String;

    fn try_from(raw: RawPredicate) -> Result<Self, Self::Error> {
        let body = match raw.kind {
            RawPredicateKind::Interval => {
                if raw.labels.is_some() {
                    return Err(format!("interval on `{}` carries labels", raw.feature));
                }
                if raw.lower.is_none() && raw.lower_open || raw.upper.is_none() && raw.upper_open {
                    return Err(format!("open flag without a bound on `{}`", raw.feature));
                }
                PredicateBody::Interval(NumericInterval {
                    lower: raw.lower.map(|value| Bound {
                        value,
                        open: raw.lower_open,
                    }),
                    upper: raw.upper.map(|value| Bound {
                        value,
                        open: raw.upper_open,
                    }),
                })
            }
            RawPredicateKind::Set => {
                if raw.lower.is_some() || raw.upper.is_some() || raw.lower_open || raw.upper_open {
                    return Err(format!("set on `{}` carries interval bounds", raw.feature));
                }
                PredicateBody::Set(
                    raw.labels
                        .ok_or_else(|| format!("set on `{}` has no labels", raw.feature))?,
                )
            }
        };
        Ok(Predicate {
            feature: raw.feature,
            body,
        })
    }
}

impl From<Predicate> for RawPredicate {
    fn from(p: Predicate) -> Self {
        match p.body {
            PredicateBody::Interval(iv) => RawPredicate {
                feature: p.feature,
                kind: RawPredicateKind::Interval,
                lower: iv.lower.map(|b| b.value),
                upper: iv.upper.map(|b| b.value),
                lower_open: iv.lower.is_some_and(|b| b.open),
                upper_open: iv.upper.is_some_and(|b| b.open),
                labels: None,
            },
            PredicateBody::Set(labels) => RawPredicate {
                feature: p.feature,
                kind: RawPredicateKind::Set,
                lower: None,
                upper: None,
                lower_open: false,
                upper_open: false,
                labels: Some(labels),
            },
        }
    }
}

/// A decision rule: conjunctive premise and the class it implies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub premise: Vec<Predicate>,
    pub consequence: String,
}

impl Rule {
    pub fn new(premise: Vec<Predicate>, consequence: impl Into<String>) -> Self {
        Rule {
            premise,
            consequence: consequence.into(),
        }
    }

    pub fn predicate_for(&self, feature: &str) -> Option<&Predicate> {
        self.premise.iter().find(|p| p.feature == feature)
    }

    pub fn mentions(&self, feature: &str) -> bool {
        self.predicate_for(feature).is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureWeight {
    pub feature: String,
    pub weight: f64,
}

impl FeatureWeight {
    pub fn new(feature: impl Into<String>, weight: f64) -> Self {
        FeatureWeight {
            feature: feature.into(),
            weight,
        }
    }
}

/// One explained instance: the unit everything downstream renders.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplanationBundle {
    pub id: String,
    pub schema_ref: String,
    pub instance: Instance,
    pub prediction: String,
    pub rule: Rule,
    pub importance: Vec<FeatureWeight>,
}

/// Whether every premise predicate holds for the instance. Endpoints are
/// inclusive unless flagged open; unbounded ends never constrain.
pub fn covers(instance: &Instance, rule: &Rule) -> Result<bool, ModelError> {
    let mut covered = true;
    for predicate in &rule.premise {
        let value = instance
            .get(&predicate.feature)
            .ok_or_else(|| ModelError::UnknownFeature(predicate.feature.clone()))?;
        let holds =
            predicate
                .body
                .is_satisfied_by(value)
                .ok_or_else(|| ModelError::KindMismatch {
                    feature: predicate.feature.clone(),
                })?;
        covered &= holds;
    }
    Ok(covered)
}

/// Sorts weights by decreasing magnitude. Equal magnitudes keep input order.
pub fn rank_by_importance(importance: &[FeatureWeight]) -> Vec<FeatureWeight> {
    let mut ranked = importance.to_vec();
    ranked.sort_by(|a, b| b.weight.abs().total_cmp(&a.weight.abs()));
    ranked
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    EmptyId,
    UnknownFeature,
    MissingValue,
    KindMismatch,
    LabelOutOfDomain,
    NonFiniteValue,
    UnboundedInterval,
    EmptyPredicate,
    DuplicatePredicate,
    UnknownClass,
    DuplicateWeight,
    NonFiniteWeight,
    PredictionMismatch,
    NotCovered,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// Field path inside the bundle document, e.g. `rule.premise[2].labels`.
    pub path: String,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, path: impl Into<String>, kind: ViolationKind, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            kind,
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks a bundle against its schema, including local coverage of the
/// instance by its own rule.
pub fn validate_bundle(bundle: &ExplanationBundle, schema: &DatasetSchema) -> ValidationReport {
    let mut report = ValidationReport::default();
    if bundle.id.is_empty() {
        report.push("id", ViolationKind::EmptyId, "bundle id is empty");
    }
    validate_instance(&bundle.instance, schema, &mut report);
    let premise_ok = validate_rule(&bundle.rule, schema, &mut report);

    if !schema.has_class(&bundle.prediction) {
        report.push(
            "prediction",
            ViolationKind::UnknownClass,
            format!(
                "`{}` is not a class of `{}`",
                bundle.prediction,
                schema.target_name()
            ),
        );
    }
    if bundle.prediction != bundle.rule.consequence {
        report.push(
            "prediction",
            ViolationKind::PredictionMismatch,
            format!(
                "prediction `{}` differs from rule consequence `{}`",
                bundle.prediction, bundle.rule.consequence
            ),
        );
    }

    let mut weighted = BTreeSet::new();
    for (i, fw) in bundle.importance.iter().enumerate() {
        let path = format!("importance[{i}]");
        if schema.feature(&fw.feature).is_none() {
            report.push(
                format!("{path}.feature"),
                ViolationKind::UnknownFeature,
                format!("unknown feature `{}`", fw.feature),
            );
        }
        if !weighted.insert(fw.feature.as_str()) {
            report.push(
                format!("{path}.feature"),
                ViolationKind::DuplicateWeight,
                format!("second weight for `{}`", fw.feature),
            );
        }
        if !fw.weight.is_finite() {
            report.push(
                format!("{path}.weight"),
                ViolationKind::NonFiniteWeight,
                format!("weight for `{}` is not finite", fw.feature),
            );
        }
    }

    if premise_ok {
        if let Ok(false) = covers(&bundle.instance, &bundle.rule) {
            report.push(
                "rule",
                ViolationKind::NotCovered,
                "the instance does not satisfy its own rule",
            );
        }
    }
    report
}

fn validate_instance(instance: &Instance, schema: &DatasetSchema, report: &mut ValidationReport) {
    for spec in schema.features() {
        let path = format!("instance.{}", spec.name());
        match (instance.get(spec.name()), spec.domain()) {
            (None, _) => report.push(
                path,
                ViolationKind::MissingValue,
                format!("no value for `{}`", spec.name()),
            ),
            (Some(Value::Number(x)), FeatureDomain::Numerical { .. }) => {
                if !x.is_finite() {
                    report.push(path, ViolationKind::NonFiniteValue, "value is not finite");
                }
            }
            (Some(Value::Label(l)), FeatureDomain::Categorical { labels }) => {
                if !labels.contains(l) {
                    report.push(
                        path,
                        ViolationKind::LabelOutOfDomain,
                        format!("`{l}` is not a label of `{}`", spec.name()),
                    );
                }
            }
            (Some(_), _) => report.push(
                path,
                ViolationKind::KindMismatch,
                format!(
                    "value does not fit {} feature `{}`",
                    spec.kind(),
                    spec.name()
                ),
            ),
        }
    }
    for name in instance.values.keys() {
        if schema.feature(name).is_none() {
            report.push(
                format!("instance.{name}"),
                ViolationKind::UnknownFeature,
                format!("unknown feature `{name}`"),
            );
        }
    }
}

/// Returns whether every predicate is structurally sound enough for
/// coverage to be evaluated.
fn validate_rule(rule: &Rule, schema: &DatasetSchema, report: &mut ValidationReport) -> bool {
    let mut sound = true;
    let mut seen = BTreeSet::new();
    for (i, p) in rule.premise.iter().enumerate() {
        let path = format!("rule.premise[{i}]");
        if !seen.insert(p.feature.as_str()) {
            report.push(
                format!("{path}.feature"),
                ViolationKind::DuplicatePredicate,
                format!("second predicate on `{}`", p.feature),
            );
        }
        let Some(spec) = schema.feature(&p.feature) else {
            report.push(
                format!("{path}.feature"),
                ViolationKind::UnknownFeature,
                format!("unknown feature `{}`", p.feature),
            );
            sound = false;
            continue;
        };
        if spec.kind() != p.body.kind() {
            report.push(
                format!("{path}.kind"),
                ViolationKind::KindMismatch,
                format!(
                    "{} predicate on {} feature `{}`",
                    p.body.kind(),
                    spec.kind(),
                    p.feature
                ),
            );
            sound = false;
            continue;
        }
        match &p.body {
            PredicateBody::Interval(iv) => {
                let finite = iv.lower.is_none_or(|b| b.value.is_finite())
                    && iv.upper.is_none_or(|b| b.value.is_finite());
                if !finite {
                    report.push(path, ViolationKind::NonFiniteValue, "bound is not finite");
                } else if iv.lower.is_none() && iv.upper.is_none() {
                    report.push(
                        path,
                        ViolationKind::UnboundedInterval,
                        format!("interval on `{}` has no bound", p.feature),
                    );
                } else if iv.is_empty() {
                    report.push(
                        path,
                        ViolationKind::EmptyPredicate,
                        format!("interval on `{}` admits no value", p.feature),
                    );
                }
            }
            PredicateBody::Set(labels) => {
                if labels.is_empty() {
                    report.push(
                        format!("{path}.labels"),
                        ViolationKind::EmptyPredicate,
                        format!("label set on `{}` is empty", p.feature),
                    );
                }
                let mut distinct = BTreeSet::new();
                for l in labels {
                    if !spec.has_label(l) {
                        report.push(
                            format!("{path}.labels"),
                            ViolationKind::LabelOutOfDomain,
                            format!("`{l}` is not a label of `{}`", p.feature),
                        );
                    } else if !distinct.insert(l.as_str()) {
                        report.push(
                            format!("{path}.labels"),
                            ViolationKind::DuplicatePredicate,
                            format!("label `{l}` listed twice"),
                        );
                    }
                }
            }
        }
    }
    if !schema.has_class(&rule.consequence) {
        report.push(
            "rule.consequence",
            ViolationKind::UnknownClass,
            format!(
                "`{}` is not a class of `{}`",
                rule.consequence,
                schema.target_name()
            ),
        );
    }
    sound
}
