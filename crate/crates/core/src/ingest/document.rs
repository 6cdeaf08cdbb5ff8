//! JSON documents for schemas and explanation bundles.
//!
//! A bundle's `rule` is either a rule-text string or a structured object
//! `{premise: [...], consequence}`. Bundles are always emitted structured.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rule_text::{merge_into, parse_rule_text, RuleParseError, RuleText};
use crate::model::{
    validate_bundle, DatasetSchema, ExplanationBundle, FeatureWeight, Instance, Rule,
    ValidationReport,
};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed document at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("rule: {0}")]
    Rule(#[from] RuleParseError),
    #[error("invalid bundle:\n{0}")]
    Invalid(ValidationReport),
}

impl From<serde_json::Error> for DocumentError {
    fn from(e: serde_json::Error) -> Self {
        DocumentError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RuleSource {
    Text(String),
    Structured(Rule),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBundle {
    id: String,
    schema_ref: String,
    instance: Instance,
    prediction: String,
    rule: RuleSource,
    #[serde(default)]
    importance: Vec<FeatureWeight>,
}

#[derive(Deserialize)]
struct SchemaRefOnly {
    schema_ref: String,
}

/// Reads a schema document. An `id` key, when present, is ignored here; the
/// dataset id comes from the file name.
pub fn parse_schema(document: &str) -> Result<DatasetSchema, DocumentError> {
    Ok(serde_json::from_str(document)?)
}

pub fn emit_schema(schema: &DatasetSchema) -> String {
    serde_json::to_string_pretty(schema).expect("schema serializes")
}

/// Extracts `schema_ref` without interpreting the rest of the bundle.
pub fn peek_schema_ref(document: &str) -> Result<String, DocumentError> {
    let r: SchemaRefOnly = serde_json::from_str(document)?;
    Ok(r.schema_ref)
}

/// Parses and validates a bundle. Any violation rejects the document.
pub fn parse_bundle(
    document: &str,
    schema: &DatasetSchema,
) -> Result<ExplanationBundle, DocumentError> {
    let raw: RawBundle = serde_json::from_str(document)?;
    let rule = match raw.rule {
        RuleSource::Text(text) => parse_rule_text(&RuleText(text), schema)?,
        RuleSource::Structured(rule) => {
            let mut premise = Vec::with_capacity(rule.premise.len());
            for p in rule.premise {
                merge_into(&mut premise, p);
            }
            Rule::new(premise, rule.consequence)
        }
    };
    let bundle = ExplanationBundle {
        id: raw.id,
        schema_ref: raw.schema_ref,
        instance: raw.instance,
        prediction: raw.prediction,
        rule,
        importance: raw.importance,
    };
    let report = validate_bundle(&bundle, schema);
    if report.is_valid() {
        Ok(bundle)
    } else {
        Err(DocumentError::Invalid(report))
    }
}

pub fn emit_bundle(bundle: &ExplanationBundle) -> String {
    serde_json::to_string_pretty(bundle).expect("bundle serializes")
}

/// Wraps any serializable report or view as a pretty JSON document.
pub fn to_document<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("document serializes")
}
