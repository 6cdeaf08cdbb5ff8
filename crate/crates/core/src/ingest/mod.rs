//! Reading and writing explanation sources: rule text, JSON documents and
//! CSV datasets.

mod dataset;
mod document;
mod rule_text;

pub use dataset::{Column, Dataset, DatasetError};
pub use document::{
    emit_bundle, emit_schema, parse_bundle, parse_schema, peek_schema_ref, to_document,
    DocumentError,
};
pub use rule_text::{emit_rule_text, parse_rule_text, RuleParseError, RuleText};
