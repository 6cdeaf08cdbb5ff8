//! Local explanation views that combine a decision rule with feature
//! importance.
//!
//! The crate reads a rule plus signed importance weights for one instance,
//! summarizes the dataset each feature comes from, and lays the two out side
//! by side: importance bars ranked by magnitude on the left, box plots or
//! stacked bars on the right with the rule's conditions highlighted and the
//! instance marked. It also renders the rule as plain text or as blocks, and
//! scores user studies that compare the three presentations.
//!
//! Modules, bottom up:
//!
//! - [`model`]: schemas, instances, rules, weights, coverage and validation
//! - [`ingest`]: rule text grammar, JSON documents, CSV datasets
//! - [`stats`]: five-number summaries, category counts, marker and highlight geometry
//! - [`view`]: view assembly, SVG, text and block renderings
//! - [`render`]: loaded datasets and the shared render path
//! - [`study`]: answer scoring, Latin squares, NASA-TLX, UES-SF, completion times

pub mod ingest;
pub mod model;
pub mod render;
pub mod stats;
pub mod study;
pub mod view;

pub use model::{
    covers, rank_by_importance, validate_bundle, DatasetSchema, ExplanationBundle, FeatureSpec,
    FeatureWeight, Instance, Predicate, Rule, ValidationReport, Value,
};
pub use render::{render_bundle, LoadedDataset, OutputFormat};
pub use view::{build_fiper_view, FiperView, ViewOptions};
