//! HTTP service and batch command line over the `fiper` library.
//!
//! The service keeps every dataset, summary and bundle in an immutable
//! [`Store`] snapshot. Ingest builds a complete replacement and swaps it in
//! one step, so a request sees either the old store or the new one.

pub mod api;
pub mod cli;
pub mod store;

pub use api::{router, ApiError, AppState};
pub use store::{Store, StoreError};
