//! Test support for `fiper`: seeded random generators for schemas, datasets
//! and explanation bundles, plus brute-force oracles that recompute results
//! along a different route than the library.

pub mod generators;
pub mod oracles;

use std::path::PathBuf;

/// Directory holding the German-credit-style fixture set.
pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/german_credit")
}
