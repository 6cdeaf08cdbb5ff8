//! Loaded datasets and the one rendering path shared by batch tools and the
//! HTTP service, so both produce identical bytes.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::ingest::{parse_schema, to_document, Dataset, DatasetError, DocumentError};
use crate::model::{DatasetSchema, ExplanationBundle};
use crate::stats::{summarize_dataset, FeatureSummary, StatsError};
use crate::view::{
    build_fiper_view, render_block_modality, render_svg, render_text_modality, view_document,
    Geometry, ViewError, ViewOptions,
};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Document {
        path: PathBuf,
        #[source]
        source: DocumentError,
    },
    #[error("{}: {source}", path.display())]
    Dataset {
        path: PathBuf,
        #[source]
        source: DatasetError,
    },
    #[error("{}: {source}", path.display())]
    Stats {
        path: PathBuf,
        #[source]
        source: StatsError,
    },
}

/// A schema, its rows, and the per-feature summaries computed once at load.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub id: String,
    pub schema: DatasetSchema,
    pub dataset: Dataset,
    pub summaries: BTreeMap<String, FeatureSummary>,
    ordered: Vec<FeatureSummary>,
}

impl LoadedDataset {
    /// `origin` only labels errors.
    pub fn from_parts(
        id: impl Into<String>,
        schema_document: &str,
        csv: &[u8],
        origin: &Path,
    ) -> Result<Self, LoadError> {
        let schema = parse_schema(schema_document).map_err(|source| LoadError::Document {
            path: origin.to_owned(),
            source,
        })?;
        let dataset = Dataset::from_csv(csv, &schema).map_err(|source| LoadError::Dataset {
            path: origin.to_owned(),
            source,
        })?;
        Self::new(id, schema, dataset).map_err(|source| LoadError::Stats {
            path: origin.to_owned(),
            source,
        })
    }

    pub fn new(
        id: impl Into<String>,
        schema: DatasetSchema,
        dataset: Dataset,
    ) -> Result<Self, StatsError> {
        let ordered = summarize_dataset(&dataset, &schema)?;
        let summaries = ordered
            .iter()
            .map(|s| (s.feature.clone(), s.clone()))
            .collect();
        Ok(LoadedDataset {
            id: id.into(),
            schema,
            dataset,
            summaries,
            ordered,
        })
    }

    /// Reads `<dir>/<id>.schema.json` next to `<dir>/<id>.csv`, given either
    /// path.
    pub fn from_files(schema_path: &Path, csv_path: &Path) -> Result<Self, LoadError> {
        let read = |p: &Path| {
            std::fs::read(p).map_err(|source| LoadError::Io {
                path: p.to_owned(),
                source,
            })
        };
        let schema_bytes = read(schema_path)?;
        let schema_text = String::from_utf8_lossy(&schema_bytes);
        let csv = read(csv_path)?;
        let id = dataset_id(csv_path);
        let schema = parse_schema(&schema_text).map_err(|source| LoadError::Document {
            path: schema_path.to_owned(),
            source,
        })?;
        let dataset =
            Dataset::from_csv(csv.as_slice(), &schema).map_err(|source| LoadError::Dataset {
                path: csv_path.to_owned(),
                source,
            })?;
        Self::new(id, schema, dataset).map_err(|source| LoadError::Stats {
            path: csv_path.to_owned(),
            source,
        })
    }

    /// Summaries in schema order.
    pub fn ordered_summaries(&self) -> &[FeatureSummary] {
        &self.ordered
    }
}

/// `german_credit` for `.../german_credit.csv` or `.../german_credit.schema.json`.
pub fn dataset_id(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.strip_suffix(".schema.json")
        .or_else(|| name.strip_suffix(".csv"))
        .unwrap_or(&name)
        .to_owned()
}

/// Schema path conventionally paired with a dataset CSV.
pub fn schema_path_for(csv_path: &Path) -> PathBuf {
    csv_path.with_file_name(format!("{}.schema.json", dataset_id(csv_path)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Svg,
    Text,
    Blocks,
    View,
}

impl FromStr for OutputFormat {
    type Err = ViewError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "svg" => Ok(OutputFormat::Svg),
            "text" => Ok(OutputFormat::Text),
            "blocks" => Ok(OutputFormat::Blocks),
            "view" | "json" => Ok(OutputFormat::View),
            other => Err(ViewError::UnknownOption(other.to_owned())),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Svg => "svg",
            OutputFormat::Text => "text",
            OutputFormat::Blocks => "blocks",
            OutputFormat::View => "view",
        })
    }
}

impl OutputFormat {
    pub fn content_type(&self) -> &'static str {
        match self {
            OutputFormat::Svg => "image/svg+xml",
            OutputFormat::Text => "text/plain; charset=utf-8",
            OutputFormat::Blocks | OutputFormat::View => "application/json",
        }
    }
}

/// Renders one bundle in the requested format with the default geometry.
pub fn render_bundle(
    bundle: &ExplanationBundle,
    data: &LoadedDataset,
    format: OutputFormat,
    options: &ViewOptions,
) -> Result<Vec<u8>, ViewError> {
    let target = data.schema.target_name();
    Ok(match format {
        OutputFormat::Text => render_text_modality(bundle, target).into_bytes(),
        OutputFormat::Blocks => {
            let mut doc = to_document(&render_block_modality(bundle, target));
            doc.push('\n');
            doc.into_bytes()
        }
        OutputFormat::View | OutputFormat::Svg => {
            let view = build_fiper_view(bundle, &data.schema, &data.summaries, options)?;
            if format == OutputFormat::Svg {
                render_svg(&view, &Geometry::default())?
            } else {
                let mut doc = view_document(&view);
                doc.push('\n');
                doc.into_bytes()
            }
        }
    })
}
