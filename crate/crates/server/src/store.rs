use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use fiper::ingest::{parse_bundle, peek_schema_ref, DocumentError};
use fiper::render::{dataset_id, LoadError};
use fiper::{ExplanationBundle, LoadedDataset};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{}: no dataset CSV next to schema", path.display())]
    MissingCsv { path: PathBuf },
    #[error("{}: {source}", path.display())]
    Bundle {
        path: PathBuf,
        #[source]
        source: DocumentError,
    },
    #[error("{}: schema_ref `{schema_ref}` names no loaded dataset", path.display())]
    UnknownSchema { path: PathBuf, schema_ref: String },
    #[error("{}: duplicate bundle id `{id}`", path.display())]
    DuplicateBundle { path: PathBuf, id: String },
}

/// One immutable snapshot of everything the service serves.
#[derive(Debug, Clone, Default)]
pub struct Store {
    datasets: BTreeMap<String, Arc<LoadedDataset>>,
    bundles: BTreeMap<String, Arc<ExplanationBundle>>,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_owned(),
        source,
    }
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, StoreError> {
    let mut paths = std::fs::read_dir(dir)
        .map_err(io(dir))?
        .map(|e| e.map(|e| e.path()).map_err(io(dir)))
        .collect::<Result<Vec<_>, _>>()?;
    paths.sort();
    Ok(paths)
}

impl Store {
    /// Loads `<dir>/<id>.schema.json` with `<dir>/<id>.csv` for every
    /// dataset, then every `<dir>/bundles/*.json`.
    pub fn load_dir(dir: &Path) -> Result<Store, StoreError> {
        let mut store = Store::default();
        for path in sorted_entries(dir)? {
            let name = path.file_name().unwrap_or_default().to_string_lossy();
            if !name.ends_with(".schema.json") {
                continue;
            }
            let csv = path.with_file_name(format!("{}.csv", dataset_id(&path)));
            if !csv.is_file() {
                return Err(StoreError::MissingCsv { path });
            }
            let loaded = LoadedDataset::from_files(&path, &csv)?;
            store.datasets.insert(loaded.id.clone(), Arc::new(loaded));
        }
        let bundle_dir = dir.join("bundles");
        if bundle_dir.is_dir() {
            for path in sorted_entries(&bundle_dir)? {
                if path.extension().is_some_and(|e| e == "json") {
                    let text = std::fs::read_to_string(&path).map_err(io(&path))?;
                    store.add_bundle_document(&text, &path)?;
                }
            }
        }
        Ok(store)
    }

    fn add_bundle_document(&mut self, text: &str, origin: &Path) -> Result<(), StoreError> {
        let bundle_err = |source| StoreError::Bundle {
            path: origin.to_owned(),
            source,
        };
        let schema_ref = peek_schema_ref(text).map_err(bundle_err)?;
        let data = self
            .datasets
            .get(&schema_ref)
            .ok_or_else(|| StoreError::UnknownSchema {
                path: origin.to_owned(),
                schema_ref,
            })?;
        let bundle = parse_bundle(text, &data.schema).map_err(bundle_err)?;
        if self.bundles.contains_key(&bundle.id) {
            return Err(StoreError::DuplicateBundle {
                path: origin.to_owned(),
                id: bundle.id,
            });
        }
        self.bundles.insert(bundle.id.clone(), Arc::new(bundle));
        Ok(())
    }

    /// A copy of this store with `dataset` added or replaced and its bundles
    /// swapped for `bundles`. Each bundle comes with a label used in errors.
    /// Nothing changes unless every bundle is valid.
    pub fn with_dataset(
        &self,
        dataset: LoadedDataset,
        bundles: &[(String, String)],
    ) -> Result<Store, StoreError> {
        let mut next = self.clone();
        let id = dataset.id.clone();
        next.bundles.retain(|_, b| b.schema_ref != id);
        next.datasets.insert(id, Arc::new(dataset));
        for (label, text) in bundles {
            next.add_bundle_document(text, Path::new(label))?;
        }
        Ok(next)
    }

    pub fn datasets(&self) -> impl Iterator<Item = &LoadedDataset> {
        self.datasets.values().map(|d| d.as_ref())
    }

    pub fn dataset(&self, id: &str) -> Option<&LoadedDataset> {
        self.datasets.get(id).map(|d| d.as_ref())
    }

    pub fn bundles(&self) -> impl Iterator<Item = &ExplanationBundle> {
        self.bundles.values().map(|b| b.as_ref())
    }

    /// A bundle together with the dataset its `schema_ref` names.
    pub fn explanation(&self, id: &str) -> Option<(&ExplanationBundle, &LoadedDataset)> {
        let bundle = self.bundles.get(id)?;
        let data = self.datasets.get(&bundle.schema_ref)?;
        Some((bundle, data))
    }
}
