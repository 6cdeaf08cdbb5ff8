//! Header-row CSV datasets: one column per feature plus the target column.

use std::io::Read;

use thiserror::Error;

use crate::model::{DatasetSchema, FeatureDomain, FeatureSpec};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("header: missing column `{0}`")]
    MissingColumn(String),
    #[error("header: column `{0}` is not declared in the schema")]
    UnexpectedColumn(String),
    #[error("row {row}, column `{column}`: {message}")]
    Cell {
        row: usize,
        column: String,
        message: String,
    },
    #[error("dataset has no rows")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numerical(Vec<f64>),
    Categorical(Vec<String>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numerical(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Column-major table whose columns follow schema feature order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    targets: Vec<String>,
}

impl Dataset {
    pub fn from_csv<R: Read>(reader: R, schema: &DatasetSchema) -> Result<Self, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();

        for h in headers.iter() {
            if h != schema.target_name() && schema.feature(h).is_none() {
                return Err(DatasetError::UnexpectedColumn(h.to_owned()));
            }
        }
        let position = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DatasetError::MissingColumn(name.to_owned()))
        };
        let feature_cols = schema
            .features()
            .iter()
            .map(|f| position(f.name()))
            .collect::<Result<Vec<_>, _>>()?;
        let target_col = position(schema.target_name())?;

        let mut columns: Vec<Column> = schema
            .features()
            .iter()
            .map(|f| match f.domain() {
                FeatureDomain::Numerical { .. } => Column::Numerical(Vec::new()),
                FeatureDomain::Categorical { .. } => Column::Categorical(Vec::new()),
            })
            .collect();
        let mut targets = Vec::new();

        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            // Header is line 1.
            let row = i + 2;
            for ((spec, &col), column) in schema
                .features()
                .iter()
                .zip(&feature_cols)
                .zip(&mut columns)
            {
                let cell = record.get(col).unwrap_or_default();
                push_cell(column, spec, cell, row)?;
            }
            let target = record.get(target_col).unwrap_or_default();
            if !schema.has_class(target) {
                return Err(DatasetError::Cell {
                    row,
                    column: schema.target_name().to_owned(),
                    message: format!("`{target}` is not a target class"),
                });
            }
            targets.push(target.to_owned());
        }
        if targets.is_empty() {
            return Err(DatasetError::Empty);
        }
        Ok(Dataset { columns, targets })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Column for the schema feature at `index`.
    pub fn column(&self, index: usize) -> &Column {
        &self.columns[index]
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }
}

fn push_cell(
    column: &mut Column,
    spec: &FeatureSpec,
    cell: &str,
    row: usize,
) -> Result<(), DatasetError> {
    let err = |message: String| DatasetError::Cell {
        row,
        column: spec.name().to_owned(),
        message,
    };
    match column {
        Column::Numerical(values) => {
            let x: f64 = cell
                .trim()
                .parse()
                .map_err(|_| err(format!("`{cell}` is not a number")))?;
            if !x.is_finite() {
                return Err(err(format!("`{cell}` is not finite")));
            }
            values.push(x);
        }
        Column::Categorical(values) => {
            if !spec.has_label(cell) {
                return Err(err(format!("`{cell}` is not a declared label")));
            }
            values.push(cell.to_owned());
        }
    }
    Ok(())
}
