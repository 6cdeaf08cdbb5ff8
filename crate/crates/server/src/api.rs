//! Read-mostly JSON API. Every body that carries a document uses the same
//! pretty-printed JSON the command line writes, followed by a newline.

use std::path::{Component, Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Multipart, Path as UrlPath, Query, State};
use axum::http::{header, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use fiper::ingest::{emit_bundle, emit_schema, to_document, DocumentError};
use fiper::render::dataset_id;
use fiper::study::{score_study, ScoreRequest};
use fiper::view::{Filter, SortOrder};
use fiper::{render_bundle, LoadedDataset, OutputFormat, ViewOptions};
use serde::{Deserialize, Serialize};

use crate::store::{Store, StoreError};

/// Shared state: the current snapshot, replaced wholesale on ingest.
#[derive(Debug)]
pub struct AppState {
    store: RwLock<Arc<Store>>,
    ui_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(store: Store, ui_dir: Option<PathBuf>) -> Arc<Self> {
        Arc::new(AppState {
            store: RwLock::new(Arc::new(store)),
            ui_dir,
        })
    }

    pub fn snapshot(&self) -> Arc<Store> {
        self.store.read().expect("store lock").clone()
    }

    fn replace(&self, next: Store) {
        *self.store.write().expect("store lock") = Arc::new(next);
    }
}

#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub path: String,
}

impl ApiError {
    fn new(
        status: StatusCode,
        code: &'static str,
        message: impl Into<String>,
        path: impl Into<String>,
    ) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            path: path.into(),
        }
    }

    fn not_found(what: &str, uri: &Uri) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "not_found",
            format!("unknown {what}"),
            uri.path(),
        )
    }

    fn bad_option(message: String, field: &str) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_option", message, field)
    }

    fn invalid(message: String, path: impl Into<String>) -> Self {
        Self::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid_document",
            message,
            path,
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, json_body(to_document(&self))).into_response()
    }
}

fn json_body(mut doc: String) -> Response {
    doc.push('\n');
    ([(header::CONTENT_TYPE, "application/json")], doc).into_response()
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/datasets", get(list_datasets))
        .route("/api/datasets/{id}/schema", get(dataset_schema))
        .route("/api/features/{dataset}/{feature}", get(feature_summary))
        .route("/api/explanations", get(list_explanations))
        .route("/api/explanations/{id}", get(explanation))
        .route("/api/explanations/{id}/view", get(explanation_view))
        .route("/api/explanations/{id}/svg", get(explanation_svg))
        .route(
            "/api/explanations/{id}/modality/{kind}",
            get(explanation_modality),
        )
        .route("/api/ingest", post(ingest))
        .route("/api/study/score", post(score))
        .route("/", get(ui_asset))
        .fallback(get(ui_asset))
        .with_state(state)
}

type ApiResult = Result<Response, ApiError>;

#[derive(Serialize)]
struct DatasetEntry<'a> {
    id: &'a str,
    target_name: &'a str,
    target_classes: &'a [String],
    rows: usize,
    features: Vec<&'a str>,
}

async fn list_datasets(State(state): State<Arc<AppState>>) -> Response {
    let store = state.snapshot();
    let entries: Vec<DatasetEntry> = store
        .datasets()
        .map(|d| DatasetEntry {
            id: &d.id,
            target_name: d.schema.target_name(),
            target_classes: d.schema.target_classes(),
            rows: d.dataset.len(),
            features: d.schema.features().iter().map(|f| f.name()).collect(),
        })
        .collect();
    json_body(to_document(&entries))
}

async fn dataset_schema(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    uri: Uri,
) -> ApiResult {
    let store = state.snapshot();
    let data = store
        .dataset(&id)
        .ok_or_else(|| ApiError::not_found("dataset", &uri))?;
    Ok(json_body(emit_schema(&data.schema)))
}

async fn feature_summary(
    State(state): State<Arc<AppState>>,
    UrlPath((dataset, feature)): UrlPath<(String, String)>,
    uri: Uri,
) -> ApiResult {
    let store = state.snapshot();
    let data = store
        .dataset(&dataset)
        .ok_or_else(|| ApiError::not_found("dataset", &uri))?;
    let summary = data
        .summaries
        .get(&feature)
        .ok_or_else(|| ApiError::not_found("feature", &uri))?;
    Ok(json_body(to_document(summary)))
}

#[derive(Serialize)]
struct ExplanationEntry<'a> {
    id: &'a str,
    dataset: &'a str,
    prediction: &'a str,
    rule_features: Vec<&'a str>,
}

async fn list_explanations(State(state): State<Arc<AppState>>) -> Response {
    let store = state.snapshot();
    let entries: Vec<ExplanationEntry> = store
        .bundles()
        .map(|b| ExplanationEntry {
            id: &b.id,
            dataset: &b.schema_ref,
            prediction: &b.prediction,
            rule_features: b.rule.premise.iter().map(|p| p.feature.as_str()).collect(),
        })
        .collect();
    json_body(to_document(&entries))
}

async fn explanation(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    uri: Uri,
) -> ApiResult {
    let store = state.snapshot();
    let (bundle, _) = store
        .explanation(&id)
        .ok_or_else(|| ApiError::not_found("explanation", &uri))?;
    Ok(json_body(emit_bundle(bundle)))
}

#[derive(Debug, Default, Deserialize)]
pub struct ViewQuery {
    pub filter: Option<String>,
    pub sort: Option<String>,
}

impl ViewQuery {
    fn options(&self) -> Result<ViewOptions, ApiError> {
        let mut options = ViewOptions::default();
        if let Some(f) = &self.filter {
            options.filter =
                Filter::from_str(f).map_err(|e| ApiError::bad_option(e.to_string(), "filter"))?;
        }
        if let Some(s) = &self.sort {
            options.sort =
                SortOrder::from_str(s).map_err(|e| ApiError::bad_option(e.to_string(), "sort"))?;
        }
        Ok(options)
    }
}

fn rendered(
    state: &AppState,
    id: &str,
    uri: &Uri,
    format: OutputFormat,
    options: &ViewOptions,
) -> ApiResult {
    let store = state.snapshot();
    let (bundle, data) = store
        .explanation(id)
        .ok_or_else(|| ApiError::not_found("explanation", uri))?;
    let body = render_bundle(bundle, data, format, options).map_err(|e| {
        ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "render_failed",
            e.to_string(),
            uri.path(),
        )
    })?;
    Ok(([(header::CONTENT_TYPE, format.content_type())], body).into_response())
}

async fn explanation_view(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(query): Query<ViewQuery>,
    uri: Uri,
) -> ApiResult {
    rendered(&state, &id, &uri, OutputFormat::View, &query.options()?)
}

async fn explanation_svg(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(query): Query<ViewQuery>,
    uri: Uri,
) -> ApiResult {
    rendered(&state, &id, &uri, OutputFormat::Svg, &query.options()?)
}

async fn explanation_modality(
    State(state): State<Arc<AppState>>,
    UrlPath((id, kind)): UrlPath<(String, String)>,
    uri: Uri,
) -> ApiResult {
    let format = match kind.as_str() {
        "text" => OutputFormat::Text,
        "blocks" => OutputFormat::Blocks,
        other => return Err(ApiError::not_found(&format!("modality `{other}`"), &uri)),
    };
    rendered(&state, &id, &uri, format, &ViewOptions::default())
}

#[derive(Serialize)]
struct IngestReceipt {
    dataset: String,
    bundles: Vec<String>,
}

fn store_error(err: StoreError) -> ApiError {
    match &err {
        StoreError::Bundle {
            path,
            source: DocumentError::Invalid(report),
        } => {
            let first = &report.violations[0];
            let message = report
                .violations
                .iter()
                .map(|v| format!("{}: {}", v.path, v.message))
                .collect::<Vec<_>>()
                .join("; ");
            ApiError::invalid(message, format!("{}.{}", path.display(), first.path))
        }
        StoreError::Bundle { path, .. }
        | StoreError::UnknownSchema { path, .. }
        | StoreError::DuplicateBundle { path, .. } => {
            ApiError::invalid(err.to_string(), path.display().to_string())
        }
        _ => ApiError::invalid(err.to_string(), ""),
    }
}

/// Multipart parts: `id` (optional, text), `schema`, `dataset` (CSV) and any
/// number of `bundle` parts. The dataset and its bundles replace any earlier
/// upload with the same id.
async fn ingest(State(state): State<Arc<AppState>>, mut form: Multipart) -> ApiResult {
    let malformed = |e: axum::extract::multipart::MultipartError| {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "malformed_request",
            e.body_text(),
            "",
        )
    };
    let mut id = None;
    let mut schema = None;
    let mut csv = None;
    let mut bundles = Vec::new();
    while let Some(field) = form.next_field().await.map_err(malformed)? {
        let name = field.name().unwrap_or_default().to_owned();
        let file_name = field.file_name().map(str::to_owned);
        let bytes = field.bytes().await.map_err(malformed)?;
        let text = || {
            String::from_utf8(bytes.to_vec())
                .map_err(|_| ApiError::invalid(format!("part `{name}` is not UTF-8"), name.clone()))
        };
        match name.as_str() {
            "id" => id = Some(text()?.trim().to_owned()),
            "schema" => schema = Some((text()?, file_name)),
            "dataset" => csv = Some(bytes.clone()),
            "bundle" | "bundles" => {
                let label = format!("bundle[{}]", bundles.len());
                bundles.push((label, text()?));
            }
            other => {
                return Err(ApiError::new(
                    StatusCode::BAD_REQUEST,
                    "malformed_request",
                    format!("unexpected part `{other}`"),
                    other,
                ))
            }
        }
    }
    let missing = |part: &str| {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "malformed_request",
            format!("missing part `{part}`"),
            part,
        )
    };
    let (schema, schema_file) = schema.ok_or_else(|| missing("schema"))?;
    let csv = csv.ok_or_else(|| missing("dataset"))?;
    let id = id
        .or_else(|| schema_file.map(|f| dataset_id(Path::new(&f))))
        .filter(|id| !id.is_empty())
        .ok_or_else(|| missing("id"))?;

    let loaded = LoadedDataset::from_parts(id.clone(), &schema, &csv, Path::new("dataset"))
        .map_err(|e| ApiError::invalid(e.to_string(), "dataset"))?;
    let current = state.snapshot();
    let next = current
        .with_dataset(loaded, &bundles)
        .map_err(store_error)?;
    let mut ids: Vec<String> = next
        .bundles()
        .filter(|b| b.schema_ref == id)
        .map(|b| b.id.clone())
        .collect();
    ids.sort();
    state.replace(next);
    Ok(json_body(to_document(&IngestReceipt {
        dataset: id,
        bundles: ids,
    })))
}

async fn score(body: Bytes) -> ApiResult {
    let request: ScoreRequest = serde_json::from_slice(&body).map_err(|e| {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "malformed_request",
            e.to_string(),
            format!("line {} column {}", e.line(), e.column()),
        )
    })?;
    let report = score_study(&request.truths, &request.responses, request.baseline)
        .map_err(|e| ApiError::invalid(e.to_string(), "responses"))?;
    Ok(json_body(to_document(&report)))
}

const PLACEHOLDER_PAGE: &str = r#"<!DOCTYPE html>
<html lang="en">
<head><meta charset="utf-8"><title>fiper</title></head>
<body>
<h1>fiper</h1>
<p>No UI bundle is configured. The JSON API lives under <code>/api</code>:</p>
<ul>
<li><a href="/api/datasets">/api/datasets</a></li>
<li><a href="/api/explanations">/api/explanations</a></li>
</ul>
</body>
</html>
"#;

fn content_type_for(path: &Path) -> &'static str {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or_default()
    {
        "html" => "text/html; charset=utf-8",
        "js" | "mjs" => "text/javascript",
        "css" => "text/css",
        "json" => "application/json",
        "svg" => "image/svg+xml",
        "png" => "image/png",
        "ico" => "image/x-icon",
        _ => "application/octet-stream",
    }
}

/// Static files from the configured UI directory, `index.html` for `/`.
async fn ui_asset(State(state): State<Arc<AppState>>, uri: Uri) -> ApiResult {
    let rel = uri.path().trim_start_matches('/');
    if rel.starts_with("api/") || rel == "api" {
        return Err(ApiError::not_found("endpoint", &uri));
    }
    let Some(root) = &state.ui_dir else {
        if rel.is_empty() {
            return Ok((
                [(header::CONTENT_TYPE, "text/html; charset=utf-8")],
                PLACEHOLDER_PAGE,
            )
                .into_response());
        }
        return Err(ApiError::not_found("asset", &uri));
    };
    let rel = Path::new(if rel.is_empty() { "index.html" } else { rel });
    if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
        return Err(ApiError::not_found("asset", &uri));
    }
    let path = root.join(rel);
    let body = tokio::fs::read(&path)
        .await
        .map_err(|_| ApiError::not_found("asset", &uri))?;
    Ok(([(header::CONTENT_TYPE, content_type_for(&path))], body).into_response())
}
