//! Drive every endpoint in-process, including an ingest that replaces the
//! store and one that is rejected without changing it.

use std::path::Path;

use axum::body::{to_bytes, Body};
use axum::http::Request;
use axum::Router;
use fiper_server::{router, AppState, Store};
use tower::ServiceExt;

async fn call(app: &Router, request: Request<Body>) -> anyhow::Result<String> {
    let response = app.clone().oneshot(request).await?;
    let status = response.status();
    let body = to_bytes(response.into_body(), usize::MAX).await?;
    let text = String::from_utf8_lossy(&body);
    let preview: String = text
        .chars()
        .take(160)
        .collect::<String>()
        .replace('\n', " ");
    Ok(format!("{status} {preview}"))
}

async fn get(app: &Router, uri: &str) -> anyhow::Result<()> {
    println!(
        "GET {uri}\n  {}",
        call(app, Request::get(uri).body(Body::empty())?).await?
    );
    Ok(())
}

fn multipart(parts: &[(&str, &[u8])]) -> anyhow::Result<Request<Body>> {
    let mut body = Vec::new();
    for (name, bytes) in parts {
        body.extend_from_slice(
            format!("--xx\r\nContent-Disposition: form-data; name=\"{name}\"\r\n\r\n").as_bytes(),
        );
        body.extend_from_slice(bytes);
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(b"--xx--\r\n");
    Ok(Request::post("/api/ingest")
        .header("content-type", "multipart/form-data; boundary=xx")
        .body(Body::from(body))?)
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures");
    let dir = fixtures.join("german_credit");
    let app = router(AppState::new(Store::load_dir(&dir)?, None));

    for uri in [
        "/api/datasets",
        "/api/datasets/german_credit/schema",
        "/api/features/german_credit/age",
        "/api/explanations",
        "/api/explanations/fig1",
        "/api/explanations/fig1/view?filter=rule&sort=abs",
        "/api/explanations/fig1/svg?filter=rule",
        "/api/explanations/fig1/modality/text",
        "/api/explanations/fig1/modality/blocks",
        "/api/explanations/unknown",
    ] {
        get(&app, uri).await?;
    }

    let schema = std::fs::read(dir.join("german_credit.schema.json"))?;
    let csv = std::fs::read(dir.join("german_credit.csv"))?;
    let bundle = std::fs::read_to_string(dir.join("bundles/fig1.json"))?
        .replace("\"german_credit\"", "\"credit_copy\"")
        .replace("\"fig1\"", "\"copy_fig1\"");
    let ok = multipart(&[
        ("id", b"credit_copy"),
        ("schema", &schema),
        ("dataset", &csv),
        ("bundle", bundle.as_bytes()),
    ])?;
    println!("POST /api/ingest\n  {}", call(&app, ok).await?);
    let bad = bundle.replace("\"age\": 23", "\"age\": 60");
    let rejected = multipart(&[
        ("id", b"credit_copy"),
        ("schema", &schema),
        ("dataset", &csv),
        ("bundle", bad.as_bytes()),
    ])?;
    println!(
        "POST /api/ingest (uncovered instance)\n  {}",
        call(&app, rejected).await?
    );
    get(&app, "/api/explanations").await?;

    let study = fixtures.join("study");
    let request = format!(
        r#"{{"truths": {}, "responses": {}, "baseline": "text"}}"#,
        std::fs::read_to_string(study.join("truths.json"))?,
        std::fs::read_to_string(study.join("responses.json"))?
    );
    let score = Request::post("/api/study/score").body(Body::from(request))?;
    println!("POST /api/study/score\n  {}", call(&app, score).await?);
    Ok(())
}
