use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use fiper_testkit::fixture_dir;

fn fiper(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fiper"))
        .args(args)
        .output()
        .unwrap()
}

fn fx(rel: &str) -> String {
    fixture_dir().join(rel).to_string_lossy().into_owned()
}

fn study(rel: &str) -> String {
    fixture_dir()
        .join("../study")
        .join(rel)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn validate_accepts_the_fixture_set() {
    let out = fiper(&[
        "validate",
        &fx("german_credit.schema.json"),
        &fx("german_credit.csv"),
        &fx("bundles/fig1.json"),
        &fx("bundles/text_rule.json"),
        &fx("bundles/empty_premise.json"),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());
}

#[test]
fn validate_reports_violations_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(fx("bundles/fig1.json"))
        .unwrap()
        .replace("\"age\": 23", "\"age\": 52");
    std::fs::write(&bad, text).unwrap();
    let out = fiper(&[
        "validate",
        &fx("german_credit.schema.json"),
        &fx("german_credit.csv"),
        &fx("bundles/fig1.json"),
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.json"), "{err}");
    assert!(err.contains("1 of 2 bundles invalid"), "{err}");
}

#[test]
fn summarize_prints_a_document() {
    let out = fiper(&[
        "summarize",
        &fx("german_credit.schema.json"),
        &fx("german_credit.csv"),
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let age = doc
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["feature"] == "age")
        .unwrap();
    assert_eq!(
        [
            &age["min"],
            &age["q1"],
            &age["median"],
            &age["q3"],
            &age["max"]
        ]
        .map(|v| v.as_f64().unwrap()),
        [19.0, 27.0, 33.0, 42.0, 75.0]
    );
}

#[test]
fn render_empty_premise_as_text() {
    let out = fiper(&[
        "render",
        &fx("bundles/empty_premise.json"),
        "--dataset",
        &fx("german_credit.csv"),
        "--format",
        "text",
    ]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "Explanation empty_premise\nIF THEN credit_risk = good\nPrediction: credit_risk = good\n"
    );
}

#[test]
fn render_to_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("fig1.svg");
    let args = [
        "render",
        &fx("bundles/fig1.json"),
        "--dataset",
        &fx("german_credit.csv"),
        "--filter",
        "rule",
    ];
    let to_stdout = fiper(&args);
    let mut with_file = args.to_vec();
    with_file.extend(["-o", target.to_str().unwrap()]);
    let to_file = fiper(&with_file);
    assert!(to_stdout.status.success() && to_file.status.success());
    assert!(to_file.stdout.is_empty());
    assert_eq!(std::fs::read(&target).unwrap(), to_stdout.stdout);
    assert!(String::from_utf8(to_stdout.stdout)
        .unwrap()
        .starts_with("<?xml"));
}

#[test]
fn failures_exit_nonzero_with_a_message() {
    let out = fiper(&[
        "render",
        "/no/such/bundle.json",
        "--dataset",
        &fx("german_credit.csv"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/bundle.json"));

    let out = fiper(&[
        "render",
        &fx("bundles/fig1.json"),
        "--dataset",
        &fx("german_credit.csv"),
        "--format",
        "pdf",
    ]);
    assert!(!out.status.success());

    let out = fiper(&[
        "score-study",
        &study("truths.json"),
        &fx("german_credit.csv"),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn score_study_reports() {
    let out = fiper(&[
        "score-study",
        &study("truths.json"),
        &study("perfect_responses.json"),
        "--json",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["answers_scored"], 405);
    assert_eq!(report["total"], serde_json::json!({"e1": 0, "e2": 0}));

    let out = fiper(&[
        "score-study",
        &study("truths.json"),
        &study("responses.json"),
        "--baseline",
        "text",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("answers scored: 405\n"), "{text}");
    assert!(text.contains("delta vs text:"));
}

fn http_get(port: u16, path: &str) -> (String, Vec<u8>) {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).unwrap();
    write!(
        stream,
        "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n"
    )
    .unwrap();
    let mut raw = Vec::new();
    stream.read_to_end(&mut raw).unwrap();
    let split = raw.windows(4).position(|w| w == b"\r\n\r\n").unwrap();
    let head = String::from_utf8(raw[..split].to_vec()).unwrap();
    let body = raw[split + 4..].to_vec();
    (head, body)
}

/// Starts `fiper serve` on an ephemeral port and returns it with the port.
fn spawn_server(data_dir: &Path) -> (std::process::Child, u16) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_fiper"))
        .args(["serve", "--port", "0"])
        .env("FIPER_DATA_DIR", data_dir)
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let port = line.trim().rsplit(':').next().unwrap().parse().unwrap();
    (child, port)
}

#[test]
fn serve_uses_the_data_dir_from_the_environment() {
    let (mut child, port) = spawn_server(&fixture_dir());
    let (head, body) = http_get(port, "/api/explanations/fig1/modality/text");
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(head.starts_with("HTTP/1.1 200"), "{head}");
    assert!(String::from_utf8(body)
        .unwrap()
        .starts_with("Explanation fig1\n"));
}

#[test]
fn serve_reports_bad_data_files_with_paths() {
    let dir = tempfile::tempdir().unwrap();
    let bundles: PathBuf = dir.path().join("bundles");
    std::fs::create_dir(&bundles).unwrap();
    for f in ["german_credit.schema.json", "german_credit.csv"] {
        std::fs::copy(fx(f), dir.path().join(f)).unwrap();
    }
    std::fs::write(bundles.join("broken.json"), "{\"id\": ").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fiper"))
        .args([
            "serve",
            "--port",
            "0",
            "--data-dir",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.json"));
}
