//! The `fiper` command line. Documents go to stdout, diagnostics to stderr.

use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use fiper::ingest::{parse_bundle, to_document, DocumentError};
use fiper::render::schema_path_for;
use fiper::study::{score_study, Modality, StudyResponse, TruthRecord};
use fiper::view::{Filter, SortOrder};
use fiper::{render_bundle, LoadedDataset, OutputFormat, ViewOptions};

use crate::api::{router, AppState};
use crate::store::Store;

#[derive(Debug, Parser)]
#[command(
    name = "fiper",
    version,
    about = "Rule and feature-importance explanation views"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check bundles against a schema and dataset. Exits 0 iff all are valid.
    Validate {
        schema: PathBuf,
        dataset: PathBuf,
        #[arg(required = true)]
        bundles: Vec<PathBuf>,
    },
    /// Print per-feature summaries of a dataset.
    Summarize { schema: PathBuf, dataset: PathBuf },
    /// Render one bundle as SVG, rule text, blocks, or a view document.
    Render {
        bundle: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Defaults to `<id>.schema.json` next to the dataset.
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long, default_value = "svg")]
        format: OutputFormat,
        #[arg(long, default_value = "all")]
        filter: Filter,
        #[arg(long, default_value = "abs")]
        sort: SortOrder,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Serve the data directory over HTTP.
    Serve {
        #[arg(long, env = "FIPER_DATA_DIR")]
        data_dir: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Static UI assets served at `/`.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
    /// Score study responses against ground truth.
    ScoreStudy {
        truth: PathBuf,
        responses: PathBuf,
        #[arg(long)]
        baseline: Option<Modality>,
        /// Print the report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
}

pub fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Validate {
            schema,
            dataset,
            bundles,
        } => validate(&schema, &dataset, &bundles),
        Command::Summarize { schema, dataset } => {
            let data = LoadedDataset::from_files(&schema, &dataset)?;
            emit(
                None,
                format!("{}\n", to_document(&data.ordered_summaries())).as_bytes(),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Render {
            bundle,
            dataset,
            schema,
            format,
            filter,
            sort,
            output,
        } => {
            let schema = schema.unwrap_or_else(|| schema_path_for(&dataset));
            let data = LoadedDataset::from_files(&schema, &dataset)?;
            let text = read(&bundle)?;
            let b =
                parse_bundle(&text, &data.schema).with_context(|| bundle.display().to_string())?;
            let options = ViewOptions {
                filter,
                sort,
                ..ViewOptions::default()
            };
            let body = render_bundle(&b, &data, format, &options)?;
            emit(output.as_deref(), &body)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve {
            data_dir,
            host,
            port,
            ui_dir,
        } => {
            let store = Store::load_dir(&data_dir)?;
            let addr: SocketAddr = format!("{host}:{port}")
                .parse()
                .with_context(|| format!("bad listen address {host}:{port}"))?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(serve(store, addr, ui_dir))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ScoreStudy {
            truth,
            responses,
            baseline,
            json,
        } => {
            let truths: Vec<TruthRecord> = serde_json::from_str(&read(&truth)?)
                .with_context(|| truth.display().to_string())?;
            let answers: Vec<StudyResponse> = serde_json::from_str(&read(&responses)?)
                .with_context(|| responses.display().to_string())?;
            let report = score_study(&truths, &answers, baseline)?;
            let out = if json {
                format!("{}\n", to_document(&report))
            } else {
                report.to_string()
            };
            emit(None, out.as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Binds, reports the bound address on stderr, and serves until ctrl-c.
pub async fn serve(store: Store, addr: SocketAddr, ui_dir: Option<PathBuf>) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("cannot bind {addr}"))?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(store, ui_dir)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(output: Option<&Path>, body: &[u8]) -> anyhow::Result<()> {
    match output {
        Some(path) => {
            fs::write(path, body).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn validate(schema: &Path, dataset: &Path, bundles: &[PathBuf]) -> anyhow::Result<ExitCode> {
    let data = LoadedDataset::from_files(schema, dataset)?;
    let mut failures = 0;
    for path in bundles {
        let text = read(path)?;
        match parse_bundle(&text, &data.schema) {
            Ok(b) if b.schema_ref != data.id => {
                failures += 1;
                eprintln!(
                    "{}: schema_ref: bundle refers to `{}`, not `{}`",
                    path.display(),
                    b.schema_ref,
                    data.id
                );
            }
            Ok(_) => {}
            Err(DocumentError::Invalid(report)) => {
                failures += 1;
                for v in &report.violations {
                    eprintln!("{}: {}: {}", path.display(), v.path, v.message);
                }
            }
            Err(err) => {
                failures += 1;
                eprintln!("{}: {err}", path.display());
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} of {} bundles invalid", bundles.len());
        return Ok(ExitCode::FAILURE);
    }
    eprintln!("{} bundles valid", bundles.len());
    Ok(ExitCode::SUCCESS)
}
