//! Validate explanation bundles against a dataset schema and show what a
//! rejected bundle looks like.

use std::path::Path;

use fiper::ingest::{parse_bundle, DocumentError};
use fiper::LoadedDataset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/german_credit");
    let data = LoadedDataset::from_files(
        &dir.join("german_credit.schema.json"),
        &dir.join("german_credit.csv"),
    )?;

    for entry in std::fs::read_dir(dir.join("bundles"))? {
        let path = entry?.path();
        let bundle = parse_bundle(&std::fs::read_to_string(&path)?, &data.schema)?;
        println!(
            "ok  {} ({} premise predicates)",
            bundle.id,
            bundle.rule.premise.len()
        );
    }

    // An applicant aged 52 is outside `age <= 31`, and `shoe_size` is unknown.
    let broken = std::fs::read_to_string(dir.join("bundles/fig1.json"))?
        .replace("\"age\": 23", "\"age\": 52")
        .replace("\"feature\": \"housing\"", "\"feature\": \"shoe_size\"");
    match parse_bundle(&broken, &data.schema) {
        Err(DocumentError::Invalid(report)) => {
            println!("rejected:");
            for v in &report.violations {
                println!("  {}: {}", v.path, v.message);
            }
        }
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
