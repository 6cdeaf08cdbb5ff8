//! Per-feature summaries: five numbers for numerical features, label counts
//! for categorical ones. Pass a schema and CSV, or use the bundled fixture.

use std::path::PathBuf;

use fiper::stats::SummaryBody;
use fiper::LoadedDataset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/german_credit");
    let mut args = std::env::args_os().skip(1).map(PathBuf::from);
    let schema = args
        .next()
        .unwrap_or_else(|| dir.join("german_credit.schema.json"));
    let csv = args.next().unwrap_or_else(|| dir.join("german_credit.csv"));
    let data = LoadedDataset::from_files(&schema, &csv)?;

    println!("{} rows", data.dataset.len());
    for s in data.ordered_summaries() {
        match &s.body {
            SummaryBody::Numerical(f) => println!(
                "{:<24} min {:>8} q1 {:>8} median {:>8} q3 {:>8} max {:>8}",
                s.feature, f.min, f.q1, f.median, f.q3, f.max
            ),
            SummaryBody::Categorical(c) => {
                let counts: Vec<String> = c
                    .entries
                    .iter()
                    .map(|e| format!("{}={}", e.label, e.count))
                    .collect();
                println!("{:<24} {}", s.feature, counts.join(", "));
            }
        }
    }
    Ok(())
}
