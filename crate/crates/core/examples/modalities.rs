//! The two baseline presentations of a rule: plain text and blocks.

use std::path::Path;

use fiper::ingest::{parse_bundle, to_document};
use fiper::view::{render_block_modality, render_text_modality, Block};
use fiper::LoadedDataset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/german_credit");
    let data = LoadedDataset::from_files(
        &dir.join("german_credit.schema.json"),
        &dir.join("german_credit.csv"),
    )?;
    let bundle = parse_bundle(
        &std::fs::read_to_string(dir.join("bundles/fig1.json"))?,
        &data.schema,
    )?;
    let target = data.schema.target_name();

    print!("{}", render_text_modality(&bundle, target));

    let spec = render_block_modality(&bundle, target);
    println!();
    for group in spec.groups.iter().chain([&spec.consequence]) {
        let line: Vec<String> = group
            .blocks
            .iter()
            .map(|b| match b {
                Block::Feature(t) => format!("[{t}]"),
                Block::Operator(t) => t.clone(),
                Block::Value(t) => format!("({t})"),
            })
            .collect();
        println!("{}", line.join(" "));
    }
    if std::env::args().any(|a| a == "--json") {
        println!("{}", to_document(&spec));
    }
    Ok(())
}
