//! Build the two-panel view for one explanation and write it as SVG.
//!
//!     cargo run -p fiper --example render_view -- rule /tmp/fig1.svg

use std::path::Path;

use fiper::ingest::parse_bundle;
use fiper::stats::{Placement, SummaryBody};
use fiper::view::{render_svg, Filter, Geometry};
use fiper::{build_fiper_view, LoadedDataset, ViewOptions};

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

    let mut args = std::env::args().skip(1);
    let filter: Filter = args.next().as_deref().unwrap_or("all").parse()?;
    let out = args.next().unwrap_or_else(|| "fig1.svg".into());

    let options = ViewOptions {
        filter,
        ..ViewOptions::default()
    };
    let view = build_fiper_view(&bundle, &data.schema, &data.summaries, &options)?;
    for row in &view.rows {
        let place = match (&row.summary.body, row.marker.placement) {
            (SummaryBody::Numerical(_), Placement::QuartileBucket(b)) => format!("{b:?}"),
            (_, Placement::SegmentIndex(i)) => format!("segment {i}"),
            _ => String::new(),
        };
        println!(
            "{:>6.2}  {:<24} {:<12} {}",
            row.weight,
            row.feature,
            row.observed.to_string(),
            if row.in_rule {
                format!("in rule, {place}")
            } else {
                place
            }
        );
    }
    std::fs::write(&out, render_svg(&view, &Geometry::default())?)?;
    println!("wrote {out}");
    Ok(())
}
