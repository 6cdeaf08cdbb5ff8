//! Parse a rule written in the text grammar, inspect it, and print it back.
//!
//!     cargo run -p fiper --example parse_rule -- 'IF age <= 31 THEN credit_risk = bad'

use std::path::Path;

use fiper::ingest::{emit_rule_text, parse_rule_text, parse_schema, RuleText};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/german_credit");
    let schema = parse_schema(&std::fs::read_to_string(
        dir.join("german_credit.schema.json"),
    )?)?;
    let text = std::env::args().nth(1).unwrap_or_else(|| {
        r#"IF present_employed_since IN {unemployed, "< 1 year"} AND purpose IN {education, business, "car (new)"} AND age <= 31 THEN credit_risk = bad"#.into()
    });

    let rule = match parse_rule_text(&RuleText(text.clone()), &schema) {
        Ok(rule) => rule,
        Err(err) => {
            eprintln!("{text}\n{err}");
            std::process::exit(1);
        }
    };
    println!("consequence: {}", rule.consequence);
    for p in &rule.premise {
        println!("  {}", serde_json::to_string(p)?);
    }
    println!(
        "canonical: {}",
        emit_rule_text(&rule, schema.target_name()).0
    );
    Ok(())
}
