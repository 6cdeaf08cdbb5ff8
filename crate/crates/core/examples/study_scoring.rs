//! Score the fixture study, then the questionnaire helpers on one participant.

use std::path::Path;

use fiper::study::{
    latin_square_order, raw_tlx, score_study, Modality, StudyResponse, TlxRatings, TruthRecord,
    UesItems, UesKeying,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/study");
    let truths: Vec<TruthRecord> =
        serde_json::from_str(&std::fs::read_to_string(dir.join("truths.json"))?)?;
    let responses: Vec<StudyResponse> =
        serde_json::from_str(&std::fs::read_to_string(dir.join("responses.json"))?)?;

    let report = score_study(&truths, &responses, Some(Modality::Text))?;
    print!("{report}");

    println!("\ncondition order per participant:");
    for (p, order) in latin_square_order(6, 3).iter().enumerate() {
        let names: Vec<&str> = order
            .iter()
            .map(|&c| ["text", "blocks", "fiper"][c])
            .collect();
        println!("  P{:02} {}", p + 1, names.join(" -> "));
    }

    let tlx = TlxRatings::new([20, 40, 60, 80, 100, 0])?;
    println!("\nraw TLX: {}", raw_tlx(&tlx));
    let ues = fiper::study::ues_short_form(
        &UesItems::new([4, 5, 4, 2, 1, 2, 4, 4, 5, 5, 4, 4])?,
        &UesKeying::default(),
    );
    println!(
        "UES-SF: FA {:.2} PU {:.2} AE {:.2} RW {:.2} overall {:.2}",
        ues.fa, ues.pu, ues.ae, ues.rw, ues.overall
    );
    Ok(())
}
