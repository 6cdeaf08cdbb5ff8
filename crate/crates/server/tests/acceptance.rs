//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs headless; nothing here needs a browser.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use fiper::ingest::{emit_bundle, emit_rule_text, parse_bundle, parse_rule_text, RuleText};
use fiper::stats::five_number_summary;
use fiper::study::{
    aggregate_errors, delta_error_matrix, latin_square_order, raw_tlx, score_answer, score_study,
    truth_map, ues_short_form, Modality, StudyResponse, TlxRatings, TruthRecord, UesItems,
    UesKeying,
};
use fiper::view::Filter;
use fiper::{
    build_fiper_view, covers, render_bundle, ExplanationBundle, LoadedDataset, OutputFormat,
    ViewOptions,
};
use fiper_server::{router, AppState, Store};
use fiper_testkit::fixture_dir;
use fiper_testkit::generators::{self, mixed_schema};
use fiper_testkit::oracles::{
    brute_force_covers, delta_by_scan, errors_by_loop, five_numbers_by_sort, running_mean,
    ues_by_running_mean,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tower::ServiceExt;

type Outcome = Result<String, String>;
type Criterion = Box<dyn FnOnce() -> Outcome>;
/// Feature, highlight `(x, width)` spans, and marker centre of one chart row.
type DrawnRow = (String, Vec<(f64, f64)>, f64);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture() -> LoadedDataset {
    let dir = fixture_dir();
    LoadedDataset::from_files(
        &dir.join("german_credit.schema.json"),
        &dir.join("german_credit.csv"),
    )
    .expect("fixture dataset loads")
}

fn fixture_bundle(data: &LoadedDataset, name: &str) -> ExplanationBundle {
    let text = std::fs::read_to_string(fixture_dir().join("bundles").join(name)).unwrap();
    parse_bundle(&text, &data.schema).unwrap()
}

fn coverage_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let schema = mixed_schema(&mut rng, 10);
    let pairs: Vec<_> = (0..5000)
        .map(|i| {
            let inst = generators::instance(&mut rng, &schema);
            let rule = if i % 2 == 0 {
                generators::covering_rule(&mut rng, &schema, &inst)
            } else {
                generators::random_rule(&mut rng, &schema)
            };
            (inst, rule)
        })
        .collect();
    let started = Instant::now();
    let mut agree = 0;
    let mut covered = 0;
    for (inst, rule) in &pairs {
        let got = covers(inst, rule).map_err(|e| e.to_string())?;
        if Some(got) == brute_force_covers(inst, rule) {
            agree += 1;
        }
        covered += usize::from(got);
    }
    let elapsed = started.elapsed();
    check(agree == pairs.len(), || {
        format!("{agree}/{} pairs agree", pairs.len())
    })?;
    check(elapsed < Duration::from_secs(5), || {
        format!("took {elapsed:?}")
    })?;
    check(covered > 0 && covered < pairs.len(), || {
        "generator produced a one-sided sample".into()
    })?;
    Ok(format!(
        "{agree}/{} pairs agree ({covered} covered) over 10 features in {:.3} s",
        pairs.len(),
        elapsed.as_secs_f64()
    ))
}

fn quartile_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut worst: f64 = 0.0;
    for trial in 0..500 {
        let n = 1 + trial % 500;
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-1e3..1e3)).collect();
        let f = five_number_summary(&values).map_err(|e| e.to_string())?;
        let o = five_numbers_by_sort(&values);
        for (g, w) in [f.min, f.q1, f.median, f.q3, f.max].into_iter().zip(o) {
            worst = worst.max((g - w).abs());
        }
    }
    check(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!(
        "500 samples of sizes 1..=500, max deviation {worst:e} (tolerance 1e-9)"
    ))
}

fn svg_rows(svg: &str) -> Vec<DrawnRow> {
    let attr = |line: &str, name: &str| -> f64 {
        let key = format!(" {name}=\"");
        let start = line.find(&key).unwrap() + key.len();
        line[start..].split('"').next().unwrap().parse().unwrap()
    };
    let mut rows = Vec::new();
    for line in svg.lines() {
        if line.contains(r#"class="chart-row""#) {
            let feature = line
                .split("data-feature=\"")
                .nth(1)
                .unwrap()
                .split('"')
                .next()
                .unwrap();
            rows.push((feature.to_owned(), Vec::new(), f64::NAN));
        } else if line.contains(r#"class="highlight""#) {
            let row = rows.last_mut().unwrap();
            row.1.push((attr(line, "x"), attr(line, "width")));
        } else if line.contains(r#"class="marker""#) {
            let points = line.split("points=\"").nth(1).unwrap();
            let cx: f64 = points.split(',').next().unwrap().parse().unwrap();
            rows.last_mut().unwrap().2 = cx;
        }
    }
    rows
}

fn marker_in_highlight() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut cases: Vec<(ExplanationBundle, LoadedDataset)> = Vec::new();
    let data = fixture();
    for name in ["fig1.json", "text_rule.json", "empty_premise.json"] {
        cases.push((fixture_bundle(&data, name), data.clone()));
    }
    for i in 0..200 {
        let schema = mixed_schema(&mut rng, 10);
        let rows = rng.gen_range(1..60);
        let ds = generators::dataset(&mut rng, &schema, rows);
        let loaded = LoadedDataset::new(format!("d{i}"), schema, ds).map_err(|e| e.to_string())?;
        let bundle = generators::valid_bundle(&mut rng, &loaded.schema, &format!("b{i}"));
        cases.push((bundle, loaded));
    }
    let mut predicates = 0;
    for (bundle, data) in &cases {
        check(
            fiper::validate_bundle(bundle, &data.schema).is_valid(),
            || format!("{} invalid", bundle.id),
        )?;
        let options = ViewOptions {
            filter: Filter::RuleOnly,
            ..ViewOptions::default()
        };
        let view = build_fiper_view(bundle, &data.schema, &data.summaries, &options)
            .map_err(|e| e.to_string())?;
        check(view.rows.len() == bundle.rule.premise.len(), || {
            format!("{}: row count", bundle.id)
        })?;
        for row in &view.rows {
            let h = row
                .highlight
                .as_ref()
                .ok_or("premise row without highlight")?;
            check(h.contains(&row.marker), || {
                format!(
                    "{}/{}: model marker outside highlight",
                    bundle.id, row.feature
                )
            })?;
        }
        // The same property on the drawn geometry.
        let svg =
            render_bundle(bundle, data, OutputFormat::Svg, &options).map_err(|e| e.to_string())?;
        for (feature, spans, cx) in svg_rows(&String::from_utf8(svg).unwrap()) {
            predicates += 1;
            let inside = spans
                .iter()
                .any(|(x, w)| *x - 0.01 <= cx && cx <= x + w + 0.01);
            check(inside, || {
                format!(
                    "{}/{feature}: drawn marker at {cx} outside {spans:?}",
                    bundle.id
                )
            })?;
        }
    }
    Ok(format!(
        "{predicates} premise predicates across {} bundles (3 fixture + 200 random), model and SVG",
        cases.len()
    ))
}

fn fig1_structure() -> Outcome {
    let data = fixture();
    let b = fixture_bundle(&data, "fig1.json");
    let view = |filter| {
        build_fiper_view(
            &b,
            &data.schema,
            &data.summaries,
            &ViewOptions {
                filter,
                ..ViewOptions::default()
            },
        )
        .map_err(|e| e.to_string())
    };
    let rule_only = view(Filter::RuleOnly)?;
    let names: Vec<&str> = rule_only.rows.iter().map(|r| r.feature.as_str()).collect();
    check(names.len() == 3, || {
        format!("rule_only has {} rows", names.len())
    })?;
    let mut sorted = names.clone();
    sorted.sort();
    check(
        sorted == ["age", "present_employed_since", "purpose"],
        || format!("rule_only rows {names:?}"),
    )?;
    let all = view(Filter::AllFeatures)?;
    check(all.rows.len() == 10, || {
        format!("all has {} rows", all.rows.len())
    })?;
    let weights: Vec<f64> = all.rows.iter().map(|r| r.weight.abs()).collect();
    check(weights.windows(2).all(|w| w[0] >= w[1]), || {
        format!("|w| not non-increasing: {weights:?}")
    })?;
    Ok(format!(
        "rule_only rows {names:?}; all: 10 rows, |w| from {} down to {}",
        weights[0], weights[9]
    ))
}

const FUZZ_VOCAB: &[&str] = &[
    "IF",
    "THEN",
    "AND",
    "IN",
    "age",
    "purpose",
    "housing",
    "credit_risk",
    "=",
    "<",
    "<=",
    ">",
    ">=",
    "{",
    "}",
    ",",
    "19",
    "-3.5",
    "1e9",
    "\"x y\"",
    "\"",
    "\\",
    "\\\"",
    "education",
    "\n",
    " ",
    "\t",
    "1.",
    ".5",
    "--1",
    "é",
    "\u{0}",
    "{}",
    "IN{",
    "\"IN\"",
];

/// Random bytes, grammar token soup, and byte-level mutations of valid
/// emitted rules, fed to the parser until the deadline.
fn fuzz_rule_parser(duration: Duration, stop: Arc<AtomicBool>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let schema = fixture().schema;
    let seeds: Vec<String> = (0..64)
        .map(|_| {
            emit_rule_text(
                &generators::random_rule(&mut rng, &schema),
                schema.target_name(),
            )
            .0
        })
        .collect();
    let started = Instant::now();
    let (mut inputs, mut accepted) = (0u64, 0u64);
    while started.elapsed() < duration && !stop.load(Ordering::Relaxed) {
        let text = match inputs % 3 {
            0 => {
                let n = rng.gen_range(0..256);
                let bytes: Vec<u8> = (0..n).map(|_| rng.gen()).collect();
                String::from_utf8_lossy(&bytes).into_owned()
            }
            1 => {
                let n = rng.gen_range(0..48);
                let sep = if rng.gen_bool(0.5) { " " } else { "" };
                (0..n)
                    .map(|_| *FUZZ_VOCAB.choose(&mut rng).unwrap())
                    .collect::<Vec<_>>()
                    .join(sep)
            }
            _ => {
                let mut bytes = seeds.choose(&mut rng).unwrap().clone().into_bytes();
                for _ in 0..rng.gen_range(1..6) {
                    let at = rng.gen_range(0..=bytes.len());
                    match rng.gen_range(0..3) {
                        0 if at < bytes.len() => bytes[at] = rng.gen(),
                        1 if at < bytes.len() => {
                            bytes.remove(at);
                        }
                        _ => bytes
                            .splice(at..at, FUZZ_VOCAB.choose(&mut rng).unwrap().bytes())
                            .for_each(drop),
                    }
                }
                String::from_utf8_lossy(&bytes).into_owned()
            }
        };
        let parsed = catch_unwind(AssertUnwindSafe(|| {
            parse_rule_text(&RuleText(text.clone()), &schema)
        }))
        .map_err(|_| format!("parser panicked on {text:?}"))?;
        if let Ok(rule) = parsed {
            accepted += 1;
            // Anything accepted must print and re-parse to itself.
            let again = parse_rule_text(&emit_rule_text(&rule, schema.target_name()), &schema)
                .map_err(|e| format!("re-parse of accepted {text:?} failed: {e}"))?;
            check(again == rule, || {
                format!("accepted {text:?} does not round-trip")
            })?;
        }
        inputs += 1;
    }
    let ran = started.elapsed();
    check(ran >= duration, || {
        format!("fuzzing stopped early after {ran:?}")
    })?;
    Ok(format!(
        "{inputs} inputs in {:.1} s, {accepted} accepted, no crash",
        ran.as_secs_f64()
    ))
}

fn round_trips(fuzz: thread::JoinHandle<Outcome>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    for i in 0..1000 {
        let schema = mixed_schema(&mut rng, 10);
        let rule = generators::random_rule(&mut rng, &schema);
        let text = emit_rule_text(&rule, schema.target_name());
        let back = parse_rule_text(&text, &schema).map_err(|e| format!("rule {i}: {e}"))?;
        check(back == rule, || {
            format!("rule {i} differs after round trip: {}", text.0)
        })?;
    }
    for i in 0..200 {
        let schema = mixed_schema(&mut rng, 10);
        let bundle = generators::valid_bundle(&mut rng, &schema, &format!("b{i}"));
        let back =
            parse_bundle(&emit_bundle(&bundle), &schema).map_err(|e| format!("bundle {i}: {e}"))?;
        check(back == bundle, || {
            format!("bundle {i} differs after round trip")
        })?;
    }
    let fuzz = fuzz
        .join()
        .map_err(|_| "fuzz thread panicked".to_string())??;
    Ok(format!(
        "1000 rules and 200 bundles round-trip; fuzz: {fuzz}"
    ))
}

fn read_study(name: &str) -> String {
    std::fs::read_to_string(fixture_dir().join("../study").join(name)).unwrap()
}

fn study_design() -> Outcome {
    let truths: Vec<TruthRecord> =
        serde_json::from_str(&read_study("truths.json")).map_err(|e| e.to_string())?;
    let noisy: Vec<StudyResponse> =
        serde_json::from_str(&read_study("responses.json")).map_err(|e| e.to_string())?;
    let perfect: Vec<StudyResponse> =
        serde_json::from_str(&read_study("perfect_responses.json")).map_err(|e| e.to_string())?;
    let scored = score_study(&truths, &noisy, Some(Modality::Text)).map_err(|e| e.to_string())?;
    check(scored.answers_scored == 15 * 3 * 3 * 3, || {
        format!("{} answers scored", scored.answers_scored)
    })?;
    check(
        scored.answers_scored == 405 && scored.missing.is_empty(),
        || "missing answers".into(),
    )?;
    let clean = score_study(&truths, &perfect, Some(Modality::Text)).map_err(|e| e.to_string())?;
    check(clean.total.total() == 0, || {
        format!("perfect responses scored {:?}", clean.total)
    })?;
    check(clean.cells.iter().all(|c| c.e1 == 0 && c.e2 == 0), || {
        "nonzero cell".into()
    })?;
    check(clean.delta.iter().all(|d| d.delta.total == 0), || {
        "nonzero delta".into()
    })?;
    let orders = latin_square_order(15, 3);
    for pos in 0..3 {
        for c in 0..3 {
            let n = orders.iter().filter(|o| o[pos] == c).count();
            check(n == 5, || {
                format!("condition {c} at position {pos} {n} times")
            })?;
        }
    }
    Ok(format!(
        "405 answers scored ({} errors in noisy set), perfect set all zero, each condition 5x per position",
        scored.total.total()
    ))
}

fn scoring_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    const N: usize = 10_000;
    for _ in 0..N {
        let n = rng.gen_range(1..30);
        let a = generators::answer(&mut rng, n);
        let t = generators::answer(&mut rng, n);
        let got = score_answer(&a, &t).map_err(|e| e.to_string())?;
        check(
            (got.e1, got.e2) == errors_by_loop(a.bits(), t.bits()),
            || "score_answer disagrees".into(),
        )?;

        let r: [u32; 6] = std::array::from_fn(|_| 5 * rng.gen_range(0..=20));
        let tlx = raw_tlx(&TlxRatings::new(r).map_err(|e| e.to_string())?);
        check(
            (tlx - running_mean(&r.map(f64::from))).abs() <= 1e-12,
            || format!("raw_tlx {r:?}"),
        )?;

        let items: [u32; 12] = std::array::from_fn(|_| rng.gen_range(1..=5));
        let reverse: Vec<usize> = (0..12).filter(|_| rng.gen_bool(0.2)).collect();
        let keying = UesKeying::new(reverse.clone()).map_err(|e| e.to_string())?;
        let s = ues_short_form(&UesItems::new(items).map_err(|e| e.to_string())?, &keying);
        let want = ues_by_running_mean(&items, &reverse);
        let ok = [s.fa, s.pu, s.ae, s.rw, s.overall]
            .into_iter()
            .zip(want)
            .all(|(g, w)| (g - w).abs() <= 1e-12);
        check(ok, || format!("ues {items:?} reverse {reverse:?}"))?;
    }
    let mut delta_cells = 0;
    while delta_cells < N {
        let participants = rng.gen_range(1..20);
        let (truths, mut responses) = generators::study(&mut rng, 8, participants, 3, 3, false);
        let keep = rng.gen_range(responses.len() / 2..=responses.len());
        responses.shuffle(&mut rng);
        responses.truncate(keep);
        let baseline = Modality::ALL[rng.gen_range(0..3)];
        let matrix =
            aggregate_errors(&responses, &truth_map(&truths)).map_err(|e| e.to_string())?;
        let Ok(delta) = delta_error_matrix(&matrix, baseline) else {
            continue;
        };
        let oracle = delta_by_scan(&responses, &truths, baseline);
        check(delta.len() == oracle.len(), || {
            "delta cell sets differ".into()
        })?;
        for (k, d) in &delta {
            let key = (k.condition, k.instance, k.question, k.participant.clone());
            check(oracle.get(&key) == Some(&d.total), || {
                format!("delta differs at {k:?}")
            })?;
        }
        delta_cells += delta.len();
    }
    let example = raw_tlx(&TlxRatings::new([20, 40, 60, 80, 100, 0]).map_err(|e| e.to_string())?);
    check(example == 50.0, || {
        format!("raw_tlx(20,40,60,80,100,0) = {example}")
    })?;
    Ok(format!(
        "{N} inputs each for score_answer, raw_tlx, ues_short_form; {delta_cells} delta cells; raw_tlx example = {example}"
    ))
}

fn determinism() -> Outcome {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let store = Store::load_dir(&fixture_dir()).map_err(|e| e.to_string())?;
    let app = router(AppState::new(store, None));
    let get = |uri: String| {
        let app = app.clone();
        runtime.block_on(async move {
            let response = app
                .oneshot(Request::get(uri).body(Body::empty()).unwrap())
                .await
                .unwrap();
            let status = response.status();
            (
                status,
                to_bytes(response.into_body(), usize::MAX)
                    .await
                    .unwrap()
                    .to_vec(),
            )
        })
    };
    let mut compared = 0;
    for id in ["fig1", "text_rule", "empty_premise"] {
        for (filter, sort) in [("all", "abs"), ("rule", "abs"), ("all", "schema")] {
            let cli = Command::new(env!("CARGO_BIN_EXE_fiper"))
                .args([
                    "render",
                    &fixture_dir()
                        .join(format!("bundles/{id}.json"))
                        .to_string_lossy(),
                ])
                .args([
                    "--dataset",
                    &fixture_dir().join("german_credit.csv").to_string_lossy(),
                ])
                .args(["--format", "svg", "--filter", filter, "--sort", sort])
                .output()
                .map_err(|e| e.to_string())?;
            check(cli.status.success(), || {
                String::from_utf8_lossy(&cli.stderr).into_owned()
            })?;
            let uri = format!("/api/explanations/{id}/svg?filter={filter}&sort={sort}");
            let (status, body) = get(uri.clone());
            check(status == StatusCode::OK, || format!("{uri}: {status}"))?;
            check(body == cli.stdout, || {
                format!("{uri}: service body differs from CLI output")
            })?;
            for _ in 0..5 {
                check(get(uri.clone()).1 == body, || {
                    format!("{uri}: repeated GET differs")
                })?;
            }
            compared += 1;
        }
    }
    Ok(format!(
        "{compared} CLI renders byte-identical to /svg; 5 repeated GETs each identical"
    ))
}

fn main() -> ExitCode {
    let fuzz_stop = Arc::new(AtomicBool::new(false));
    let stop = fuzz_stop.clone();
    let fuzz = thread::spawn(move || fuzz_rule_parser(Duration::from_secs(60), stop));

    let mut fuzz = Some(fuzz);
    let criteria: Vec<(&str, Criterion)> = vec![
        ("coverage oracle", Box::new(coverage_oracle)),
        ("quartile oracle", Box::new(quartile_oracle)),
        ("marker in highlight", Box::new(marker_in_highlight)),
        ("fig1 structure", Box::new(fig1_structure)),
        ("study design arithmetic", Box::new(study_design)),
        ("scoring oracles", Box::new(scoring_oracles)),
        ("determinism", Box::new(determinism)),
        (
            "parser round trips and fuzz",
            Box::new(move || round_trips(fuzz.take().unwrap())),
        ),
    ];
    let mut results = BTreeMap::new();
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match &outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
        results.insert(name, outcome.is_ok());
    }
    fuzz_stop.store(true, Ordering::Relaxed);
    println!(
        "{}/{} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
