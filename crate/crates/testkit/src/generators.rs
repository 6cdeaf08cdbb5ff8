use fiper::ingest::Dataset;
use fiper::model::{
    Bound, DatasetSchema, ExplanationBundle, FeatureDomain, FeatureSpec, FeatureWeight, Instance,
    NumericInterval, Predicate, Rule, Value,
};
use fiper::study::{AnswerVector, Modality, StudyResponse, TruthRecord};
use rand::seq::SliceRandom;
use rand::Rng;

const LABEL_POOL: &[&str] = &[
    "a",
    "b",
    "rent",
    "own",
    "for free",
    "car (new)",
    "1",
    "01",
    "-2.5",
    "IN",
    "THEN",
    "x\"y",
    "back\\slash",
    "< 1 year",
    "ünïcode",
    "two\nlines",
    "_u",
    "z9",
];

const ODD_NAMES: &[&str] = &["present employed since", "IF", "AND", "9lives", "a\"quote"];

pub const TARGET: &str = "credit_risk";
pub const CLASSES: [&str; 3] = ["good", "bad", "very bad"];

/// A number with a random number of decimals, sometimes at full precision.
pub fn number<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let x = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
    match rng.gen_range(0..4) {
        0 => x.round(),
        1 => (x * 10.0).round() / 10.0,
        2 => (x * 1000.0).round() / 1000.0,
        _ => x,
    }
    .clamp(lo, hi)
}

/// Mixed schema alternating numerical and categorical features.
pub fn mixed_schema<R: Rng>(rng: &mut R, features: usize) -> DatasetSchema {
    let mut specs = Vec::with_capacity(features);
    for i in 0..features {
        let name = if rng.gen_bool(0.15) {
            format!("{}{i}", ODD_NAMES[rng.gen_range(0..ODD_NAMES.len())])
        } else if i % 2 == 0 {
            format!("num_{i}")
        } else {
            format!("cat_{i}")
        };
        if i % 2 == 0 {
            let lo = number(rng, -100.0, 100.0);
            let hi = if rng.gen_bool(0.05) {
                lo
            } else {
                lo + number(rng, 0.5, 200.0)
            };
            specs.push(FeatureSpec::numerical(name, lo, hi).unwrap());
        } else {
            let k = rng.gen_range(1..=6);
            let labels: Vec<&str> = LABEL_POOL.choose_multiple(rng, k).copied().collect();
            specs.push(FeatureSpec::categorical(name, labels).unwrap());
        }
    }
    DatasetSchema::new(
        specs,
        TARGET,
        CLASSES.iter().map(|s| s.to_string()).collect(),
    )
    .unwrap()
}

pub fn value<R: Rng>(rng: &mut R, spec: &FeatureSpec) -> Value {
    match spec.domain() {
        FeatureDomain::Numerical { lo, hi } => Value::Number(number(rng, *lo, *hi)),
        FeatureDomain::Categorical { labels } => {
            Value::Label(labels[rng.gen_range(0..labels.len())].clone())
        }
    }
}

pub fn instance<R: Rng>(rng: &mut R, schema: &DatasetSchema) -> Instance {
    Instance {
        values: schema
            .features()
            .iter()
            .map(|f| (f.name().to_owned(), value(rng, f)))
            .collect(),
    }
}

fn csv_field(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// CSV text with `rows` random rows.
pub fn dataset_csv<R: Rng>(rng: &mut R, schema: &DatasetSchema, rows: usize) -> String {
    let mut out = String::new();
    let header: Vec<String> = schema
        .features()
        .iter()
        .map(|f| csv_field(f.name()))
        .chain([csv_field(schema.target_name())])
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for _ in 0..rows {
        let mut cells: Vec<String> = schema
            .features()
            .iter()
            .map(|f| csv_field(&value(rng, f).to_string()))
            .collect();
        let classes = schema.target_classes();
        cells.push(csv_field(&classes[rng.gen_range(0..classes.len())]));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn dataset<R: Rng>(rng: &mut R, schema: &DatasetSchema, rows: usize) -> Dataset {
    Dataset::from_csv(dataset_csv(rng, schema, rows).as_bytes(), schema).unwrap()
}

fn bound_below<R: Rng>(rng: &mut R, x: f64, span: f64) -> Bound {
    let gap = number(rng, 0.0, span);
    if gap > 0.0 && rng.gen_bool(0.3) {
        Bound::open(x - gap)
    } else {
        Bound::closed(x - gap)
    }
}

fn bound_above<R: Rng>(rng: &mut R, x: f64, span: f64) -> Bound {
    let gap = number(rng, 0.0, span);
    if gap > 0.0 && rng.gen_bool(0.3) {
        Bound::open(x + gap)
    } else {
        Bound::closed(x + gap)
    }
}

fn interval_around<R: Rng>(rng: &mut R, x: f64, span: f64) -> NumericInterval {
    match rng.gen_range(0..3) {
        0 => NumericInterval {
            lower: Some(bound_below(rng, x, span)),
            upper: Some(bound_above(rng, x, span)),
        },
        1 => NumericInterval {
            lower: None,
            upper: Some(bound_above(rng, x, span)),
        },
        _ => NumericInterval {
            lower: Some(bound_below(rng, x, span)),
            upper: None,
        },
    }
}

fn label_set_with<R: Rng>(rng: &mut R, labels: &[String], must: Option<&str>) -> Vec<String> {
    let k = rng.gen_range(1..=labels.len());
    let mut chosen: Vec<String> = labels.choose_multiple(rng, k).cloned().collect();
    if let Some(m) = must {
        if !chosen.iter().any(|l| l == m) {
            let at = rng.gen_range(0..=chosen.len());
            chosen.insert(at, m.to_owned());
        }
    }
    chosen
}

/// A structurally valid rule over a random subset of features. Coverage of
/// any particular instance is left to chance.
pub fn random_rule<R: Rng>(rng: &mut R, schema: &DatasetSchema) -> Rule {
    let mut specs: Vec<&FeatureSpec> = schema.features().iter().collect();
    specs.shuffle(rng);
    let take = rng.gen_range(0..=specs.len());
    let premise = specs[..take]
        .iter()
        .map(|spec| match spec.domain() {
            FeatureDomain::Numerical { lo, hi } => {
                let x = number(rng, *lo, *hi);
                Predicate::interval(spec.name(), interval_around(rng, x, (hi - lo).max(1.0)))
            }
            FeatureDomain::Categorical { labels } => {
                Predicate::set(spec.name(), label_set_with(rng, labels, None))
            }
        })
        .collect();
    let classes = schema.target_classes();
    Rule::new(premise, classes[rng.gen_range(0..classes.len())].clone())
}

/// A rule whose premise the instance satisfies.
pub fn covering_rule<R: Rng>(rng: &mut R, schema: &DatasetSchema, instance: &Instance) -> Rule {
    let mut specs: Vec<&FeatureSpec> = schema.features().iter().collect();
    specs.shuffle(rng);
    let take = rng.gen_range(0..=specs.len());
    let premise = specs[..take]
        .iter()
        .map(|spec| {
            let v = instance.get(spec.name()).unwrap();
            match (spec.domain(), v) {
                (FeatureDomain::Numerical { lo, hi }, Value::Number(x)) => {
                    Predicate::interval(spec.name(), interval_around(rng, *x, (hi - lo).max(1.0)))
                }
                (FeatureDomain::Categorical { labels }, Value::Label(l)) => {
                    Predicate::set(spec.name(), label_set_with(rng, labels, Some(l)))
                }
                _ => unreachable!(),
            }
        })
        .collect();
    let classes = schema.target_classes();
    Rule::new(premise, classes[rng.gen_range(0..classes.len())].clone())
}

pub fn importance<R: Rng>(rng: &mut R, schema: &DatasetSchema) -> Vec<FeatureWeight> {
    let mut names: Vec<&str> = schema.features().iter().map(|f| f.name()).collect();
    names.shuffle(rng);
    let take = rng.gen_range(0..=names.len());
    names[..take]
        .iter()
        .map(|n| {
            let w = match rng.gen_range(0..5) {
                0 => 0.0,
                _ => number(rng, -1.0, 1.0),
            };
            FeatureWeight::new(*n, w)
        })
        .collect()
}

/// A bundle that passes validation: its instance is covered by its rule and
/// the prediction equals the consequence.
pub fn valid_bundle<R: Rng>(rng: &mut R, schema: &DatasetSchema, id: &str) -> ExplanationBundle {
    let instance = instance(rng, schema);
    let rule = covering_rule(rng, schema, &instance);
    ExplanationBundle {
        id: id.to_owned(),
        schema_ref: "generated".into(),
        prediction: rule.consequence.clone(),
        instance,
        rule,
        importance: importance(rng, schema),
    }
}

pub fn answer<R: Rng>(rng: &mut R, len: usize) -> AnswerVector {
    AnswerVector::new((0..len).map(|_| rng.gen_bool(0.3)).collect()).unwrap()
}

/// Full-factorial study: every participant answers every (instance,
/// question) task under every condition. With `perfect`, answers equal the
/// truth.
pub fn study<R: Rng>(
    rng: &mut R,
    feature_count: usize,
    participants: usize,
    instances: u8,
    questions: u8,
    perfect: bool,
) -> (Vec<TruthRecord>, Vec<StudyResponse>) {
    let mut truths = Vec::new();
    for instance in 1..=instances {
        for question in 1..=questions {
            let mut bits = vec![false; feature_count + 1];
            let present = rng.gen_range(1..=feature_count.min(4));
            for &i in (0..feature_count)
                .collect::<Vec<_>>()
                .choose_multiple(rng, present)
            {
                bits[i] = true;
            }
            truths.push(TruthRecord {
                instance,
                question,
                answer: AnswerVector::new(bits).unwrap(),
            });
        }
    }
    let mut responses = Vec::new();
    for p in 0..participants {
        for condition in Modality::ALL {
            for t in &truths {
                let answer = if perfect || rng.gen_bool(0.5) {
                    t.answer.clone()
                } else {
                    self::answer(rng, feature_count + 1)
                };
                responses.push(StudyResponse {
                    participant_id: format!("P{:02}", p + 1),
                    condition,
                    instance_index: t.instance,
                    question_index: t.question,
                    answer,
                    completion_time: (rng.gen_range(5.0..180.0_f64) * 10.0).round() / 10.0,
                });
            }
        }
    }
    (truths, responses)
}
