//! Baseline presentations: the rule as plain text, and the rule as a row of
//! graphical blocks per predicate.

use serde::{Deserialize, Serialize};

use crate::ingest::emit_rule_text;
use crate::model::{Bound, ExplanationBundle, PredicateBody};

/// Plain-text modality: a header line, the rule, and the prediction.
pub fn render_text_modality(bundle: &ExplanationBundle, target_name: &str) -> String {
    format!(
        "Explanation {}\n{}\nPrediction: {} = {}\n",
        bundle.id,
        emit_rule_text(&bundle.rule, target_name),
        target_name,
        bundle.prediction
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", content = "text", rename_all = "lowercase")]
pub enum Block {
    Feature(String),
    Operator(String),
    Value(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockGroup {
    pub feature: String,
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub groups: Vec<BlockGroup>,
    pub consequence: BlockGroup,
}

fn lower_glyph(b: Bound) -> &'static str {
    if b.open {
        "<"
    } else {
        "≤"
    }
}

/// One block group per premise predicate, in premise order, plus the
/// consequence. Two-sided intervals read `lo ≤ feature ≤ hi`.
pub fn render_block_modality(bundle: &ExplanationBundle, target_name: &str) -> BlockSpec {
    let groups = bundle
        .rule
        .premise
        .iter()
        .map(|p| {
            let feature = Block::Feature(p.feature.clone());
            let blocks = match &p.body {
                PredicateBody::Interval(iv) => match (iv.lower, iv.upper) {
                    (Some(lo), Some(hi)) => vec![
                        Block::Value(lo.value.to_string()),
                        Block::Operator(lower_glyph(lo).into()),
                        feature,
                        Block::Operator(lower_glyph(hi).into()),
                        Block::Value(hi.value.to_string()),
                    ],
                    (None, Some(hi)) => vec![
                        feature,
                        Block::Operator(lower_glyph(hi).into()),
                        Block::Value(hi.value.to_string()),
                    ],
                    (Some(lo), None) => vec![
                        feature,
                        Block::Operator(if lo.open { ">" } else { "≥" }.into()),
                        Block::Value(lo.value.to_string()),
                    ],
                    (None, None) => vec![feature],
                },
                PredicateBody::Set(labels) => {
                    let mut blocks = vec![feature, Block::Operator("∈".into())];
                    blocks.extend(labels.iter().cloned().map(Block::Value));
                    blocks
                }
            };
            BlockGroup {
                feature: p.feature.clone(),
                blocks,
            }
        })
        .collect();
    BlockSpec {
        groups,
        consequence: BlockGroup {
            feature: target_name.to_owned(),
            blocks: vec![
                Block::Feature(target_name.to_owned()),
                Block::Operator("=".into()),
                Block::Value(bundle.rule.consequence.clone()),
            ],
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Instance, NumericInterval, Predicate, Rule};

    fn bundle(premise: Vec<Predicate>) -> ExplanationBundle {
        ExplanationBundle {
            id: "x".into(),
            schema_ref: "s".into(),
            instance: Instance::default(),
            prediction: "good".into(),
            rule: Rule::new(premise, "good"),
            importance: vec![],
        }
    }

    #[test]
    fn empty_premise_text() {
        assert_eq!(
            render_text_modality(&bundle(vec![]), "credit_risk"),
            "Explanation x\nIF THEN credit_risk = good\nPrediction: credit_risk = good\n"
        );
    }

    #[test]
    fn blocks_per_predicate() {
        let spec = render_block_modality(
            &bundle(vec![
                Predicate::interval("age", NumericInterval::at_most(31.0)),
                Predicate::set("purpose", ["education", "business"]),
            ]),
            "credit_risk",
        );
        assert_eq!(spec.groups.len(), 2);
        assert_eq!(
            spec.groups[0].blocks,
            vec![
                Block::Feature("age".into()),
                Block::Operator("≤".into()),
                Block::Value("31".into())
            ]
        );
        assert_eq!(spec.groups[1].blocks.len(), 4);
        assert_eq!(spec.consequence.blocks[2], Block::Value("good".into()));
    }

    #[test]
    fn two_sided_interval_is_a_triple_around_the_feature() {
        let spec = render_block_modality(
            &bundle(vec![Predicate::interval(
                "age",
                NumericInterval::closed(19.0, 31.0),
            )]),
            "credit_risk",
        );
        let b = &spec.groups[0].blocks;
        assert_eq!(b[0], Block::Value("19".into()));
        assert_eq!(b[2], Block::Feature("age".into()));
        assert_eq!(b[4], Block::Value("31".into()));
        let doc = serde_json::to_string(&b[1]).unwrap();
        assert_eq!(doc, r#"{"role":"operator","text":"≤"}"#);
    }
}
