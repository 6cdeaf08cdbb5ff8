//! Reference computations written without calling the library routines
//! they check.

use std::collections::BTreeMap;

use fiper::model::{Instance, PredicateBody, Rule, Value};
use fiper::study::{Modality, StudyResponse, TruthRecord};

/// Evaluates each predicate from its raw bound fields. `None` when a
/// predicate names a feature the instance lacks or mismatches its kind.
// Negated comparisons on purpose: a NaN value must fail every bound.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn brute_force_covers(instance: &Instance, rule: &Rule) -> Option<bool> {
    let mut verdicts = Vec::new();
    for p in &rule.premise {
        let v = instance.values.get(&p.feature)?;
        let ok = match (&p.body, v) {
            (PredicateBody::Interval(iv), Value::Number(x)) => {
                let mut ok = true;
                if let Some(b) = iv.lower {
                    if b.open {
                        ok = ok && !(*x <= b.value);
                    } else {
                        ok = ok && !(*x < b.value);
                    }
                }
                if let Some(b) = iv.upper {
                    if b.open {
                        ok = ok && !(*x >= b.value);
                    } else {
                        ok = ok && !(*x > b.value);
                    }
                }
                ok
            }
            (PredicateBody::Set(labels), Value::Label(l)) => {
                let mut found = false;
                for s in labels {
                    if s.as_bytes() == l.as_bytes() {
                        found = true;
                    }
                }
                found
            }
            _ => return None,
        };
        verdicts.push(ok);
    }
    Some(!verdicts.contains(&false))
}

/// Five numbers by sorting, then interpolating at position `(n-1)·k/4`
/// computed in integer arithmetic: whole part `(n-1)k div 4`, fraction
/// `((n-1)k mod 4) / 4`.
pub fn five_numbers_by_sort(values: &[f64]) -> [f64; 5] {
    let mut s = values.to_vec();
    // Insertion sort keeps this independent of the library's sort.
    for i in 1..s.len() {
        let mut j = i;
        while j > 0 && s[j - 1] > s[j] {
            s.swap(j - 1, j);
            j -= 1;
        }
    }
    let n = s.len();
    let at = |k: usize| {
        let whole = (n - 1) * k / 4;
        let rem = (n - 1) * k % 4;
        if rem == 0 {
            s[whole]
        } else {
            let g = rem as f64 / 4.0;
            (1.0 - g) * s[whole] + g * s[whole + 1]
        }
    };
    [s[0], at(1), at(2), at(3), s[n - 1]]
}

pub fn median_by_sort(values: &[f64]) -> f64 {
    five_numbers_by_sort(values)[2]
}

pub fn count_labels(values: &[String], labels: &[String]) -> Vec<u64> {
    labels
        .iter()
        .map(|l| values.iter().filter(|v| *v == l).count() as u64)
        .collect()
}

/// (E1, E2) by scanning index by index.
pub fn errors_by_loop(answer: &[bool], truth: &[bool]) -> (u32, u32) {
    let (mut e1, mut e2) = (0, 0);
    for i in 0..truth.len() {
        if answer[i] && !truth[i] {
            e1 += 1;
        }
        if truth[i] && !answer[i] {
            e2 += 1;
        }
    }
    (e1, e2)
}

/// Running mean, `m_k = m_{k-1} + (x_k - m_{k-1}) / k`.
pub fn running_mean(xs: &[f64]) -> f64 {
    let mut m = 0.0;
    for (k, &x) in xs.iter().enumerate() {
        m += (x - m) / (k as f64 + 1.0);
    }
    m
}

/// UES-SF subscale and overall means, FA/PU/AE/RW taken three items each.
pub fn ues_by_running_mean(items: &[u32; 12], reverse: &[usize]) -> [f64; 5] {
    let keyed: Vec<f64> = (0..12)
        .map(|i| {
            if reverse.contains(&i) {
                (6 - items[i]) as f64
            } else {
                items[i] as f64
            }
        })
        .collect();
    [
        running_mean(&keyed[0..3]),
        running_mean(&keyed[3..6]),
        running_mean(&keyed[6..9]),
        running_mean(&keyed[9..12]),
        running_mean(&keyed),
    ]
}

/// Total-error delta `condition − baseline` for every (condition, instance,
/// question, participant) that both conditions answered, by scanning the raw
/// responses.
pub fn delta_by_scan(
    responses: &[StudyResponse],
    truths: &[TruthRecord],
    baseline: Modality,
) -> BTreeMap<(Modality, u8, u8, String), i64> {
    let errors = |r: &StudyResponse| -> i64 {
        let t = truths
            .iter()
            .find(|t| t.instance == r.instance_index && t.question == r.question_index)
            .unwrap();
        let (e1, e2) = errors_by_loop(r.answer.bits(), t.answer.bits());
        i64::from(e1 + e2)
    };
    let mut out = BTreeMap::new();
    for r in responses.iter().filter(|r| r.condition != baseline) {
        for b in responses.iter().filter(|b| {
            b.condition == baseline
                && b.participant_id == r.participant_id
                && b.instance_index == r.instance_index
                && b.question_index == r.question_index
        }) {
            out.insert(
                (
                    r.condition,
                    r.instance_index,
                    r.question_index,
                    r.participant_id.clone(),
                ),
                errors(r) - errors(b),
            );
        }
    }
    out
}
