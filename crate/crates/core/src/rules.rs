//! Fuzzy If-Then rules read off labeled prototypes.
//!
//! A committed weight `(u, 1 - v)` is the hyperbox `[u, v]`. Each bound is
//! rounded to the nearest of `Q` evenly spaced levels `V_q = (q - 1) / (Q - 1)`
//! and the per-class association counts of the node, normalised, give the
//! rule's confidences.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{ArtError, Result};
use crate::learner::SemiSupervised;
use crate::scalar::Scalar;

pub const FIVE_LEVELS: [&str; 5] = ["Very Small", "Small", "Medium", "Large", "Very Large"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyRule {
    /// Per-feature level range `[q_lo, q_hi]`, 1-based.
    pub antecedents: Vec<(usize, usize)>,
    pub consequent: usize,
    /// Per-class confidence, summing to one.
    pub confidences: Vec<f64>,
    pub source_node: usize,
}

/// Grid point of level `q` (1-based).
pub fn level_value(q: usize, levels: usize) -> f64 {
    (q as f64 - 1.0) / (levels as f64 - 1.0)
}

pub fn grid(levels: usize) -> Vec<f64> {
    (1..=levels).map(|q| level_value(q, levels)).collect()
}

/// Nearest level to `value`; exact midpoints go to the higher level. Values
/// outside `[0, 1]` are clamped.
pub fn quantize(value: f64, levels: usize) -> Result<usize> {
    if levels < 2 {
        return Err(ArtError::Configuration(format!("quantization needs at least 2 levels, got {levels}")));
    }
    let v = if (0.0..=1.0).contains(&value) {
        value
    } else {
        warn!("value {value} outside [0, 1] clamped before quantization");
        if value.is_nan() { 0.0 } else { value.clamp(0.0, 1.0) }
    };
    let step = (v * (levels - 1) as f64 + 0.5).floor() as usize;
    Ok(step.min(levels - 1) + 1)
}

/// Hyperbox `[u_i, v_i]` per feature of a committed weight vector.
///
/// A point box can come back with `v` a few ulps below `u` because of the
/// `1 - (1 - x)` round trip; that is collapsed to `[u, u]`.
pub fn hyperbox_bounds<T: Scalar>(weight: &[T]) -> Result<Vec<(T, T)>> {
    let d = weight.len() / 2;
    let slack = T::epsilon() * T::of(8.0);
    (0..d)
        .map(|i| {
            let u = weight[i];
            let v = T::one() - weight[d + i];
            if u <= v {
                Ok((u, v))
            } else if u - v <= slack {
                Ok((u, u))
            } else {
                Err(ArtError::CorruptedWeight { feature: i, lower: u.as_f64(), upper: v.as_f64() })
            }
        })
        .collect()
}

/// One rule per labeled prototype, in node order.
pub fn extract_rules<T, M>(model: &M, levels: usize) -> Result<Vec<FuzzyRule>>
where
    T: Scalar,
    M: SemiSupervised<T> + ?Sized,
{
    if levels < 2 {
        return Err(ArtError::Configuration(format!("quantization needs at least 2 levels, got {levels}")));
    }
    let net = model.input_network();
    let mut rules = Vec::new();
    for (j, node) in net.nodes().iter().enumerate() {
        if !node.committed {
            continue;
        }
        let Some(consequent) = model.node_label(j) else { continue };
        let antecedents = hyperbox_bounds(&node.weight)?
            .into_iter()
            .map(|(u, v)| Ok((quantize(u.as_f64(), levels)?, quantize(v.as_f64(), levels)?)))
            .collect::<Result<Vec<_>>>()?;
        let evidence = model.class_evidence(j);
        let total: u64 = evidence.iter().sum();
        let confidences = if total == 0 {
            let mut one_hot = vec![0.0; evidence.len()];
            one_hot[consequent] = 1.0;
            one_hot
        } else {
            evidence.iter().map(|&n| n as f64 / total as f64).collect()
        };
        rules.push(FuzzyRule { antecedents, consequent, confidences, source_node: j });
    }
    Ok(rules)
}

/// Level names for `levels` quantization steps.
pub fn default_vocabulary(levels: usize) -> Vec<String> {
    match levels {
        5 => FIVE_LEVELS.iter().map(|s| s.to_string()).collect(),
        3 => ["Small", "Medium", "Large"].iter().map(|s| s.to_string()).collect(),
        2 => ["Low", "High"].iter().map(|s| s.to_string()).collect(),
        _ => (1..=levels).map(|q| format!("Level {q}")).collect(),
    }
}

/// Shortest rendering with at least one decimal, at most three.
pub fn format_confidence(p: f64) -> String {
    let mut s = format!("{p:.3}");
    while s.ends_with('0') && !s.ends_with(".0") {
        s.pop();
    }
    s
}

pub fn render_rule(rule: &FuzzyRule, feature_names: &[String], vocabulary: &[String], class_names: &[String]) -> Result<String> {
    if feature_names.len() != rule.antecedents.len() {
        return Err(ArtError::Configuration(format!(
            "{} feature names given for a rule over {} features",
            feature_names.len(),
            rule.antecedents.len()
        )));
    }
    let level = |q: usize| {
        vocabulary
            .get(q.wrapping_sub(1))
            .ok_or_else(|| ArtError::Configuration(format!("level {q} has no name in a vocabulary of {}", vocabulary.len())))
    };
    let mut terms = Vec::with_capacity(feature_names.len());
    for (name, &(lo, hi)) in feature_names.iter().zip(&rule.antecedents) {
        if lo == hi {
            terms.push(format!("{name} is \"{}\"", level(lo)?));
        } else {
            terms.push(format!("{name} is from \"{}\" to \"{}\"", level(lo)?, level(hi)?));
        }
    }
    let class = class_names
        .get(rule.consequent)
        .ok_or_else(|| ArtError::Configuration(format!("class {} has no name", rule.consequent)))?;
    Ok(format!(
        "If {} Then {class} with confidence estimate={}",
        terms.join(", AND "),
        format_confidence(rule.confidences[rule.consequent])
    ))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per rule: level range per feature (`q` or `lo-hi`) and the
/// confidence of every class.
pub fn rules_table(rules: &[FuzzyRule], feature_names: &[String], class_names: &[String]) -> String {
    let mut out = String::from("rule,node");
    for f in feature_names {
        out.push(',');
        out.push_str(&csv_field(f));
    }
    for c in class_names {
        out.push(',');
        out.push_str(&csv_field(&format!("confidence {c}")));
    }
    out.push_str(",class\n");
    for (i, r) in rules.iter().enumerate() {
        out.push_str(&format!("{},{}", i + 1, r.source_node));
        for &(lo, hi) in &r.antecedents {
            if lo == hi {
                out.push_str(&format!(",{lo}"));
            } else {
                out.push_str(&format!(",{lo}-{hi}"));
            }
        }
        for p in &r.confidences {
            out.push(',');
            out.push_str(&format_confidence(*p));
        }
        let class = class_names.get(r.consequent).cloned().unwrap_or_else(|| r.consequent.to_string());
        out.push(',');
        out.push_str(&csv_field(&class));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn five_level_grid() {
        assert_eq!(grid(5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn quantize_examples() {
        // |0.3 - 0.25| < |0.3 - 0.5|
        assert_eq!(quantize(0.3, 5).unwrap(), 2);
        assert_eq!(quantize(0.125, 5).unwrap(), 2);
        assert_eq!(quantize(0.0, 5).unwrap(), 1);
        assert_eq!(quantize(1.0, 5).unwrap(), 5);
        assert_eq!(quantize(0.874, 5).unwrap(), 4);
        assert_eq!(quantize(0.875, 5).unwrap(), 5);
        assert_eq!(quantize(1.7, 5).unwrap(), 5);
        assert_eq!(quantize(-0.2, 5).unwrap(), 1);
        assert!(quantize(0.5, 1).is_err());
    }

    #[test]
    fn quantize_matches_nearest_grid_point() {
        for levels in 2..9 {
            let g = grid(levels);
            for i in 0..=1000 {
                let v = i as f64 / 1000.0;
                let q = quantize(v, levels).unwrap();
                let d = (v - g[q - 1]).abs();
                assert!(g.iter().all(|p| (v - p).abs() >= d - 1e-12), "v={v} levels={levels}");
            }
        }
    }

    #[test]
    fn hyperbox_examples() {
        let b = hyperbox_bounds::<f64>(&[0.2, 0.5, 0.6, 0.3]).unwrap();
        assert!((b[0].0 - 0.2).abs() < 1e-12 && (b[0].1 - 0.4).abs() < 1e-12);
        assert!((b[1].0 - 0.5).abs() < 1e-12 && (b[1].1 - 0.7).abs() < 1e-12);
        let point = hyperbox_bounds::<f64>(&[0.3, 0.6, 0.7, 0.4]).unwrap();
        assert!(point.iter().all(|(u, v)| (u - v).abs() < 1e-12));
        assert!(matches!(hyperbox_bounds(&[1.0, 1.0, 1.0, 1.0]), Err(ArtError::CorruptedWeight { feature: 0, .. })));
        let x = 0.3834433064675156f64;
        let b = hyperbox_bounds(&[x, 1.0 - x]).unwrap();
        assert_eq!(b[0], (x, x));
    }

    #[test]
    fn render_examples() {
        let rule = FuzzyRule {
            antecedents: vec![(1, 1), (4, 5)],
            consequent: 0,
            confidences: vec![1.0, 0.0],
            source_node: 0,
        };
        let text = render_rule(&rule, &names(&["Age", "OLDPEAK"]), &default_vocabulary(5), &names(&["Positive", "Negative"])).unwrap();
        assert_eq!(
            text,
            "If Age is \"Very Small\", AND OLDPEAK is from \"Large\" to \"Very Large\" Then Positive with confidence estimate=1.0"
        );
        assert!(render_rule(&rule, &names(&["Age"]), &default_vocabulary(5), &names(&["P", "N"])).is_err());
        assert!(render_rule(&rule, &names(&["Age", "B"]), &default_vocabulary(3), &names(&["P", "N"])).is_err());
    }

    #[test]
    fn confidence_formatting() {
        assert_eq!(format_confidence(1.0), "1.0");
        assert_eq!(format_confidence(0.0), "0.0");
        assert_eq!(format_confidence(7.0 / 9.0), "0.778");
        assert_eq!(format_confidence(0.5), "0.5");
    }

    #[test]
    fn table_layout() {
        let rules = vec![FuzzyRule { antecedents: vec![(2, 3), (5, 5)], consequent: 1, confidences: vec![0.25, 0.75], source_node: 4 }];
        let t = rules_table(&rules, &names(&["a", "b"]), &names(&["x", "y"]));
        assert_eq!(t, "rule,node,a,b,confidence x,confidence y,class\n1,4,2-3,5,0.25,0.75,y\n");
    }
}
