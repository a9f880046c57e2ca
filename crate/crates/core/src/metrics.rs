//! Accuracy, per-class precision/recall/F1, macro and weighted F1, and the
//! confusion matrix. Any ratio with an empty denominator is 0.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub classes: Vec<String>,
    pub n: usize,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    /// Rows are true classes, columns predicted classes, in `classes` order.
    pub confusion: Vec<Vec<usize>>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn evaluate<S: AsRef<str>, T: AsRef<str>>(truth: &[S], predicted: &[T], classes: &[String]) -> Result<EvaluationReport> {
    if truth.len() != predicted.len() {
        return Err(invalid!("{} true labels but {} predictions", truth.len(), predicted.len()));
    }
    let index = |label: &str| classes.iter().position(|c| c == label).ok_or_else(|| invalid!("label {label} is not in the class list"));
    let c = classes.len();
    let mut confusion = vec![vec![0usize; c]; c];
    for (t, p) in truth.iter().zip(predicted) {
        confusion[index(t.as_ref())?][index(p.as_ref())?] += 1;
    }
    let n = truth.len();
    let correct: usize = (0..c).map(|i| confusion[i][i]).sum();

    let mut per_class = Vec::with_capacity(c);
    for k in 0..c {
        let tp = confusion[k][k];
        let support: usize = confusion[k].iter().sum();
        let predicted_k: usize = confusion.iter().map(|row| row[k]).sum();
        let precision = ratio(tp, predicted_k);
        let recall = ratio(tp, support);
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        per_class.push(ClassMetrics { class: classes[k].clone(), precision, recall, f1, support });
    }
    let macro_f1 = if c == 0 { 0.0 } else { per_class.iter().map(|m| m.f1).sum::<f64>() / c as f64 };
    let weighted_f1 = if n == 0 { 0.0 } else { per_class.iter().map(|m| m.f1 * m.support as f64).sum::<f64>() / n as f64 };

    Ok(EvaluationReport { classes: classes.to_vec(), n, accuracy: ratio(correct, n), per_class, macro_f1, weighted_f1, confusion })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn classes(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn perfect_predictions() {
        let cl = classes(&["EGY", "GLF", "LAV", "MSA", "NOR"]);
        let truth: Vec<&str> = cl.iter().map(String::as_str).cycle().take(20).collect();
        let r = evaluate(&truth, &truth, &cl).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.macro_f1, 1.0);
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(r.confusion[i][j], if i == j { 4 } else { 0 });
            }
        }
    }

    #[test]
    fn hand_computed_case() {
        let r = evaluate(&["A", "A", "B", "B"], &["A", "B", "B", "B"], &classes(&["A", "B"])).unwrap();
        assert_eq!(r.accuracy, 0.75);
        assert!((r.per_class[0].f1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.per_class[1].f1 - 0.8).abs() < 1e-15);
        assert!((r.macro_f1 - 0.7333).abs() < 5e-4);
        assert_eq!(r.confusion, vec![vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn constant_predictor() {
        let cl = classes(&["a", "b", "c", "d", "e"]);
        let truth: Vec<&str> = cl.iter().map(String::as_str).cycle().take(100).collect();
        let pred = vec!["a"; 100];
        let r = evaluate(&truth, &pred, &cl).unwrap();
        assert_eq!(r.accuracy, 0.2);
        assert!((r.macro_f1 - 0.2 * (2.0 * 0.2 / 1.2)).abs() < 1e-12);
        assert!((r.macro_f1 - 0.0667).abs() < 1e-4);
        assert_eq!(r.per_class[1].precision, 0.0);
        assert_eq!(r.macro_f1, r.weighted_f1);
    }

    #[test]
    fn errors() {
        let cl = classes(&["a", "b"]);
        assert!(evaluate(&["a"], &["a", "b"], &cl).is_err());
        assert!(evaluate(&["a"], &["z"], &cl).is_err());
    }
}
