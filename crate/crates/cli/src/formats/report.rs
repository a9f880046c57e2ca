//! Predictions TSV and evaluation report files.
//!
//! Predictions: `id<TAB>label` per line. With scores, a header line
//! `#id<TAB>label<TAB><class>...` precedes rows that append one score per
//! class. Lines starting with `#` are ignored on input.
//!
//! Report: `name<TAB>value` per line. Confusion: a header row of predicted
//! classes, then one row per gold class.

use std::path::Path;

use strkern_core::learners::Prediction;
use strkern_core::EvaluationReport;

use crate::error::{CliError, Result};
use crate::fsutil::read_to_string;

pub fn predictions_string(p: &Prediction, classes: &[String], with_scores: bool) -> String {
    let mut out = String::new();
    if with_scores {
        out.push_str("#id\tlabel");
        for c in classes {
            out.push('\t');
            out.push_str(c);
        }
        out.push('\n');
    }
    for (i, (id, label)) in p.ids.iter().zip(&p.labels).enumerate() {
        out.push_str(id);
        out.push('\t');
        out.push_str(label);
        if with_scores {
            for s in p.scores.row(i) {
                out.push('\t');
                out.push_str(&s.to_string());
            }
        }
        out.push('\n');
    }
    out
}

/// `(id, label)` pairs from a predictions file.
pub fn parse_predictions(path: &Path, content: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (no, line) in content.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut f = line.split('\t');
        match (f.next(), f.next()) {
            (Some(id), Some(label)) if !id.is_empty() && !label.is_empty() => out.push((id.to_string(), label.to_string())),
            _ => return Err(CliError::Data(format!("{}:{}: expected id<TAB>label", path.display(), no + 1))),
        }
    }
    Ok(out)
}

pub fn read_predictions(path: &Path) -> Result<Vec<(String, String)>> {
    parse_predictions(path, &read_to_string(path)?)
}

pub fn report_string(r: &EvaluationReport) -> String {
    let mut out = format!("n\t{}\naccuracy\t{}\nmacro_f1\t{}\nweighted_f1\t{}\n", r.n, r.accuracy, r.macro_f1, r.weighted_f1);
    for c in &r.per_class {
        out.push_str(&format!(
            "precision:{0}\t{1}\nrecall:{0}\t{2}\nf1:{0}\t{3}\nsupport:{0}\t{4}\n",
            c.class, c.precision, c.recall, c.f1, c.support
        ));
    }
    out
}

pub fn confusion_string(r: &EvaluationReport) -> String {
    let mut out = String::from("gold\\predicted");
    for c in &r.classes {
        out.push('\t');
        out.push_str(c);
    }
    out.push('\n');
    for (c, row) in r.classes.iter().zip(&r.confusion) {
        out.push_str(c);
        for v in row {
            out.push('\t');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

/// Reads `name<TAB>value` lines back, e.g. to compare runs.
pub fn parse_report(content: &str) -> Vec<(String, String)> {
    content.lines().filter_map(|l| l.split_once('\t')).map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use strkern_core::metrics::evaluate;
    use strkern_core::Matrix;

    #[test]
    fn predictions_round_trip() {
        let p = Prediction {
            ids: vec!["a".into(), "b".into()],
            scores: Matrix::from_rows(&[[0.5, -0.5], [-0.25, 0.75]]).unwrap(),
            labels: vec!["x".into(), "y".into()],
        };
        let classes = vec!["x".to_string(), "y".to_string()];
        let with = predictions_string(&p, &classes, true);
        assert!(with.starts_with("#id\tlabel\tx\ty\n"));
        assert!(with.contains("b\ty\t-0.25\t0.75\n"));
        let path = Path::new("p.tsv");
        let want = vec![("a".to_string(), "x".to_string()), ("b".to_string(), "y".to_string())];
        assert_eq!(parse_predictions(path, &with).unwrap(), want);
        assert_eq!(parse_predictions(path, &predictions_string(&p, &classes, false)).unwrap(), want);
        assert!(parse_predictions(path, "a\n").is_err());
    }

    #[test]
    fn report_lines() {
        let classes = vec!["A".to_string(), "B".to_string()];
        let r = evaluate(&["A", "A", "B", "B"], &["A", "B", "B", "B"], &classes).unwrap();
        let text = report_string(&r);
        let kv = parse_report(&text);
        assert_eq!(kv[0], ("n".into(), "4".into()));
        assert_eq!(kv[1], ("accuracy".into(), "0.75".into()));
        assert!(kv.iter().any(|(k, v)| k == "support:B" && v == "2"));
        assert_eq!(confusion_string(&r), "gold\\predicted\tA\tB\nA\t1\t1\nB\t0\t2\n");
    }
}
