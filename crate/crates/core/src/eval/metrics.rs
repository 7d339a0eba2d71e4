//! Confusion matrices and macro-averaged precision/recall/F1.

use crate::error::{Error, Result};

/// Row = gold class, column = predicted class.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub n: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn from_labels(gold: &[usize], predicted: &[usize], n: usize) -> Result<ConfusionMatrix> {
        if n < 2 {
            return Err(Error::input("need at least 2 classes"));
        }
        if gold.len() != predicted.len() {
            return Err(Error::input("gold/predicted length mismatch"));
        }
        let mut counts = vec![0u64; n * n];
        for (&g, &p) in gold.iter().zip(predicted.iter()) {
            if g >= n || p >= n {
                return Err(Error::input(format!("label outside 0..{n}")));
            }
            counts[g * n + p] += 1;
        }
        Ok(ConfusionMatrix { n, counts })
    }

    pub fn from_counts(n: usize, counts: Vec<u64>) -> Result<ConfusionMatrix> {
        if n < 2 || counts.len() != n * n {
            return Err(Error::input("bad confusion matrix shape"));
        }
        Ok(ConfusionMatrix { n, counts })
    }

    pub fn count(&self, gold: usize, predicted: usize) -> u64 {
        self.counts[gold * self.n + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn gold_count(&self, class: usize) -> u64 {
        (0..self.n).map(|p| self.count(class, p)).sum()
    }

    pub fn predicted_count(&self, class: usize) -> u64 {
        (0..self.n).map(|g| self.count(g, class)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

/// Quotient with the zero-denominator convention: 0 when the denominator is 0.
fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl MetricsReport {
    pub fn from_confusion(cm: &ConfusionMatrix) -> MetricsReport {
        let mut per_class = Vec::with_capacity(cm.n);
        for c in 0..cm.n {
            let tp = cm.count(c, c);
            let precision = ratio(tp, cm.predicted_count(c));
            let recall = ratio(tp, cm.gold_count(c));
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            per_class.push(ClassMetrics { precision, recall, f1 });
        }
        let n = cm.n as f64;
        MetricsReport {
            macro_precision: per_class.iter().map(|m| m.precision).sum::<f64>() / n,
            macro_recall: per_class.iter().map(|m| m.recall).sum::<f64>() / n,
            macro_f1: per_class.iter().map(|m| m.f1).sum::<f64>() / n,
            per_class,
        }
    }
}

/// Per-class metrics plus macro averages in one call.
pub fn compute_metrics(gold: &[usize], predicted: &[usize], n: usize) -> Result<MetricsReport> {
    Ok(MetricsReport::from_confusion(&ConfusionMatrix::from_labels(gold, predicted, n)?))
}

/// Tab-separated rows: method, class name or "macro", precision, recall, f1.
pub fn metrics_tsv(method: &str, class_names: &[String], report: &MetricsReport) -> String {
    let mut out = String::new();
    for (c, m) in report.per_class.iter().enumerate() {
        let name = class_names.get(c).map(String::as_str).unwrap_or("?");
        out.push_str(&format!(
            "{method}\t{name}\t{:.6}\t{:.6}\t{:.6}\n",
            m.precision, m.recall, m.f1
        ));
    }
    out.push_str(&format!(
        "{method}\tmacro\t{:.6}\t{:.6}\t{:.6}\n",
        report.macro_precision, report.macro_recall, report.macro_f1
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions_all_ones() {
        let r = compute_metrics(&[0, 1, 2, 1], &[0, 1, 2, 1], 3).unwrap();
        assert_eq!(r.macro_precision, 1.0);
        assert_eq!(r.macro_recall, 1.0);
        assert_eq!(r.macro_f1, 1.0);
        assert!(r.per_class.iter().all(|m| m.f1 == 1.0));
    }

    #[test]
    fn hand_computed_three_class_case() {
        let cm = ConfusionMatrix::from_counts(3, vec![2, 1, 0, 0, 3, 0, 1, 0, 3]).unwrap();
        let r = MetricsReport::from_confusion(&cm);
        assert!((r.per_class[0].precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.per_class[1].precision - 3.0 / 4.0).abs() < 1e-12);
        assert!((r.per_class[2].precision - 1.0).abs() < 1e-12);
        let macro_p = (2.0 / 3.0 + 3.0 / 4.0 + 1.0) / 3.0;
        assert!((r.macro_precision - macro_p).abs() < 1e-12);
        assert!((macro_p - 0.8056).abs() < 1e-4);
    }

    #[test]
    fn macro_is_unweighted_mean() {
        let r = compute_metrics(&[0, 0, 1], &[0, 0, 0], 2).unwrap();
        assert!((r.per_class[0].precision - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.per_class[1].precision, 0.0);
        assert!((r.macro_precision - (2.0 / 3.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_denominator_yields_zero() {
        let r = compute_metrics(&[0, 0, 1], &[0, 0, 0], 2).unwrap();
        assert_eq!(r.per_class[1].precision, 0.0);
        assert_eq!(r.per_class[1].recall, 0.0);
        assert_eq!(r.per_class[1].f1, 0.0);
    }

    #[test]
    fn out_of_range_label_rejected() {
        assert!(compute_metrics(&[0, 3], &[0, 1], 3).is_err());
        assert!(compute_metrics(&[0, 1], &[0, 5], 3).is_err());
    }

    #[test]
    fn single_class_rejected() {
        assert!(compute_metrics(&[0, 0], &[0, 0], 1).is_err());
    }

    #[test]
    fn row_sums_are_gold_counts() {
        let gold = [0, 1, 2, 1, 0, 2, 2];
        let pred = [1, 1, 2, 0, 0, 2, 1];
        let cm = ConfusionMatrix::from_labels(&gold, &pred, 3).unwrap();
        for c in 0..3 {
            let expect = gold.iter().filter(|&&g| g == c).count() as u64;
            assert_eq!(cm.gold_count(c), expect);
        }
        assert_eq!(cm.total(), gold.len() as u64);
    }

    #[test]
    fn relabeling_preserves_macro_f1() {
        let gold = [0, 1, 2, 1, 0, 2, 2, 0, 1];
        let pred = [1, 1, 2, 0, 0, 2, 1, 0, 2];
        let r1 = compute_metrics(&gold, &pred, 3).unwrap();
        let perm = [2, 0, 1];
        let gold2: Vec<usize> = gold.iter().map(|&g| perm[g]).collect();
        let pred2: Vec<usize> = pred.iter().map(|&p| perm[p]).collect();
        let r2 = compute_metrics(&gold2, &pred2, 3).unwrap();
        assert!((r1.macro_f1 - r2.macro_f1).abs() < 1e-12);
        assert!((r1.macro_precision - r2.macro_precision).abs() < 1e-12);
    }

    #[test]
    fn tsv_layout() {
        let r = compute_metrics(&[0, 1], &[0, 1], 2).unwrap();
        let names = vec!["neg".to_string(), "pos".to_string()];
        let tsv = metrics_tsv("hs", &names, &r);
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "hs\tneg\t1.000000\t1.000000\t1.000000");
        assert_eq!(lines[2], "hs\tmacro\t1.000000\t1.000000\t1.000000");
    }
}
