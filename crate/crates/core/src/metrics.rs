//! Confusion matrices, per-class precision/recall/F1, and the
//! support-weighted aggregates used in the result tables.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// K x K counts; rows are true classes, columns are predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().map(|row| row.iter().sum::<usize>()).sum()
    }

    pub fn row_sum(&self, c: usize) -> usize {
        self.counts[c].iter().sum()
    }

    pub fn col_sum(&self, c: usize) -> usize {
        self.counts.iter().map(|row| row[c]).sum()
    }
}

/// Builds a confusion matrix from parallel label slices.
pub fn confusion_matrix(
    true_labels: &[usize],
    predicted_labels: &[usize],
    num_classes: usize,
) -> Result<ConfusionMatrix> {
    if true_labels.len() != predicted_labels.len() {
        return Err(CoreError::InvalidArgument(format!(
            "label slices differ in length: {} vs {}",
            true_labels.len(),
            predicted_labels.len()
        )));
    }
    if num_classes == 0 {
        return Err(CoreError::InvalidArgument("num_classes must be >= 1".into()));
    }
    let mut counts = vec![vec![0usize; num_classes]; num_classes];
    for (&t, &p) in true_labels.iter().zip(predicted_labels) {
        if t >= num_classes || p >= num_classes {
            return Err(CoreError::InvalidArgument(format!(
                "label out of range: true {t}, predicted {p}, num_classes {num_classes}"
            )));
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

/// Per-class and aggregate metrics for one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub per_class_precision: Vec<f64>,
    pub per_class_recall: Vec<f64>,
    pub per_class_f1: Vec<f64>,
    pub supports: Vec<usize>,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub total: usize,
}

/// Computes all metrics from a confusion matrix. Undefined ratios (empty
/// predicted column or empty true row) are reported as 0, which keeps the
/// support-weighted aggregates defined for every matrix.
pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let k = cm.num_classes();
    if k == 0 {
        return Err(CoreError::InvalidArgument("empty confusion matrix".into()));
    }
    for row in &cm.counts {
        if row.len() != k {
            return Err(CoreError::ShapeMismatch {
                expected: format!("{k}x{k}"),
                actual: format!("{k}x{}", row.len()),
            });
        }
    }
    let total = cm.total();
    if total == 0 {
        return Err(CoreError::InvalidArgument("confusion matrix has no samples".into()));
    }

    let mut precision = vec![0.0; k];
    let mut recall = vec![0.0; k];
    let mut f1 = vec![0.0; k];
    let mut supports = vec![0usize; k];
    let mut trace = 0usize;

    for c in 0..k {
        let tp = cm.counts[c][c];
        trace += tp;
        let col = cm.col_sum(c);
        let row = cm.row_sum(c);
        supports[c] = row;
        precision[c] = if col > 0 { tp as f64 / col as f64 } else { 0.0 };
        recall[c] = if row > 0 { tp as f64 / row as f64 } else { 0.0 };
        let denom = precision[c] + recall[c];
        f1[c] = if denom > 0.0 { 2.0 * precision[c] * recall[c] / denom } else { 0.0 };
    }

    let accuracy = trace as f64 / total as f64;
    let weight = |values: &[f64]| -> f64 {
        values
            .iter()
            .zip(&supports)
            .map(|(&v, &s)| v * s as f64)
            .sum::<f64>()
            / total as f64
    };

    Ok(MetricsReport {
        accuracy,
        weighted_precision: weight(&precision),
        weighted_recall: weight(&recall),
        weighted_f1: weight(&f1),
        per_class_precision: precision,
        per_class_recall: recall,
        per_class_f1: f1,
        supports,
        total,
    })
}

/// Renders one or more reports as a plain-text table: one row per class per
/// model, weighted aggregates and accuracy per block, best accuracy flagged
/// when several reports are given.
pub fn render_report(
    reports: &[(String, MetricsReport)],
    class_names: &[String],
) -> Result<String> {
    if reports.is_empty() {
        return Err(CoreError::InvalidArgument("no reports to render".into()));
    }
    if class_names.is_empty() {
        return Err(CoreError::InvalidArgument("class name list is empty".into()));
    }
    for (name, report) in reports {
        if report.per_class_precision.len() != class_names.len() {
            return Err(CoreError::ShapeMismatch {
                expected: format!("{} classes", class_names.len()),
                actual: format!("{} in report `{name}`", report.per_class_precision.len()),
            });
        }
    }

    let best = reports
        .iter()
        .enumerate()
        .max_by(|a, b| {
            a.1 .1
                .accuracy
                .partial_cmp(&b.1 .1.accuracy)
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .map(|(i, _)| i)
        .unwrap_or(0);

    let name_width = class_names.iter().map(|n| n.len()).max().unwrap_or(5).max(12);
    let mut out = String::new();
    for (i, (model, report)) in reports.iter().enumerate() {
        let flag = if reports.len() > 1 && i == best { "  <- best accuracy" } else { "" };
        out.push_str(&format!("model: {model}{flag}\n"));
        out.push_str(&format!(
            "{:<name_width$}  {:>9}  {:>9}  {:>9}  {:>8}\n",
            "class", "precision", "recall", "f1-score", "support"
        ));
        for (c, class_name) in class_names.iter().enumerate() {
            out.push_str(&format!(
                "{:<name_width$}  {:>9.2}  {:>9.2}  {:>9.2}  {:>8}\n",
                class_name,
                report.per_class_precision[c],
                report.per_class_recall[c],
                report.per_class_f1[c],
                report.supports[c]
            ));
        }
        out.push_str(&format!(
            "{:<name_width$}  {:>9.2}  {:>9.2}  {:>9.2}  {:>8}\n",
            "weighted avg",
            report.weighted_precision,
            report.weighted_recall,
            report.weighted_f1,
            report.total
        ));
        out.push_str(&format!("accuracy: {:.4}\n", report.accuracy));
        if i + 1 < reports.len() {
            out.push('\n');
        }
    }
    Ok(out)
}

/// Renders reports as comma-separated values with one row per (model, class).
pub fn render_report_csv(
    reports: &[(String, MetricsReport)],
    class_names: &[String],
) -> Result<String> {
    if reports.is_empty() || class_names.is_empty() {
        return Err(CoreError::InvalidArgument("nothing to render".into()));
    }
    let mut out = String::from("model,class,precision,recall,f1,support,accuracy\n");
    for (model, report) in reports {
        for (c, class_name) in class_names.iter().enumerate() {
            out.push_str(&format!(
                "{model},{class_name},{},{},{},{},{}\n",
                report.per_class_precision[c],
                report.per_class_recall[c],
                report.per_class_f1[c],
                report.supports[c],
                report.accuracy
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions_are_diagonal() {
        let t = [0, 1, 2, 1, 0];
        let cm = confusion_matrix(&t, &t, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(cm.counts[i][j], 0);
                }
            }
        }
        let report = compute_metrics(&cm).unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert!(report.per_class_f1.iter().all(|&v| v == 1.0));
        assert_eq!(report.weighted_f1, 1.0);
    }

    #[test]
    fn single_column_when_one_class_predicted() {
        let t = [0, 1, 2, 2];
        let p = [1, 1, 1, 1];
        let cm = confusion_matrix(&t, &p, 3).unwrap();
        assert_eq!(cm.col_sum(1), 4);
        assert_eq!(cm.col_sum(0), 0);
        assert_eq!(cm.col_sum(2), 0);
    }

    #[test]
    fn two_class_hand_oracle() {
        // cm = [[8, 2], [1, 9]]:
        //   accuracy = 17/20 = 0.85
        //   precision_0 = 8/9, recall_0 = 8/10, f1_0 = 2*(8/9)(8/10)/((8/9)+(8/10))
        //   precision_1 = 9/11, recall_1 = 9/10
        let cm = ConfusionMatrix { counts: vec![vec![8, 2], vec![1, 9]] };
        let r = compute_metrics(&cm).unwrap();
        assert!((r.accuracy - 0.85).abs() < 1e-15);
        let p0: f64 = 8.0 / 9.0;
        let rec0 = 0.8;
        let f1_0 = 2.0 * p0 * rec0 / (p0 + rec0);
        assert!((r.per_class_f1[0] - f1_0).abs() < 1e-12);
        assert!((r.per_class_f1[0] - 0.8421052631578947).abs() < 1e-12);
        assert!((r.per_class_f1[1] - 0.8571428571428571).abs() < 1e-12);
        assert!((r.weighted_f1 - (10.0 * f1_0 + 10.0 * r.per_class_f1[1]) / 20.0).abs() < 1e-12);
        assert!((r.weighted_f1 - 0.849624060150376).abs() < 1e-12);
        assert!((r.weighted_precision - 0.8535353535353535).abs() < 1e-12);
        assert!((r.weighted_recall - 0.85).abs() < 1e-15);
    }

    #[test]
    fn weighted_recall_equals_accuracy() {
        // Single-label identity: sum_c support_c * (tp_c / support_c) = trace.
        let cm = ConfusionMatrix {
            counts: vec![vec![5, 1, 0], vec![2, 7, 3], vec![0, 0, 4]],
        };
        let r = compute_metrics(&cm).unwrap();
        assert!((r.weighted_recall - r.accuracy).abs() < 1e-15);
    }

    #[test]
    fn zero_division_reports_zero() {
        // Class 2 never predicted and never true: precision, recall, f1 = 0.
        let cm = ConfusionMatrix {
            counts: vec![vec![3, 0, 0], vec![0, 2, 0], vec![0, 0, 0]],
        };
        let r = compute_metrics(&cm).unwrap();
        assert_eq!(r.per_class_precision[2], 0.0);
        assert_eq!(r.per_class_recall[2], 0.0);
        assert_eq!(r.per_class_f1[2], 0.0);
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn brute_force_agreement_on_random_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(99);
        for _ in 0..100 {
            let k = rng.gen_range(2..=6);
            let n = rng.gen_range(k..=500);
            let t: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
            let p: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
            let cm = confusion_matrix(&t, &p, k).unwrap();
            let r = compute_metrics(&cm).unwrap();

            // Independent tally from raw labels.
            let mut correct = 0;
            for (&a, &b) in t.iter().zip(&p) {
                if a == b {
                    correct += 1;
                }
            }
            assert!((r.accuracy - correct as f64 / n as f64).abs() < 1e-9);
            assert!((r.weighted_recall - r.accuracy).abs() < 1e-9);

            for c in 0..k {
                let tp = t.iter().zip(&p).filter(|&(&a, &b)| a == c && b == c).count();
                let pred_c = p.iter().filter(|&&b| b == c).count();
                let true_c = t.iter().filter(|&&a| a == c).count();
                let prec = if pred_c > 0 { tp as f64 / pred_c as f64 } else { 0.0 };
                let rec = if true_c > 0 { tp as f64 / true_c as f64 } else { 0.0 };
                assert!((r.per_class_precision[c] - prec).abs() < 1e-9);
                assert!((r.per_class_recall[c] - rec).abs() < 1e-9);
                assert!(r.per_class_f1[c] >= 0.0 && r.per_class_f1[c] <= 1.0);
            }
        }
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(confusion_matrix(&[0, 1], &[0], 2).is_err());
    }

    #[test]
    fn out_of_range_label_rejected() {
        assert!(confusion_matrix(&[0, 3], &[0, 1], 3).is_err());
    }

    #[test]
    fn rendered_table_flags_best() {
        let cm_good = ConfusionMatrix { counts: vec![vec![10, 0], vec![0, 10]] };
        let cm_bad = ConfusionMatrix { counts: vec![vec![6, 4], vec![5, 5]] };
        let reports = vec![
            ("weak".to_string(), compute_metrics(&cm_bad).unwrap()),
            ("strong".to_string(), compute_metrics(&cm_good).unwrap()),
        ];
        let names = vec!["alpha".to_string(), "beta".to_string()];
        let text = render_report(&reports, &names).unwrap();
        assert!(text.contains("model: strong  <- best accuracy"), "{text}");
        assert!(text.contains("weighted avg"));
        let blocks = text.matches("model:").count();
        assert_eq!(blocks, 2);
    }

    #[test]
    fn empty_class_names_rejected() {
        let cm = ConfusionMatrix { counts: vec![vec![1]] };
        let reports = vec![("m".to_string(), compute_metrics(&cm).unwrap())];
        assert!(render_report(&reports, &[]).is_err());
    }
}
