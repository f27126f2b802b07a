//! Human-readable tables of a training run.

use std::fmt::Write as _;

use actortrace_core::actorgraph::GraphKind;
use actortrace_learn::{BaseKind, EvalReport, TrainingReport};

/// Base classifier CV scores (rows) per view (columns), then stacked,
/// fused and held-out scores.
pub fn render(report: &TrainingReport, test: Option<&EvalReport>) -> String {
    let mut s = String::new();
    let kinds: Vec<&str> = GraphKind::EGO.iter().map(|k| k.name()).filter(|k| report.base_scores.contains_key(*k)).collect();

    let _ = writeln!(s, "Cross-validated balanced accuracy per view");
    let _ = write!(s, "{:<22}", "Classifier");
    for k in &kinds {
        let _ = write!(s, " {k:>11}");
    }
    let _ = writeln!(s);
    for b in BaseKind::ALL {
        let row: Vec<Option<f64>> = kinds
            .iter()
            .map(|k| report.base_scores[*k].iter().find(|(n, _)| n == b.name()).map(|(_, v)| *v))
            .collect();
        if row.iter().all(Option::is_none) {
            continue;
        }
        let _ = write!(s, "{:<22}", b.name());
        for v in row {
            match v {
                Some(v) => {
                    let _ = write!(s, " {v:>11.4}");
                }
                None => {
                    let _ = write!(s, " {:>11}", "-");
                }
            }
        }
        let _ = writeln!(s);
    }
    let _ = write!(s, "{:<22}", "stacked");
    for k in &kinds {
        let _ = write!(s, " {:>11.4}", report.stacked_scores.get(*k).copied().unwrap_or(f64::NAN));
    }
    let _ = writeln!(s);
    let _ = writeln!(s);
    let _ = writeln!(s, "Best single classifier CV: {:.4}", report.best_base_score());
    let _ = writeln!(s, "Best stacked view CV:      {:.4}", report.best_stacked_score());
    let _ = writeln!(s, "Groups with imputed views: {}", report.imputed_groups);
    let _ = writeln!(s);
    let _ = writeln!(s, "Stacking-bagging, cross-validated");
    let _ = writeln!(s, "{}", report.final_cv);
    if let Some(t) = test {
        let _ = writeln!(s, "Stacking-bagging, held-out test set");
        let _ = writeln!(s, "{t}");
    }
    s
}
