use std::fmt;
use std::io::Write;

use actortrace_core::Class;

use crate::error::{LearnError, Result};
use crate::{Real, CLASSES};

/// Classification quality; rows of `confusion` are true classes.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvalReport {
    pub balanced_accuracy: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub confusion: [[usize; CLASSES]; CLASSES],
    pub per_fold: Vec<f64>,
}

impl EvalReport {
    pub fn new(y_true: &[usize], y_pred: &[usize], per_fold: Vec<f64>) -> Result<Self> {
        if y_true.is_empty() {
            return Err(LearnError::Empty);
        }
        if y_true.len() != y_pred.len() {
            return Err(LearnError::InvalidArgument("prediction count differs from label count".into()));
        }
        let mut confusion = [[0usize; CLASSES]; CLASSES];
        for (&t, &p) in y_true.iter().zip(y_pred) {
            confusion[t][p] += 1;
        }
        let n = y_true.len() as f64;
        let (mut recall_sum, mut present) = (0.0, 0usize);
        let (mut wp, mut wr) = (0.0, 0.0);
        for (c, row) in confusion.iter().enumerate() {
            let support: usize = row.iter().sum();
            if support == 0 {
                continue;
            }
            let predicted: usize = (0..CLASSES).map(|t| confusion[t][c]).sum();
            let tp = row[c] as f64;
            let recall = tp / support as f64;
            let precision = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
            recall_sum += recall;
            present += 1;
            wp += support as f64 / n * precision;
            wr += support as f64 / n * recall;
        }
        Ok(EvalReport {
            balanced_accuracy: recall_sum / present as f64,
            weighted_precision: wp,
            weighted_recall: wr,
            confusion,
            per_fold,
        })
    }

    pub fn support(&self, class: Class) -> usize {
        self.confusion[class.index()].iter().sum()
    }

    /// `metric,value` lines followed by the confusion matrix.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "metric,value")?;
        writeln!(w, "balanced_accuracy,{}", self.balanced_accuracy)?;
        writeln!(w, "weighted_precision,{}", self.weighted_precision)?;
        writeln!(w, "weighted_recall,{}", self.weighted_recall)?;
        for (i, s) in self.per_fold.iter().enumerate() {
            writeln!(w, "fold_{i}_balanced_accuracy,{s}")?;
        }
        for t in Class::ALL {
            for p in Class::ALL {
                writeln!(w, "confusion_{t}_{p},{}", self.confusion[t.index()][p.index()])?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<20} {:>9}", "Metric", "Value")?;
        writeln!(f, "{:<20} {:>9.4}", "Accuracy", self.balanced_accuracy)?;
        writeln!(f, "{:<20} {:>9.4}", "Weighted precision", self.weighted_precision)?;
        writeln!(f, "{:<20} {:>9.4}", "Weighted recall", self.weighted_recall)?;
        if !self.per_fold.is_empty() {
            let folds: Vec<String> = self.per_fold.iter().map(|s| format!("{s:.3}")).collect();
            writeln!(f, "{:<20} {}", "Per fold", folds.join(" "))?;
        }
        writeln!(f)?;
        write!(f, "{:<10}", "true\\pred")?;
        for c in Class::ALL {
            write!(f, " {:>9}", c.name())?;
        }
        writeln!(f)?;
        for t in Class::ALL {
            write!(f, "{:<10}", t.name())?;
            for p in Class::ALL {
                write!(f, " {:>9}", self.confusion[t.index()][p.index()])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Index of the largest entry; the first wins ties.
pub fn argmax<F: Real>(p: &[F]) -> usize {
    let mut best = 0;
    for (i, v) in p.iter().enumerate() {
        if *v > p[best] {
            best = i;
        }
    }
    best
}

/// Balanced accuracy of argmax predictions.
pub fn balanced_accuracy<F: Real>(y: &[usize], proba: &[Vec<F>]) -> f64 {
    let pred: Vec<usize> = proba.iter().map(|p| argmax(p)).collect();
    EvalReport::new(y, &pred, Vec::new()).map_or(0.0, |r| r.balanced_accuracy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recalls_average() {
        // recalls 1.0, 0.5, 0.75
        let y = [0, 0, 1, 1, 2, 2, 2, 2];
        let p = [0, 0, 1, 0, 2, 2, 2, 1];
        let r = EvalReport::new(&y, &p, vec![]).unwrap();
        assert!((r.balanced_accuracy - 0.75).abs() < 1e-12);
        for c in Class::ALL {
            let row: usize = r.confusion[c.index()].iter().sum();
            assert_eq!(row, y.iter().filter(|&&t| t == c.index()).count());
        }
    }

    #[test]
    fn perfect_and_constant() {
        let y = [0, 1, 2, 0, 1, 2];
        let r = EvalReport::new(&y, &y, vec![]).unwrap();
        assert_eq!((r.balanced_accuracy, r.weighted_precision, r.weighted_recall), (1.0, 1.0, 1.0));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(r.confusion[i][j] > 0, i == j);
            }
        }
        let r = EvalReport::new(&y, &[1; 6], vec![]).unwrap();
        assert!((r.balanced_accuracy - 1.0 / 3.0).abs() < 1e-12);
        assert!(EvalReport::new(&[], &[], vec![]).is_err());
    }

    #[test]
    fn weighted_precision_uses_support() {
        let y = [0, 0, 0, 1];
        let p = [0, 0, 1, 1];
        let r = EvalReport::new(&y, &p, vec![]).unwrap();
        // precision 1.0 (class 0) and 0.5 (class 1)
        assert!((r.weighted_precision - (0.75 * 1.0 + 0.25 * 0.5)).abs() < 1e-12);
        assert!((r.weighted_recall - 0.75).abs() < 1e-12);
    }
}
