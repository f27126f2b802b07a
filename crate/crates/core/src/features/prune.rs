use super::FeatureMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Pearson correlation; `None` when either column is constant.
pub fn pearson<F: Scalar>(x: &[F], y: &[F]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().map(|v| v.as_f64()).sum::<f64>() / n;
    let my = y.iter().map(|v| v.as_f64()).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a.as_f64() - mx, b.as_f64() - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneOutcome<F> {
    pub matrix: FeatureMatrix<F>,
    pub kept: Vec<String>,
    pub dropped: Vec<String>,
    /// Constant columns: kept, but correlated with nothing.
    pub constant: Vec<String>,
}

/// Greedy scan in schema order dropping every feature whose absolute
/// correlation with an already kept feature exceeds `threshold`.
pub fn prune_correlated<F: Scalar>(m: &FeatureMatrix<F>, threshold: f64) -> Result<PruneOutcome<F>> {
    if m.len() < 2 {
        return Err(Error::InvalidArgument("pruning needs at least two rows".into()));
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!("threshold {threshold} outside (0, 1]")));
    }
    let columns: Vec<Vec<F>> = (0..m.width()).map(|j| m.column(j)).collect();
    let mut kept: Vec<usize> = Vec::new();
    let (mut dropped, mut constant) = (Vec::new(), Vec::new());
    for (j, col) in columns.iter().enumerate() {
        let is_constant = col.iter().all(|v| *v == col[0]);
        if is_constant {
            constant.push(m.schema[j].clone());
            kept.push(j);
            continue;
        }
        let correlated = kept.iter().any(|&k| {
            pearson(&columns[k], col).is_some_and(|r| r.abs() > threshold)
        });
        if correlated {
            dropped.push(m.schema[j].clone());
        } else {
            kept.push(j);
        }
    }
    let kept: Vec<String> = kept.into_iter().map(|j| m.schema[j].clone()).collect();
    Ok(PruneOutcome {
        matrix: m.project(&kept)?,
        kept,
        dropped,
        constant,
    })
}
