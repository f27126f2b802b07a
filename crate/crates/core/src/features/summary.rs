use std::io::Write;

use super::FeatureMatrix;
use crate::class::Class;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Distribution of one feature within one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSummary {
    pub feature: String,
    pub class: Class,
    pub count: usize,
    pub min: f64,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
    pub max: f64,
    pub mean: f64,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Per feature × class quantiles, ordered by schema then class. Classes
/// without rows are omitted.
pub fn summarize_by_class<F: Scalar>(m: &FeatureMatrix<F>) -> Result<Vec<ClassSummary>> {
    if let Some(r) = m.rows.iter().find(|r| r.label.is_none()) {
        return Err(Error::InvalidArgument(format!("row for group {} has no label", r.group)));
    }
    let mut out = Vec::new();
    for (j, feature) in m.schema.iter().enumerate() {
        for class in Class::ALL {
            let mut xs: Vec<f64> = m
                .rows
                .iter()
                .filter(|r| r.label == Some(class))
                .map(|r| r.values[j].as_f64())
                .collect();
            if xs.is_empty() {
                continue;
            }
            xs.sort_by(f64::total_cmp);
            out.push(ClassSummary {
                feature: feature.clone(),
                class,
                count: xs.len(),
                min: xs[0],
                p25: quantile(&xs, 0.25),
                median: quantile(&xs, 0.5),
                p75: quantile(&xs, 0.75),
                max: xs[xs.len() - 1],
                mean: xs.iter().sum::<f64>() / xs.len() as f64,
            });
        }
    }
    Ok(out)
}

pub fn write_summary_csv<W: Write>(kind: impl std::fmt::Display, rows: &[ClassSummary], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["kind", "feature", "class", "count", "min", "p25", "median", "p75", "max", "mean"])?;
    for s in rows {
        w.write_record([
            kind.to_string(),
            s.feature.clone(),
            s.class.to_string(),
            s.count.to_string(),
            s.min.to_string(),
            s.p25.to_string(),
            s.median.to_string(),
            s.p75.to_string(),
            s.max.to_string(),
            s.mean.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
