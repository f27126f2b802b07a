use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::{Real, CLASSES};

/// Gaussian naive Bayes. Every variance gets `var_smoothing` times the
/// largest feature variance added.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct GaussianNb<F> {
    log_prior: Vec<Option<F>>,
    mean: Vec<Vec<F>>,
    var: Vec<Vec<F>>,
}

impl<F: Real> GaussianNb<F> {
    pub fn fit(ds: &Dataset<F>, var_smoothing: f64) -> Self {
        let d = ds.width();
        let n = F::of_usize(ds.len());
        let overall = column_var(&ds.x, d);
        let max_var = overall.iter().copied().fold(F::zero(), F::max);
        let eps = if max_var > F::zero() { F::of(var_smoothing) * max_var } else { F::of(var_smoothing) };
        let counts = ds.class_counts();
        let mut log_prior = Vec::with_capacity(CLASSES);
        let mut mean = Vec::with_capacity(CLASSES);
        let mut var = Vec::with_capacity(CLASSES);
        for (c, &count) in counts.iter().enumerate() {
            let rows: Vec<Vec<F>> = ds.x.iter().zip(&ds.y).filter(|(_, &y)| y == c).map(|(r, _)| r.clone()).collect();
            if count == 0 {
                log_prior.push(None);
                mean.push(vec![F::zero(); d]);
                var.push(vec![F::one(); d]);
                continue;
            }
            log_prior.push(Some((F::of_usize(count) / n).ln()));
            let m = F::of_usize(count);
            mean.push((0..d).map(|j| rows.iter().map(|r| r[j]).sum::<F>() / m).collect());
            var.push(column_var(&rows, d).into_iter().map(|v| v + eps).collect());
        }
        GaussianNb { log_prior, mean, var }
    }

    pub fn width(&self) -> usize {
        self.mean.first().map_or(0, Vec::len)
    }

    pub fn predict_proba(&self, row: &[F]) -> Vec<F> {
        let two_pi = F::of(2.0 * std::f64::consts::PI);
        let mut z: Vec<F> = (0..CLASSES)
            .map(|c| match self.log_prior[c] {
                None => F::neg_infinity(),
                Some(lp) => {
                    lp - row
                        .iter()
                        .zip(&self.mean[c])
                        .zip(&self.var[c])
                        .map(|((x, m), v)| ((two_pi * *v).ln() + (*x - *m).powi(2) / *v) / F::of(2.0))
                        .sum::<F>()
                }
            })
            .collect();
        super::softmax(&mut z);
        z
    }
}

fn column_var<F: Real>(x: &[Vec<F>], d: usize) -> Vec<F> {
    let n = F::of_usize(x.len().max(1));
    (0..d)
        .map(|j| {
            let m = x.iter().map(|r| r[j]).sum::<F>() / n;
            x.iter().map(|r| (r[j] - m).powi(2)).sum::<F>() / n
        })
        .collect()
}
