use serde::{Deserialize, Serialize};

use super::{softmax, Scaler};
use crate::optim::lbfgs;
use crate::{Real, CLASSES};

/// Multinomial logistic regression with an L2 penalty of strength `1/C`
/// on the standardized weights; intercepts are not penalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct LogisticRegression<F> {
    scaler: Scaler<F>,
    /// `CLASSES` rows of `width` weights.
    weights: Vec<Vec<F>>,
    intercept: Vec<F>,
}

impl<F: Real> LogisticRegression<F> {
    pub fn fit(x: &[Vec<F>], y: &[usize], c: f64) -> Self {
        let scaler = Scaler::fit(x);
        let xs = scaler.transform_all(x);
        let d = scaler.width();
        let k = CLASSES;
        let n = F::of_usize(xs.len().max(1));
        let penalty = F::one() / (F::of(c) * n);
        let objective = |theta: &[F], grad: &mut [F]| -> F {
            grad.iter_mut().for_each(|g| *g = F::zero());
            let mut loss = F::zero();
            let mut z = vec![F::zero(); k];
            for (row, &label) in xs.iter().zip(y) {
                for (c, zc) in z.iter_mut().enumerate() {
                    let w = &theta[c * d..(c + 1) * d];
                    *zc = theta[k * d + c] + w.iter().zip(row).map(|(a, b)| *a * *b).sum::<F>();
                }
                let m = z.iter().copied().fold(F::neg_infinity(), F::max);
                let lse = m + z.iter().map(|v| (*v - m).exp()).sum::<F>().ln();
                loss += lse - z[label];
                for c in 0..k {
                    let r = ((z[c] - lse).exp() - if c == label { F::one() } else { F::zero() }) / n;
                    for j in 0..d {
                        grad[c * d + j] += r * row[j];
                    }
                    grad[k * d + c] += r;
                }
            }
            loss /= n;
            for i in 0..k * d {
                loss += penalty * theta[i] * theta[i] / F::of(2.0);
                grad[i] += penalty * theta[i];
            }
            loss
        };
        let theta = lbfgs(objective, vec![F::zero(); k * d + k], 500, 1e-7);
        LogisticRegression {
            scaler,
            weights: (0..k).map(|c| theta[c * d..(c + 1) * d].to_vec()).collect(),
            intercept: theta[k * d..].to_vec(),
        }
    }

    pub fn width(&self) -> usize {
        self.scaler.width()
    }

    pub fn predict_proba(&self, row: &[F]) -> Vec<F> {
        let xs = self.scaler.transform(row);
        let mut z: Vec<F> = self
            .weights
            .iter()
            .zip(&self.intercept)
            .map(|(w, b)| *b + w.iter().zip(&xs).map(|(a, v)| *a * *v).sum::<F>())
            .collect();
        softmax(&mut z);
        z
    }
}
