use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{LogisticRegression, Scaler};
use crate::data::Dataset;
use crate::optim::lbfgs;
use crate::{Real, CLASSES};

const CALIBRATION_FOLDS: usize = 3;

/// One-vs-rest linear SVM (squared hinge) whose decision values are mapped
/// to probabilities by a logistic model fitted on out-of-fold decisions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct LinearSvm<F> {
    scaler: Scaler<F>,
    /// Per class: weights then bias.
    planes: Vec<Vec<F>>,
    calibration: LogisticRegression<F>,
}

fn fit_planes<F: Real>(x: &[Vec<F>], y: &[usize], c: f64) -> Vec<Vec<F>> {
    let d = x.first().map_or(0, Vec::len);
    let n = F::of_usize(x.len().max(1));
    let penalty = F::one() / (F::of(c) * n);
    (0..CLASSES)
        .map(|class| {
            let sign: Vec<F> = y.iter().map(|&l| if l == class { F::one() } else { -F::one() }).collect();
            let objective = |theta: &[F], grad: &mut [F]| -> F {
                let mut loss = F::zero();
                for j in 0..d {
                    loss += penalty * theta[j] * theta[j] / F::of(2.0);
                    grad[j] = penalty * theta[j];
                }
                grad[d] = F::zero();
                for (row, &s) in x.iter().zip(&sign) {
                    let f = theta[d] + theta[..d].iter().zip(row).map(|(a, b)| *a * *b).sum::<F>();
                    let slack = F::one() - s * f;
                    if slack > F::zero() {
                        loss += slack * slack / n;
                        let g = -F::of(2.0) * slack * s / n;
                        for j in 0..d {
                            grad[j] += g * row[j];
                        }
                        grad[d] += g;
                    }
                }
                loss
            };
            lbfgs(objective, vec![F::zero(); d + 1], 500, 1e-7)
        })
        .collect()
}

fn decision<F: Real>(planes: &[Vec<F>], xs: &[F]) -> Vec<F> {
    planes
        .iter()
        .map(|p| {
            let d = xs.len();
            p[d] + p[..d].iter().zip(xs).map(|(a, b)| *a * *b).sum::<F>()
        })
        .collect()
}

impl<F: Real> LinearSvm<F> {
    pub fn fit(ds: &Dataset<F>, c: f64, seed: u64) -> Self {
        let scaler = Scaler::fit(&ds.x);
        let xs = scaler.transform_all(&ds.x);
        let n = ds.len();

        // stratified internal folds for the calibration data
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fold = vec![0; n];
        let mut next = 0;
        for class in 0..CLASSES {
            let mut rows: Vec<usize> = (0..n).filter(|&i| ds.y[i] == class).collect();
            rows.shuffle(&mut rng);
            for i in rows {
                fold[i] = next % CALIBRATION_FOLDS;
                next += 1;
            }
        }
        let mut oof = vec![Vec::new(); n];
        for f in 0..CALIBRATION_FOLDS {
            let train: Vec<usize> = (0..n).filter(|&i| fold[i] != f).collect();
            let tx: Vec<Vec<F>> = train.iter().map(|&i| xs[i].clone()).collect();
            let ty: Vec<usize> = train.iter().map(|&i| ds.y[i]).collect();
            let planes = fit_planes(&tx, &ty, c);
            for i in (0..n).filter(|&i| fold[i] == f) {
                oof[i] = decision(&planes, &xs[i]);
            }
        }
        let calibration = LogisticRegression::fit(&oof, &ds.y, 1.0);
        let planes = fit_planes(&xs, &ds.y, c);
        LinearSvm { scaler, planes, calibration }
    }

    pub fn width(&self) -> usize {
        self.scaler.width()
    }

    pub fn predict_proba(&self, row: &[F]) -> Vec<F> {
        self.calibration.predict_proba(&decision(&self.planes, &self.scaler.transform(row)))
    }
}
