//! The base classifiers, their hyperparameter grids and shared helpers.

mod adaboost;
mod boosting;
mod forest;
mod logistic;
mod naive_bayes;
mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use adaboost::AdaBoost;
pub use boosting::GradientBoosting;
pub use forest::RandomForest;
pub use logistic::LogisticRegression;
pub use naive_bayes::GaussianNb;
pub use svm::LinearSvm;

use crate::data::Dataset;
use crate::error::{LearnError, Result};
use crate::{Real, CLASSES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseKind {
    NaiveBayes,
    #[serde(rename = "logistic_regression")]
    Logistic,
    RandomForest,
    GradientBoosting,
    #[serde(rename = "adaboost")]
    AdaBoost,
    Svm,
}

impl BaseKind {
    pub const ALL: [BaseKind; 6] = [
        BaseKind::NaiveBayes,
        BaseKind::Logistic,
        BaseKind::RandomForest,
        BaseKind::GradientBoosting,
        BaseKind::AdaBoost,
        BaseKind::Svm,
    ];

    /// The members every trained bundle must contain.
    pub const MANDATORY: [BaseKind; 3] = [BaseKind::NaiveBayes, BaseKind::Logistic, BaseKind::RandomForest];

    pub fn name(self) -> &'static str {
        match self {
            BaseKind::NaiveBayes => "naive_bayes",
            BaseKind::Logistic => "logistic_regression",
            BaseKind::RandomForest => "random_forest",
            BaseKind::GradientBoosting => "gradient_boosting",
            BaseKind::AdaBoost => "adaboost",
            BaseKind::Svm => "svm",
        }
    }

    /// Hyperparameter grid searched under cross-validation.
    pub fn grid(self) -> Vec<Params> {
        match self {
            BaseKind::NaiveBayes => {
                [1e-9, 1e-6, 1e-3].into_iter().map(|var_smoothing| Params::NaiveBayes { var_smoothing }).collect()
            }
            BaseKind::Logistic => [0.1, 1.0, 10.0].into_iter().map(|c| Params::Logistic { c }).collect(),
            BaseKind::RandomForest => [50, 100]
                .into_iter()
                .flat_map(|trees| [None, Some(6)].into_iter().map(move |max_depth| Params::RandomForest { trees, max_depth }))
                .collect(),
            BaseKind::GradientBoosting => [50, 100]
                .into_iter()
                .flat_map(|stages| {
                    [2, 3].into_iter().map(move |max_depth| Params::GradientBoosting {
                        stages,
                        max_depth,
                        learning_rate: 0.1,
                    })
                })
                .collect(),
            BaseKind::AdaBoost => [1, 2]
                .into_iter()
                .flat_map(|max_depth| {
                    [0.5, 1.0].into_iter().map(move |learning_rate| Params::AdaBoost {
                        rounds: 50,
                        max_depth,
                        learning_rate,
                    })
                })
                .collect(),
            BaseKind::Svm => [0.1, 1.0, 10.0].into_iter().map(|c| Params::Svm { c }).collect(),
        }
    }
}

impl fmt::Display for BaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaseKind {
    type Err = LearnError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        let alias = match norm.as_str() {
            "nb" => "naive_bayes",
            "lr" | "logistic" => "logistic_regression",
            "rf" => "random_forest",
            "gb" => "gradient_boosting",
            "ada" => "adaboost",
            other => other,
        };
        BaseKind::ALL
            .into_iter()
            .find(|k| k.name() == alias)
            .ok_or_else(|| LearnError::InvalidArgument(format!("unknown base classifier {s:?}")))
    }
}

/// One point of a hyperparameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Params {
    NaiveBayes { var_smoothing: f64 },
    Logistic { c: f64 },
    RandomForest { trees: usize, max_depth: Option<usize> },
    GradientBoosting { stages: usize, max_depth: usize, learning_rate: f64 },
    AdaBoost { rounds: usize, max_depth: usize, learning_rate: f64 },
    Svm { c: f64 },
}

impl Params {
    pub fn kind(&self) -> BaseKind {
        match self {
            Params::NaiveBayes { .. } => BaseKind::NaiveBayes,
            Params::Logistic { .. } => BaseKind::Logistic,
            Params::RandomForest { .. } => BaseKind::RandomForest,
            Params::GradientBoosting { .. } => BaseKind::GradientBoosting,
            Params::AdaBoost { .. } => BaseKind::AdaBoost,
            Params::Svm { .. } => BaseKind::Svm,
        }
    }
}

/// A fitted base classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "fit", rename_all = "snake_case", bound = "F: Real")]
pub enum BaseModel<F> {
    NaiveBayes(GaussianNb<F>),
    Logistic(LogisticRegression<F>),
    RandomForest(RandomForest<F>),
    GradientBoosting(GradientBoosting<F>),
    AdaBoost(AdaBoost<F>),
    Svm(LinearSvm<F>),
}

impl<F: Real> BaseModel<F> {
    pub fn fit(params: &Params, ds: &Dataset<F>, seed: u64) -> Result<Self> {
        ds.check_trainable()?;
        Ok(match *params {
            Params::NaiveBayes { var_smoothing } => BaseModel::NaiveBayes(GaussianNb::fit(ds, var_smoothing)),
            Params::Logistic { c } => BaseModel::Logistic(LogisticRegression::fit(&ds.x, &ds.y, c)),
            Params::RandomForest { trees, max_depth } => {
                BaseModel::RandomForest(RandomForest::fit(ds, trees, max_depth, seed))
            }
            Params::GradientBoosting { stages, max_depth, learning_rate } => {
                BaseModel::GradientBoosting(GradientBoosting::fit(ds, stages, max_depth, learning_rate, seed))
            }
            Params::AdaBoost { rounds, max_depth, learning_rate } => {
                BaseModel::AdaBoost(AdaBoost::fit(ds, rounds, max_depth, learning_rate, seed))
            }
            Params::Svm { c } => BaseModel::Svm(LinearSvm::fit(ds, c, seed)),
        })
    }

    pub fn kind(&self) -> BaseKind {
        match self {
            BaseModel::NaiveBayes(_) => BaseKind::NaiveBayes,
            BaseModel::Logistic(_) => BaseKind::Logistic,
            BaseModel::RandomForest(_) => BaseKind::RandomForest,
            BaseModel::GradientBoosting(_) => BaseKind::GradientBoosting,
            BaseModel::AdaBoost(_) => BaseKind::AdaBoost,
            BaseModel::Svm(_) => BaseKind::Svm,
        }
    }

    /// Expected feature width.
    pub fn width(&self) -> usize {
        match self {
            BaseModel::NaiveBayes(m) => m.width(),
            BaseModel::Logistic(m) => m.width(),
            BaseModel::RandomForest(m) => m.width(),
            BaseModel::GradientBoosting(m) => m.width(),
            BaseModel::AdaBoost(m) => m.width(),
            BaseModel::Svm(m) => m.width(),
        }
    }

    /// Class probabilities in [`actortrace_core::Class`] order.
    pub fn predict_proba(&self, row: &[F]) -> Vec<F> {
        match self {
            BaseModel::NaiveBayes(m) => m.predict_proba(row),
            BaseModel::Logistic(m) => m.predict_proba(row),
            BaseModel::RandomForest(m) => m.predict_proba(row),
            BaseModel::GradientBoosting(m) => m.predict_proba(row),
            BaseModel::AdaBoost(m) => m.predict_proba(row),
            BaseModel::Svm(m) => m.predict_proba(row),
        }
    }

    pub fn check_width(&self, row: &[F]) -> Result<()> {
        if row.len() != self.width() {
            return Err(LearnError::Width { expected: self.width(), got: row.len() });
        }
        Ok(())
    }
}

/// Softmax of `z` in place, shifted by the maximum for stability.
pub(crate) fn softmax<F: Real>(z: &mut [F]) {
    let m = z.iter().copied().fold(F::neg_infinity(), F::max);
    if !m.is_finite() {
        let n = F::of_usize(z.len());
        z.iter_mut().for_each(|v| *v = F::one() / n);
        return;
    }
    let mut s = F::zero();
    for v in z.iter_mut() {
        *v = (*v - m).exp();
        s += *v;
    }
    z.iter_mut().for_each(|v| *v /= s);
}

/// Column standardization; zero-variance columns keep unit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct Scaler<F> {
    mean: Vec<F>,
    scale: Vec<F>,
}

impl<F: Real> Scaler<F> {
    pub fn fit(x: &[Vec<F>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n = F::of_usize(x.len().max(1));
        let mean: Vec<F> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<F>() / n).collect();
        let scale = (0..d)
            .map(|j| {
                let var = x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<F>() / n;
                let sd = var.sqrt();
                if sd > F::of(1e-12) * (F::one() + mean[j].abs()) {
                    sd
                } else {
                    F::one()
                }
            })
            .collect();
        Scaler { mean, scale }
    }

    pub fn transform(&self, row: &[F]) -> Vec<F> {
        row.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (*v - *m) / *s).collect()
    }

    pub fn transform_all(&self, x: &[Vec<F>]) -> Vec<Vec<F>> {
        x.iter().map(|r| self.transform(r)).collect()
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }
}

/// Uniform distribution over the classes.
pub(crate) fn uniform<F: Real>() -> Vec<F> {
    vec![F::one() / F::of_usize(CLASSES); CLASSES]
}

