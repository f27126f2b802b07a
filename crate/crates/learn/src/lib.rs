//! Actor classification: six base classifiers, a linear stacking model per
//! ego view, and a linear fusion of the six views' stacked probabilities.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the pipeline uses
//! the `f64` aliases at the bottom of this file.

pub mod bundle;
pub mod classifiers;
pub mod cv;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod metrics;
mod optim;
pub mod stacking;
mod tree;

use actortrace_core::Scalar;
use serde::de::DeserializeOwned;
use serde::Serialize;

pub use bundle::ModelBundle;
pub use classifiers::{BaseKind, BaseModel, Params};
pub use data::{group_folds, split_train_test, Dataset, LabeledDataset};
pub use ensemble::{train_ensemble, Ensemble, GroupPrediction, Prediction, TrainConfig, TrainingReport};
pub use error::{LearnError, Result};
pub use metrics::EvalReport;
pub use stacking::{stack_kind, StackedModel};

/// Scalar that can also be persisted.
pub trait Real: Scalar + Serialize + DeserializeOwned {}

impl<T: Scalar + Serialize + DeserializeOwned> Real for T {}

/// Number of classes; probability rows have this width.
pub const CLASSES: usize = actortrace_core::Class::COUNT;

pub type Ensemble64 = ensemble::Ensemble<f64>;
pub type Dataset64 = data::Dataset<f64>;
pub type LabeledDataset64 = data::LabeledDataset<f64>;
pub type ModelBundle64 = bundle::ModelBundle<f64>;
