use actortrace_core::Class;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("no training rows")]
    Empty,
    #[error("training data contains a single class")]
    SingleClass,
    #[error("training part of fold {fold} has no rows of class {class}")]
    MissingClass { fold: usize, class: Class },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("feature width {got}, model expects {expected}")]
    Width { expected: usize, got: usize },
    #[error("model bundle: {0}")]
    Bundle(String),
    #[error(transparent)]
    Core(#[from] actortrace_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = LearnError> = std::result::Result<T, E>;
