//! Grouped, stratified cross-validation of base classifiers.

use std::collections::BTreeMap;

use actortrace_core::Class;
use rayon::prelude::*;

use crate::classifiers::{BaseKind, BaseModel, Params};
use crate::data::Dataset;
use crate::error::{LearnError, Result};
use crate::metrics::balanced_accuracy;
use crate::{Real, CLASSES};

/// Fold of every row of `ds`, looked up by group.
pub fn row_folds<F: Real>(ds: &Dataset<F>, folds: &BTreeMap<String, usize>) -> Result<Vec<usize>> {
    ds.groups
        .iter()
        .map(|g| {
            folds
                .get(g)
                .copied()
                .ok_or_else(|| LearnError::InvalidArgument(format!("group {g} has no fold")))
        })
        .collect()
}

/// Training and held-out rows of fold `f`. Fails when the training part
/// lacks a class that the whole data has.
pub fn fold_split<F: Real>(ds: &Dataset<F>, fold_of: &[usize], f: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let (train, test): (Vec<usize>, Vec<usize>) = (0..ds.len()).partition(|&i| fold_of[i] != f);
    let all = ds.class_counts();
    let mut seen = [0usize; CLASSES];
    for &i in &train {
        seen[ds.y[i]] += 1;
    }
    for c in 0..CLASSES {
        if all[c] > 0 && seen[c] == 0 {
            return Err(LearnError::MissingClass { fold: f, class: Class::from_index(c).expect("class index") });
        }
    }
    Ok((train, test))
}

/// Number of folds referenced by `fold_of`.
pub fn fold_count(fold_of: &[usize]) -> usize {
    fold_of.iter().max().map_or(0, |m| m + 1)
}

/// Out-of-fold class probabilities of `params` for every row.
pub fn oof_proba<F: Real>(params: &Params, ds: &Dataset<F>, fold_of: &[usize], seed: u64) -> Result<Vec<Vec<F>>> {
    let k = fold_count(fold_of);
    let parts: Vec<(Vec<usize>, Vec<Vec<F>>)> = (0..k)
        .into_par_iter()
        .map(|f| {
            let (train, test) = fold_split(ds, fold_of, f)?;
            if test.is_empty() {
                return Ok((test, Vec::new()));
            }
            let model = BaseModel::fit(params, &ds.subset(&train), seed ^ f as u64)?;
            let p = test.iter().map(|&i| model.predict_proba(&ds.x[i])).collect();
            Ok((test, p))
        })
        .collect::<Result<_>>()?;
    let mut out = vec![Vec::new(); ds.len()];
    for (rows, probs) in parts {
        for (i, p) in rows.into_iter().zip(probs) {
            out[i] = p;
        }
    }
    Ok(out)
}

/// Result of a grid search for one base classifier.
#[derive(Debug, Clone)]
pub struct GridResult<F> {
    pub params: Params,
    pub score: f64,
    pub oof: Vec<Vec<F>>,
}

/// Grid point with the highest cross-validated balanced accuracy; the
/// first one wins ties.
pub fn grid_search<F: Real>(kind: BaseKind, ds: &Dataset<F>, fold_of: &[usize], seed: u64) -> Result<GridResult<F>> {
    ds.check_trainable()?;
    let results: Vec<GridResult<F>> = kind
        .grid()
        .into_par_iter()
        .map(|params| {
            let oof = oof_proba(&params, ds, fold_of, seed)?;
            Ok(GridResult { params, score: balanced_accuracy(&ds.y, &oof), oof })
        })
        .collect::<Result<_>>()?;
    let mut best: Option<GridResult<F>> = None;
    for r in results {
        if best.as_ref().is_none_or(|b| r.score > b.score) {
            best = Some(r);
        }
    }
    best.ok_or(LearnError::Empty)
}
