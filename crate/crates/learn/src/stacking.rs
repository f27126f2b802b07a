//! Per-view stacking: base-classifier probabilities feed a multinomial
//! logistic meta-model.

use std::collections::BTreeMap;

use actortrace_core::actorgraph::GraphKind;
use actortrace_core::features::FeatureMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{BaseKind, BaseModel, LogisticRegression, Params};
use crate::cv::{fold_count, fold_split, grid_search, oof_proba, row_folds};
use crate::data::Dataset;
use crate::error::{LearnError, Result};
use crate::metrics::balanced_accuracy;
use crate::{Real, CLASSES};

/// Inverse regularization strength of both meta-models.
pub const META_C: f64 = 1.0;

/// Probability columns kept per classifier; the last class is implied.
pub const KEPT_COLUMNS: usize = CLASSES - 1;

pub(crate) mod kind_serde {
    use actortrace_core::actorgraph::GraphKind;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(k: &GraphKind, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(k.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<GraphKind, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Concatenate the leading `CLASSES - 1` probabilities of each row.
pub fn meta_row<F: Real>(probs: &[Vec<F>]) -> Vec<F> {
    probs.iter().flat_map(|p| p[..KEPT_COLUMNS].iter().copied()).collect()
}

/// The fitted base set of one view plus its meta-model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct StackedModel<F> {
    #[serde(with = "kind_serde")]
    pub kind: GraphKind,
    /// Feature columns the base models expect, in order.
    pub schema: Vec<String>,
    pub params: Vec<Params>,
    pub bases: Vec<BaseModel<F>>,
    pub meta: LogisticRegression<F>,
}

impl<F: Real> StackedModel<F> {
    /// Width of the meta-model input: two columns per base classifier.
    pub fn meta_width(&self) -> usize {
        self.meta.width()
    }

    pub fn predict_proba(&self, row: &[F]) -> Result<Vec<F>> {
        if row.len() != self.schema.len() {
            return Err(LearnError::Width { expected: self.schema.len(), got: row.len() });
        }
        let probs: Vec<Vec<F>> = self.bases.iter().map(|b| b.predict_proba(row)).collect();
        Ok(self.meta.predict_proba(&meta_row(&probs)))
    }
}

/// Everything learned while stacking one view.
#[derive(Debug, Clone)]
pub struct StackOutcome<F> {
    pub model: StackedModel<F>,
    /// Cross-validated balanced accuracy of each base at its chosen grid point.
    pub base_scores: Vec<(BaseKind, f64)>,
    /// Out-of-fold stacked probabilities per group, from nested CV.
    pub oof: BTreeMap<String, Vec<F>>,
    /// Balanced accuracy of `oof`.
    pub cv_score: f64,
}

fn base_seed(seed: u64, b: usize) -> u64 {
    seed.wrapping_add((b as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Fit bases with fixed `params` and a meta-model on their out-of-fold
/// probabilities over the folds in `fold_of`.
fn fit_stack<F: Real>(
    params: &[Params],
    ds: &Dataset<F>,
    fold_of: &[usize],
    seed: u64,
) -> Result<(Vec<BaseModel<F>>, LogisticRegression<F>)> {
    let oof: Vec<Vec<Vec<F>>> = params
        .par_iter()
        .enumerate()
        .map(|(b, p)| oof_proba(p, ds, fold_of, base_seed(seed, b)))
        .collect::<Result<_>>()?;
    let meta_x: Vec<Vec<F>> = (0..ds.len())
        .map(|i| meta_row(&oof.iter().map(|o| o[i].clone()).collect::<Vec<_>>()))
        .collect();
    let meta = LogisticRegression::fit(&meta_x, &ds.y, META_C);
    let bases = params
        .par_iter()
        .enumerate()
        .map(|(b, p)| BaseModel::fit(p, ds, base_seed(seed, b)))
        .collect::<Result<_>>()?;
    Ok((bases, meta))
}

/// Stack one view. `folds` assigns every group of `train` to a fold; the
/// same assignment drives grid search, the meta features and the outer
/// loop of the nested estimate.
pub fn stack_kind<F: Real>(
    train: &FeatureMatrix<F>,
    bases: &[BaseKind],
    folds: &BTreeMap<String, usize>,
    seed: u64,
) -> Result<StackOutcome<F>> {
    if bases.is_empty() {
        return Err(LearnError::InvalidArgument("empty base classifier set".into()));
    }
    let ds = Dataset::from_matrix(train)?;
    ds.check_trainable()?;
    let fold_of = row_folds(&ds, folds)?;
    let k = fold_count(&fold_of);

    let grids = bases
        .par_iter()
        .enumerate()
        .map(|(b, &kind)| grid_search(kind, &ds, &fold_of, base_seed(seed, b)))
        .collect::<Result<Vec<_>>>()?;
    let params: Vec<Params> = grids.iter().map(|g| g.params).collect();
    let base_scores = bases.iter().zip(&grids).map(|(&b, g)| (b, g.score)).collect();

    let (fitted, meta) = fit_stack(&params, &ds, &fold_of, seed)?;

    // nested estimate: the inner folds are the outer training part's folds
    let outer: Vec<(Vec<usize>, Vec<Vec<F>>)> = (0..k)
        .into_par_iter()
        .map(|f| {
            let (tr, te) = fold_split(&ds, &fold_of, f)?;
            if te.is_empty() {
                return Ok((te, Vec::new()));
            }
            let sub = ds.subset(&tr);
            let inner: Vec<usize> = tr.iter().map(|&i| fold_of[i]).collect();
            let (b, m) = fit_stack(&params, &sub, &inner, seed ^ ((f as u64) << 32))?;
            let probs = te
                .iter()
                .map(|&i| {
                    let p: Vec<Vec<F>> = b.iter().map(|m| m.predict_proba(&ds.x[i])).collect();
                    m.predict_proba(&meta_row(&p))
                })
                .collect();
            Ok((te, probs))
        })
        .collect::<Result<_>>()?;
    let mut stacked = vec![Vec::new(); ds.len()];
    for (rows, probs) in outer {
        for (i, p) in rows.into_iter().zip(probs) {
            stacked[i] = p;
        }
    }
    let cv_score = balanced_accuracy(&ds.y, &stacked);
    let oof = ds.groups.iter().cloned().zip(stacked).collect();

    Ok(StackOutcome {
        model: StackedModel { kind: train.kind, schema: train.schema.clone(), params, bases: fitted, meta },
        base_scores,
        oof,
        cv_score,
    })
}
