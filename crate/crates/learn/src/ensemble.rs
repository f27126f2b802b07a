//! Cross-view fusion: the stacked probabilities of every view form one
//! row per group for a final multinomial logistic model.

use std::collections::{BTreeMap, BTreeSet};

use actortrace_core::actorgraph::GraphKind;
use actortrace_core::Class;
use serde::{Deserialize, Serialize};

use crate::classifiers::{uniform, BaseKind, LogisticRegression};
use crate::data::{group_folds, LabeledDataset};
use crate::error::{LearnError, Result};
use crate::metrics::{argmax, balanced_accuracy, EvalReport};
use crate::stacking::{meta_row, stack_kind, StackedModel, META_C};
use crate::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub folds: usize,
    pub seed: u64,
    pub bases: Vec<BaseKind>,
    /// Views fused by the final model, in column order.
    pub kinds: Vec<GraphKind>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { folds: 5, seed: 0, bases: BaseKind::ALL.to_vec(), kinds: GraphKind::EGO.to_vec() }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(LearnError::InvalidArgument("need at least two folds".into()));
        }
        if self.kinds.is_empty() {
            return Err(LearnError::InvalidArgument("no views to fuse".into()));
        }
        if self.kinds.iter().collect::<BTreeSet<_>>().len() != self.kinds.len() {
            return Err(LearnError::InvalidArgument("view listed twice".into()));
        }
        if let Some(m) = BaseKind::MANDATORY.iter().find(|m| !self.bases.contains(m)) {
            return Err(LearnError::InvalidArgument(format!("base set lacks mandatory {m}")));
        }
        Ok(())
    }
}

/// Fitted three-stage model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct Ensemble<F> {
    pub stacked: Vec<StackedModel<F>>,
    pub fusion: LogisticRegression<F>,
}

/// Kind-level and fused cross-validation scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    /// Per view: base classifier name and its CV balanced accuracy.
    pub base_scores: BTreeMap<String, Vec<(String, f64)>>,
    /// Nested CV balanced accuracy of each view's stacked model.
    pub stacked_scores: BTreeMap<String, f64>,
    /// CV of the final model over the out-of-fold stacked rows.
    pub final_cv: EvalReport,
    /// Training groups lacking at least one view.
    pub imputed_groups: usize,
}

impl TrainingReport {
    pub fn best_base_score(&self) -> f64 {
        self.base_scores.values().flatten().map(|(_, s)| *s).fold(0.0, f64::max)
    }

    pub fn best_stacked_score(&self) -> f64 {
        self.stacked_scores.values().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<F> {
    pub probs: Vec<F>,
    pub class: Class,
    /// Views that had no row and were imputed as uniform.
    pub imputed: Vec<GraphKind>,
}

/// Prediction for one group with its known label, if any.
pub type GroupPrediction<F> = (String, Option<Class>, Prediction<F>);

type ViewRows<F> = BTreeMap<GraphKind, Vec<F>>;

/// Final-model input: per view the first `CLASSES - 1` probabilities, or
/// the uniform row when the view is absent.
fn fusion_row<F: Real>(per_kind: &[Option<Vec<F>>]) -> Vec<F> {
    let rows: Vec<Vec<F>> = per_kind.iter().map(|p| p.clone().unwrap_or_else(uniform)).collect();
    meta_row(&rows)
}

pub fn train_ensemble<F: Real>(data: &LabeledDataset<F>, cfg: &TrainConfig) -> Result<(Ensemble<F>, TrainingReport)> {
    cfg.validate()?;
    let groups = data.groups()?;
    if groups.is_empty() {
        return Err(LearnError::Empty);
    }
    let folds = group_folds(&groups, cfg.folds, cfg.seed)?;
    let mut stacked = Vec::with_capacity(cfg.kinds.len());
    let mut oof = Vec::with_capacity(cfg.kinds.len());
    let mut base_scores = BTreeMap::new();
    let mut stacked_scores = BTreeMap::new();
    for &kind in &cfg.kinds {
        let m = data
            .views
            .get(&kind)
            .ok_or_else(|| LearnError::InvalidArgument(format!("no training matrix for view {kind}")))?;
        let out = stack_kind(m, &cfg.bases, &folds, cfg.seed)?;
        base_scores.insert(
            kind.name().to_string(),
            out.base_scores.iter().map(|(b, s)| (b.name().to_string(), *s)).collect(),
        );
        stacked_scores.insert(kind.name().to_string(), out.cv_score);
        stacked.push(out.model);
        oof.push(out.oof);
    }

    let names: Vec<&String> = groups.keys().collect();
    let mut imputed_groups = 0;
    let x: Vec<Vec<F>> = names
        .iter()
        .map(|g| {
            let per: Vec<Option<Vec<F>>> = oof.iter().map(|o| o.get(*g).cloned()).collect();
            if per.iter().any(Option::is_none) {
                imputed_groups += 1;
            }
            fusion_row(&per)
        })
        .collect();
    let y: Vec<usize> = names.iter().map(|g| groups[*g].index()).collect();
    let fold_of: Vec<usize> = names.iter().map(|g| folds[*g]).collect();

    let mut cv = vec![Vec::new(); x.len()];
    let mut per_fold = Vec::with_capacity(cfg.folds);
    for f in 0..cfg.folds {
        let train: Vec<usize> = (0..x.len()).filter(|&i| fold_of[i] != f).collect();
        let test: Vec<usize> = (0..x.len()).filter(|&i| fold_of[i] == f).collect();
        let model = LogisticRegression::fit(
            &train.iter().map(|&i| x[i].clone()).collect::<Vec<_>>(),
            &train.iter().map(|&i| y[i]).collect::<Vec<_>>(),
            META_C,
        );
        for &i in &test {
            cv[i] = model.predict_proba(&x[i]);
        }
        let ty: Vec<usize> = test.iter().map(|&i| y[i]).collect();
        let tp: Vec<Vec<F>> = test.iter().map(|&i| cv[i].clone()).collect();
        per_fold.push(balanced_accuracy(&ty, &tp));
    }
    let pred: Vec<usize> = cv.iter().map(|p| argmax(p)).collect();
    let final_cv = EvalReport::new(&y, &pred, per_fold)?;
    let fusion = LogisticRegression::fit(&x, &y, META_C);

    Ok((
        Ensemble { stacked, fusion },
        TrainingReport { base_scores, stacked_scores, final_cv, imputed_groups },
    ))
}

impl<F: Real> Ensemble<F> {
    pub fn kinds(&self) -> Vec<GraphKind> {
        self.stacked.iter().map(|s| s.kind).collect()
    }

    pub fn model(&self, kind: GraphKind) -> Option<&StackedModel<F>> {
        self.stacked.iter().find(|s| s.kind == kind)
    }

    /// Fuse one actor's rows; each row follows its view's schema.
    pub fn predict(&self, rows: &BTreeMap<GraphKind, Vec<F>>) -> Result<Prediction<F>> {
        let mut imputed = Vec::new();
        let mut per = Vec::with_capacity(self.stacked.len());
        for s in &self.stacked {
            match rows.get(&s.kind) {
                Some(r) => per.push(Some(s.predict_proba(r)?)),
                None => {
                    imputed.push(s.kind);
                    per.push(None);
                }
            }
        }
        let probs = self.fusion.predict_proba(&fusion_row(&per));
        let class = Class::from_index(argmax(&probs)).expect("class index");
        Ok(Prediction { probs, class, imputed })
    }

    /// Predict every group of `data`, projecting each view onto the schema
    /// the model was trained with.
    pub fn predict_dataset(&self, data: &LabeledDataset<F>) -> Result<Vec<GroupPrediction<F>>> {
        let mut rows: BTreeMap<String, (Option<Class>, ViewRows<F>)> = BTreeMap::new();
        for s in &self.stacked {
            let Some(m) = data.views.get(&s.kind) else { continue };
            let m = m.project(&s.schema)?;
            for r in m.rows {
                let e = rows.entry(r.group).or_default();
                e.0 = e.0.or(r.label);
                e.1.insert(s.kind, r.values);
            }
        }
        rows.into_iter()
            .map(|(g, (label, r))| Ok((g, label, self.predict(&r)?)))
            .collect()
    }

    /// Held-out quality on labelled data.
    pub fn evaluate(&self, data: &LabeledDataset<F>) -> Result<EvalReport> {
        let preds = self.predict_dataset(data)?;
        if preds.is_empty() {
            return Err(LearnError::Empty);
        }
        let mut y = Vec::with_capacity(preds.len());
        let mut p = Vec::with_capacity(preds.len());
        for (g, label, pred) in preds {
            let label = label.ok_or_else(|| LearnError::InvalidArgument(format!("group {g} has no label")))?;
            y.push(label.index());
            p.push(pred.class.index());
        }
        EvalReport::new(&y, &p, Vec::new())
    }
}
