use std::collections::{BTreeMap, BTreeSet};

use actortrace_core::actorgraph::GraphKind;
use actortrace_core::features::FeatureMatrix;
use actortrace_core::Class;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{LearnError, Result};
use crate::{Real, CLASSES};

/// Row-major labelled rows of one view.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<F> {
    pub x: Vec<Vec<F>>,
    pub y: Vec<usize>,
    pub groups: Vec<String>,
}

impl<F: Real> Dataset<F> {
    pub fn new(x: Vec<Vec<F>>, y: Vec<usize>, groups: Vec<String>) -> Result<Self> {
        if x.len() != y.len() || x.len() != groups.len() {
            return Err(LearnError::InvalidArgument("rows, labels and groups differ in length".into()));
        }
        if let Some(w) = x.first().map(Vec::len) {
            if x.iter().any(|r| r.len() != w) {
                return Err(LearnError::InvalidArgument("ragged feature rows".into()));
            }
        }
        if y.iter().any(|&c| c >= CLASSES) {
            return Err(LearnError::InvalidArgument("label out of range".into()));
        }
        Ok(Dataset { x, y, groups })
    }

    /// Labelled rows of `m`; unlabelled rows are an error.
    pub fn from_matrix(m: &FeatureMatrix<F>) -> Result<Self> {
        let y = m
            .rows
            .iter()
            .map(|r| {
                r.label
                    .map(Class::index)
                    .ok_or_else(|| LearnError::InvalidArgument(format!("group {} has no label", r.group)))
            })
            .collect::<Result<_>>()?;
        Self::new(
            m.rows.iter().map(|r| r.values.clone()).collect(),
            y,
            m.rows.iter().map(|r| r.group.clone()).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn width(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn subset(&self, rows: &[usize]) -> Self {
        Dataset {
            x: rows.iter().map(|&i| self.x[i].clone()).collect(),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            groups: rows.iter().map(|&i| self.groups[i].clone()).collect(),
        }
    }

    pub fn class_counts(&self) -> [usize; CLASSES] {
        let mut c = [0; CLASSES];
        for &y in &self.y {
            c[y] += 1;
        }
        c
    }

    /// Fails on empty data or a single class.
    pub fn check_trainable(&self) -> Result<()> {
        if self.is_empty() {
            return Err(LearnError::Empty);
        }
        if self.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
            return Err(LearnError::SingleClass);
        }
        Ok(())
    }
}

/// Labelled feature matrices of several views. A group (one labelled
/// actor) has at most one row per view.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledDataset<F> {
    pub views: BTreeMap<GraphKind, FeatureMatrix<F>>,
}

impl<F: Real> LabeledDataset<F> {
    pub fn new(views: impl IntoIterator<Item = FeatureMatrix<F>>) -> Result<Self> {
        let mut out = BTreeMap::new();
        for m in views {
            let kind = m.kind;
            let mut seen = BTreeSet::new();
            for r in &m.rows {
                if !seen.insert(&r.group) {
                    return Err(LearnError::InvalidArgument(format!("group {} twice in view {kind}", r.group)));
                }
            }
            if out.insert(kind, m).is_some() {
                return Err(LearnError::InvalidArgument(format!("view {kind} given twice")));
            }
        }
        let ds = LabeledDataset { views: out };
        ds.groups()?;
        Ok(ds)
    }

    /// Label of every group across all views.
    pub fn groups(&self) -> Result<BTreeMap<String, Class>> {
        let mut out: BTreeMap<String, Class> = BTreeMap::new();
        for m in self.views.values() {
            for r in &m.rows {
                let label = r
                    .label
                    .ok_or_else(|| LearnError::InvalidArgument(format!("group {} has no label", r.group)))?;
                if let Some(prev) = out.insert(r.group.clone(), label) {
                    if prev != label {
                        return Err(LearnError::InvalidArgument(format!("group {} has two labels", r.group)));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Rows whose group is in `keep`, for every view.
    pub fn restrict(&self, keep: &BTreeSet<String>) -> Self {
        LabeledDataset {
            views: self
                .views
                .iter()
                .map(|(&k, m)| {
                    let mut sub = FeatureMatrix::new(k, m.schema.clone());
                    sub.rows = m.rows.iter().filter(|r| keep.contains(&r.group)).cloned().collect();
                    (k, sub)
                })
                .collect(),
        }
    }

    /// Group-level split: every view's rows of a group land on one side.
    pub fn split(&self, test_fraction: f64, seed: u64) -> Result<(Self, Self)> {
        let (train, test) = split_train_test(&self.groups()?, test_fraction, seed)?;
        Ok((self.restrict(&train), self.restrict(&test)))
    }
}

fn shuffled_by_class(groups: &BTreeMap<String, Class>, seed: u64) -> BTreeMap<Class, Vec<&String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: BTreeMap<Class, Vec<&String>> = BTreeMap::new();
    for (g, c) in groups {
        by_class.entry(*c).or_default().push(g);
    }
    for v in by_class.values_mut() {
        v.shuffle(&mut rng);
    }
    by_class
}

/// Stratified group split: each class contributes `round(fraction * n)`
/// groups to the test side, at least one and at most `n - 1`.
pub fn split_train_test(
    groups: &BTreeMap<String, Class>,
    test_fraction: f64,
    seed: u64,
) -> Result<(BTreeSet<String>, BTreeSet<String>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(LearnError::InvalidArgument(format!(
            "test fraction {test_fraction} leaves an empty side"
        )));
    }
    let (mut train, mut test) = (BTreeSet::new(), BTreeSet::new());
    for (class, gs) in shuffled_by_class(groups, seed) {
        let n = gs.len();
        if n < 2 {
            return Err(LearnError::InvalidArgument(format!("class {class} has fewer than two groups")));
        }
        let n_test = ((test_fraction * n as f64).round() as usize).clamp(1, n - 1);
        test.extend(gs[..n_test].iter().map(|g| (*g).clone()));
        train.extend(gs[n_test..].iter().map(|g| (*g).clone()));
    }
    Ok((train, test))
}

/// Stratified assignment of groups to `k` folds. Classes continue the
/// round robin where the previous class stopped so fold sizes stay even.
pub fn group_folds(groups: &BTreeMap<String, Class>, k: usize, seed: u64) -> Result<BTreeMap<String, usize>> {
    if k < 2 {
        return Err(LearnError::InvalidArgument("need at least two folds".into()));
    }
    if groups.len() < k {
        return Err(LearnError::InvalidArgument(format!("{} groups cannot fill {k} folds", groups.len())));
    }
    let mut out = BTreeMap::new();
    let mut next = 0;
    for gs in shuffled_by_class(groups, seed).into_values() {
        for g in gs {
            out.insert(g.clone(), next % k);
            next += 1;
        }
    }
    Ok(out)
}
