use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::softmax;
use crate::data::Dataset;
use crate::tree::{Criterion, Tree, TreeParams};
use crate::{Real, CLASSES};

/// Multinomial gradient boosting: one regression tree per class and stage
/// on the softmax residuals, with one Newton step per leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct GradientBoosting<F> {
    width: usize,
    init: Vec<F>,
    learning_rate: F,
    /// `stages` rows of `CLASSES` trees.
    stages: Vec<Vec<Tree<F>>>,
}

impl<F: Real> GradientBoosting<F> {
    pub fn fit(ds: &Dataset<F>, stages: usize, max_depth: usize, learning_rate: f64, seed: u64) -> Self {
        let n = ds.len();
        let counts = ds.class_counts();
        // absent classes start at a large negative score instead of -inf
        let init: Vec<F> = counts
            .iter()
            .map(|&c| if c == 0 { F::of(-30.0) } else { (F::of_usize(c) / F::of_usize(n)).ln() })
            .collect();
        let lr = F::of(learning_rate);
        let params = TreeParams { max_depth: Some(max_depth), min_samples_leaf: 1, max_features: None };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut score: Vec<Vec<F>> = vec![init.clone(); n];
        let ones = vec![F::one(); n];
        let k = F::of_usize(CLASSES);
        let mut fitted = Vec::with_capacity(stages);
        for _ in 0..stages {
            let proba: Vec<Vec<F>> = score
                .iter()
                .map(|s| {
                    let mut p = s.clone();
                    softmax(&mut p);
                    p
                })
                .collect();
            let mut stage = Vec::with_capacity(CLASSES);
            for c in 0..CLASSES {
                let resid: Vec<F> = (0..n)
                    .map(|i| if ds.y[i] == c { F::one() } else { F::zero() } - proba[i][c])
                    .collect();
                let mut tree = Tree::fit(&ds.x, &resid, &ones, Criterion::SquaredError, params, &mut rng);
                let leaf_of: Vec<usize> = ds.x.iter().map(|r| tree.apply(r)).collect();
                for leaf in tree.leaves().collect::<Vec<_>>() {
                    let (mut num, mut den) = (F::zero(), F::zero());
                    for i in (0..n).filter(|&i| leaf_of[i] == leaf) {
                        num += resid[i];
                        den += resid[i].abs() * (F::one() - resid[i].abs());
                    }
                    let value = if den < F::of(1e-150) { F::zero() } else { (k - F::one()) / k * num / den };
                    tree.set_leaf(leaf, vec![value]);
                }
                for (s, row) in score.iter_mut().zip(&ds.x) {
                    s[c] += lr * tree.predict(row)[0];
                }
                stage.push(tree);
            }
            fitted.push(stage);
        }
        GradientBoosting { width: ds.width(), init, learning_rate: lr, stages: fitted }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn predict_proba(&self, row: &[F]) -> Vec<F> {
        let mut z = self.init.clone();
        for stage in &self.stages {
            for (zc, t) in z.iter_mut().zip(stage) {
                *zc += self.learning_rate * t.predict(row)[0];
            }
        }
        softmax(&mut z);
        z
    }
}
