use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::tree::{Criterion, Tree, TreeParams};
use crate::{Real, CLASSES};

/// Bagged Gini trees with `sqrt(width)` candidate features per split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct RandomForest<F> {
    width: usize,
    trees: Vec<Tree<F>>,
}

impl<F: Real> RandomForest<F> {
    pub fn fit(ds: &Dataset<F>, trees: usize, max_depth: Option<usize>, seed: u64) -> Self {
        let width = ds.width();
        let params = TreeParams {
            max_depth,
            min_samples_leaf: 1,
            max_features: Some(((width as f64).sqrt().round() as usize).max(1)),
        };
        let target: Vec<F> = ds.y.iter().map(|&c| F::of_usize(c)).collect();
        let n = ds.len();
        let trees = (0..trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t as u64);
                let mut w = vec![F::zero(); n];
                for _ in 0..n {
                    w[rng.random_range(0..n)] += F::one();
                }
                Tree::fit(&ds.x, &target, &w, Criterion::Gini { classes: CLASSES }, params, &mut rng)
            })
            .collect();
        RandomForest { width, trees }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn predict_proba(&self, row: &[F]) -> Vec<F> {
        let mut p = vec![F::zero(); CLASSES];
        for t in &self.trees {
            for (a, b) in p.iter_mut().zip(t.predict(row)) {
                *a += *b;
            }
        }
        let n = F::of_usize(self.trees.len());
        p.iter_mut().for_each(|v| *v /= n);
        p
    }
}
