use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::softmax;
use crate::data::Dataset;
use crate::metrics::argmax;
use crate::tree::{Criterion, Tree, TreeParams};
use crate::{Real, CLASSES};

/// Multi-class AdaBoost (SAMME) over shallow Gini trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct AdaBoost<F> {
    width: usize,
    rounds: Vec<(F, Tree<F>)>,
}

impl<F: Real> AdaBoost<F> {
    pub fn fit(ds: &Dataset<F>, rounds: usize, max_depth: usize, learning_rate: f64, seed: u64) -> Self {
        let n = ds.len();
        let k = F::of_usize(CLASSES);
        let lr = F::of(learning_rate);
        let params = TreeParams { max_depth: Some(max_depth), min_samples_leaf: 1, max_features: None };
        let target: Vec<F> = ds.y.iter().map(|&c| F::of_usize(c)).collect();
        let mut w = vec![F::one() / F::of_usize(n); n];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fitted = Vec::new();
        for _ in 0..rounds {
            let tree = Tree::fit(&ds.x, &target, &w, Criterion::Gini { classes: CLASSES }, params, &mut rng);
            let miss: Vec<bool> = (0..n).map(|i| argmax(tree.predict(&ds.x[i])) != ds.y[i]).collect();
            let err: F = (0..n).filter(|&i| miss[i]).map(|i| w[i]).sum::<F>() / w.iter().copied().sum::<F>();
            if err <= F::zero() {
                fitted.push((F::one(), tree));
                break;
            }
            if err >= F::one() - F::one() / k {
                if fitted.is_empty() {
                    fitted.push((F::one(), tree));
                }
                break;
            }
            let alpha = lr * (((F::one() - err) / err).ln() + (k - F::one()).ln());
            for i in (0..n).filter(|&i| miss[i]) {
                w[i] *= alpha.exp();
            }
            let total: F = w.iter().copied().sum();
            w.iter_mut().for_each(|v| *v /= total);
            fitted.push((alpha, tree));
        }
        AdaBoost { width: ds.width(), rounds: fitted }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Softmax of the normalized vote margin divided by `CLASSES - 1`.
    pub fn predict_proba(&self, row: &[F]) -> Vec<F> {
        let k = F::of_usize(CLASSES);
        let mut z = vec![F::zero(); CLASSES];
        let mut total = F::zero();
        for (alpha, t) in &self.rounds {
            let vote = argmax(t.predict(row));
            for (c, zc) in z.iter_mut().enumerate() {
                *zc += *alpha * if c == vote { F::one() } else { -F::one() / (k - F::one()) };
            }
            total += *alpha;
        }
        if total > F::zero() {
            z.iter_mut().for_each(|v| *v /= total * (k - F::one()));
        }
        softmax(&mut z);
        z
    }
}
