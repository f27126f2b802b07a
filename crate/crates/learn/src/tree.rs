//! Weighted CART over one additive statistic: class weight sums (Gini) for
//! classification, `[w, w*t, w*t^2]` (squared error) for regression.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    Gini { classes: usize },
    SquaredError,
}

impl Criterion {
    fn width(self) -> usize {
        match self {
            Criterion::Gini { classes } => classes,
            Criterion::SquaredError => 3,
        }
    }

    fn total<F: Real>(self, s: &[F]) -> F {
        match self {
            Criterion::Gini { .. } => s.iter().copied().sum(),
            Criterion::SquaredError => s[0],
        }
    }

    /// Impurity times total weight.
    fn cost<F: Real>(self, s: &[F]) -> F {
        let w = self.total(s);
        if w <= F::zero() {
            return F::zero();
        }
        match self {
            Criterion::Gini { .. } => w - s.iter().map(|c| *c * *c).sum::<F>() / w,
            Criterion::SquaredError => (s[2] - s[1] * s[1] / w).max(F::zero()),
        }
    }

    fn leaf<F: Real>(self, s: &[F]) -> Vec<F> {
        let w = self.total(s);
        match self {
            Criterion::Gini { classes } if w <= F::zero() => vec![F::one() / F::of_usize(classes); classes],
            Criterion::Gini { .. } => s.iter().map(|c| *c / w).collect(),
            Criterion::SquaredError if w <= F::zero() => vec![F::zero()],
            Criterion::SquaredError => vec![s[1] / w],
        }
    }

    fn add<F: Real>(self, s: &mut [F], target: F, w: F) {
        match self {
            Criterion::Gini { .. } => s[target.to_usize().expect("class index")] += w,
            Criterion::SquaredError => {
                s[0] += w;
                s[1] += w * target;
                s[2] += w * target * target;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features tried per split; all when `None`.
    pub max_features: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
enum Node<F> {
    Leaf(Vec<F>),
    Split { feature: usize, threshold: F, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct Tree<F> {
    nodes: Vec<Node<F>>,
}

struct Builder<'a, F, R> {
    x: &'a [Vec<F>],
    target: &'a [F],
    w: &'a [F],
    crit: Criterion,
    params: TreeParams,
    rng: &'a mut R,
    nodes: Vec<Node<F>>,
}

impl<F: Real, R: Rng> Builder<'_, F, R> {
    fn stats(&self, rows: &[usize]) -> Vec<F> {
        let mut s = vec![F::zero(); self.crit.width()];
        for &i in rows {
            self.crit.add(&mut s, self.target[i], self.w[i]);
        }
        s
    }

    fn best_split(&mut self, rows: &mut [usize], parent: &[F]) -> Option<(usize, F, usize)> {
        let d = self.x[0].len();
        let features: Vec<usize> = match self.params.max_features {
            Some(m) if m < d => sample(self.rng, d, m).into_vec(),
            _ => (0..d).collect(),
        };
        let parent_cost = self.crit.cost(parent);
        let min_leaf = self.params.min_samples_leaf.max(1);
        let mut best: Option<(F, usize, F)> = None;
        for f in features {
            rows.sort_by(|&a, &b| self.x[a][f].partial_cmp(&self.x[b][f]).unwrap_or(std::cmp::Ordering::Equal));
            let mut left = vec![F::zero(); parent.len()];
            for k in 0..rows.len() - 1 {
                let i = rows[k];
                self.crit.add(&mut left, self.target[i], self.w[i]);
                let (v, next) = (self.x[i][f], self.x[rows[k + 1]][f]);
                if v == next || k + 1 < min_leaf || rows.len() - k - 1 < min_leaf {
                    continue;
                }
                let right: Vec<F> = parent.iter().zip(&left).map(|(p, l)| *p - *l).collect();
                let gain = parent_cost - self.crit.cost(&left) - self.crit.cost(&right);
                if best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, f, (v + next) / F::of(2.0)));
                }
            }
        }
        let (gain, f, threshold) = best?;
        if gain <= F::of(1e-12) * parent_cost.max(F::one()) {
            return None;
        }
        let mut k = 0;
        for j in 0..rows.len() {
            if self.x[rows[j]][f] <= threshold {
                rows.swap(j, k);
                k += 1;
            }
        }
        Some((f, threshold, k))
    }

    fn grow(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let stats = self.stats(rows);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(self.crit.leaf(&stats)));
        let can_split = rows.len() >= 2 * self.params.min_samples_leaf.max(1)
            && self.params.max_depth.is_none_or(|m| depth < m)
            && self.crit.cost(&stats) > F::zero();
        if !can_split {
            return id;
        }
        if let Some((feature, threshold, k)) = self.best_split(rows, &stats) {
            let (l, r) = rows.split_at_mut(k);
            let left = self.grow(l, depth + 1);
            let right = self.grow(r, depth + 1);
            self.nodes[id] = Node::Split { feature, threshold, left, right };
        }
        id
    }
}

impl<F: Real> Tree<F> {
    /// Fit on the rows with positive weight. Gini targets are class
    /// indices stored as scalars.
    pub fn fit<R: Rng>(x: &[Vec<F>], target: &[F], w: &[F], crit: Criterion, params: TreeParams, rng: &mut R) -> Self {
        let mut rows: Vec<usize> = (0..x.len()).filter(|&i| w[i] > F::zero()).collect();
        let mut b = Builder { x, target, w, crit, params, rng, nodes: Vec::new() };
        if rows.is_empty() {
            b.nodes.push(Node::Leaf(crit.leaf(&vec![F::zero(); crit.width()])));
        } else {
            b.grow(&mut rows, 0);
        }
        Tree { nodes: b.nodes }
    }

    /// Index of the leaf `row` falls in.
    pub fn apply(&self, row: &[F]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf(_) => return i,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn predict(&self, row: &[F]) -> &[F] {
        match &self.nodes[self.apply(row)] {
            Node::Leaf(v) => v,
            Node::Split { .. } => unreachable!("apply returns leaves"),
        }
    }

    pub fn set_leaf(&mut self, leaf: usize, value: Vec<F>) {
        self.nodes[leaf] = Node::Leaf(value);
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().enumerate().filter(|(_, n)| matches!(n, Node::Leaf(_))).map(|(i, _)| i)
    }
}
