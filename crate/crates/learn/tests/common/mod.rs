#![allow(dead_code)]

use actortrace_core::actorgraph::GraphKind;
use actortrace_core::features::{FeatureMatrix, FeatureRow, EGO1_SIMPLE_SCHEMA, FEATURE_NAMES};
use actortrace_core::features::table_feature_count;
use actortrace_core::{ActorId, Class};
use actortrace_learn::{Dataset, LabeledDataset};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(r: &mut impl Rng) -> f64 {
    let u: f64 = r.random_range(1e-12..1.0);
    let v: f64 = r.random();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

/// Gaussian blobs: class `c` is centred at `sep * e_c` in the first three
/// coordinates, remaining coordinates are pure noise.
pub fn blobs(per_class: &[usize], width: usize, sep: f64, seed: u64) -> Dataset<f64> {
    let mut r = rng(seed);
    let (mut x, mut y, mut g) = (Vec::new(), Vec::new(), Vec::new());
    for (c, &n) in per_class.iter().enumerate() {
        for i in 0..n {
            let row = (0..width)
                .map(|j| normal(&mut r) + if j == c { sep } else { 0.0 })
                .collect();
            x.push(row);
            y.push(c);
            g.push(format!("{}-{i:03}", Class::ALL[c]));
        }
    }
    Dataset::new(x, y, g).unwrap()
}

pub fn folds_of(ds: &Dataset<f64>, k: usize, seed: u64) -> Vec<usize> {
    let groups = ds.groups.iter().cloned().zip(ds.y.iter().map(|&c| Class::ALL[c])).collect();
    let f = actortrace_learn::group_folds(&groups, k, seed).unwrap();
    ds.groups.iter().map(|g| f[g]).collect()
}

pub fn schema_for(kind: GraphKind) -> Vec<String> {
    if kind == GraphKind::Ego1Simple {
        return EGO1_SIMPLE_SCHEMA.iter().map(|s| s.to_string()).collect();
    }
    let n = table_feature_count(kind).unwrap();
    FEATURE_NAMES[..n].iter().map(|s| s.to_string()).collect()
}

/// One view's matrix with `ds` rows, padded or truncated to the view's
/// schema width.
pub fn matrix(kind: GraphKind, ds: &Dataset<f64>, skip: &[usize]) -> FeatureMatrix<f64> {
    let schema = schema_for(kind);
    let w = schema.len();
    let mut m = FeatureMatrix::new(kind, schema);
    for i in (0..ds.len()).filter(|i| !skip.contains(i)) {
        let mut values = ds.x[i].clone();
        values.resize(w, 0.0);
        m.rows.push(FeatureRow {
            group: ds.groups[i].clone(),
            actor: ActorId(i as u32),
            label: Some(Class::ALL[ds.y[i]]),
            values,
        });
    }
    m
}

/// All six ego views sharing the rows of `ds`, each with its own noise.
pub fn views(ds: &Dataset<f64>, noise: f64, seed: u64) -> LabeledDataset<f64> {
    let mut r = rng(seed);
    LabeledDataset::new(GraphKind::EGO.iter().map(|&k| {
        let mut m = matrix(k, ds, &[]);
        for row in &mut m.rows {
            row.values.iter_mut().for_each(|v| *v += noise * normal(&mut r));
        }
        m
    }))
    .unwrap()
}
