use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::data::Dataset;
use super::model::ModelParams;
use crate::seed;

/// Seeded permutation of `0..n` without fixed points (Sattolo's shuffle).
///
/// For `n < 2` there is no derangement and the identity is returned.
pub fn label_derangement(n: usize, seed: u64) -> Vec<u32> {
    let mut p: Vec<u32> = (0..n as u32).collect();
    let mut rng = seed::rng(seed);
    for i in (1..n).rev() {
        let j = rng.random_range(0..i);
        p.swap(i, j);
    }
    p
}

/// Relabels every row through a seeded derangement; features are untouched.
pub fn flip_labels(data: &Dataset, seed: u64) -> Dataset {
    let map = label_derangement(data.num_classes(), seed);
    let labels = data.labels().iter().map(|&l| map[l as usize]).collect();
    data.with_labels(labels)
        .expect("a permutation keeps labels in range")
}

/// Same architecture, parameters drawn from a seeded standard normal.
pub fn random_params_like(model: &ModelParams, seed: u64) -> ModelParams {
    let mut rng = seed::rng(seed);
    let params = (0..model.params().len())
        .map(|_| {
            let v: f64 = StandardNormal.sample(&mut rng);
            v as f32
        })
        .collect();
    ModelParams::new(model.arch().clone(), params).expect("same length")
}
