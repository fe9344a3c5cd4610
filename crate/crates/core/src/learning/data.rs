use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{LearningError, Result};
use crate::seed;

/// Row-major feature matrix with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f32>,
    dims: usize,
    labels: Vec<u32>,
    num_classes: usize,
}

impl Dataset {
    pub fn new(
        features: Vec<f32>,
        dims: usize,
        labels: Vec<u32>,
        num_classes: usize,
    ) -> Result<Self> {
        if dims == 0 || features.len() != dims * labels.len() {
            return Err(LearningError::InvalidDataset(format!(
                "{} features for {} rows of {} dims",
                features.len(),
                labels.len(),
                dims
            )));
        }
        if let Some(&l) = labels.iter().find(|&&l| l as usize >= num_classes) {
            return Err(LearningError::InvalidDataset(format!(
                "label {l} outside {num_classes} classes"
            )));
        }
        Ok(Self {
            features,
            dims,
            labels,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn features(&self) -> &[f32] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.features[i * self.dims..(i + 1) * self.dims]
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.dims);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            features,
            dims: self.dims,
            labels,
            num_classes: self.num_classes,
        }
    }

    /// Same rows with new labels.
    pub fn with_labels(&self, labels: Vec<u32>) -> Result<Dataset> {
        Dataset::new(self.features.clone(), self.dims, labels, self.num_classes)
    }

    /// Shuffles, then returns the first `first` rows and the remainder.
    pub fn split(&self, first: usize, seed: u64) -> Result<(Dataset, Dataset)> {
        if first > self.len() {
            return Err(LearningError::InvalidDataset(format!(
                "cannot take {first} of {} rows",
                self.len()
            )));
        }
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut seed::rng(seed));
        Ok((self.select(&idx[..first]), self.select(&idx[first..])))
    }

    pub fn distinct_labels(&self) -> Vec<u32> {
        let mut seen = vec![false; self.num_classes];
        for &l in &self.labels {
            seen[l as usize] = true;
        }
        (0..self.num_classes as u32)
            .filter(|&c| seen[c as usize])
            .collect()
    }
}

/// Gaussian blobs: one standard-normal mean per class, samples with
/// standard deviation `spread` around it. Rows cycle through the classes.
pub fn generate_synthetic(
    num_classes: usize,
    dims: usize,
    per_class: usize,
    spread: f64,
    seed: u64,
) -> Result<Dataset> {
    if num_classes == 0 || dims == 0 || per_class == 0 {
        return Err(LearningError::InvalidDataset(
            "counts must be positive".into(),
        ));
    }
    if !(spread.is_finite() && spread >= 0.0) {
        return Err(LearningError::InvalidDataset(format!(
            "bad spread {spread}"
        )));
    }
    let mut rng = seed::rng(seed);
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    let means: Vec<f64> = (0..num_classes * dims)
        .map(|_| std.sample(&mut rng))
        .collect();
    let n = num_classes * per_class;
    let mut features = Vec::with_capacity(n * dims);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % num_classes;
        for d in 0..dims {
            let x = means[c * dims + d] + spread * std.sample(&mut rng);
            features.push(x as f32);
        }
        labels.push(c as u32);
    }
    Dataset::new(features, dims, labels, num_classes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionMode {
    Iid,
    NonIid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionSpec {
    pub mode: PartitionMode,
    /// Classes per node for `NonIid`.
    pub classes_per_node: usize,
    pub n_nodes: usize,
}

impl Default for PartitionSpec {
    fn default() -> Self {
        Self {
            mode: PartitionMode::Iid,
            classes_per_node: 2,
            n_nodes: 50,
        }
    }
}

/// Splits `data` into `n_nodes` disjoint, equal-size shares.
///
/// `NonIid` cuts every class into equal shards and deals them round-robin
/// over a shuffled class order, so each node holds exactly
/// `classes_per_node` classes. Rows that do not fit an equal share are left out.
pub fn partition(data: &Dataset, spec: &PartitionSpec, seed: u64) -> Result<Vec<Dataset>> {
    let infeasible = |m: String| Err(LearningError::InfeasiblePartition(m));
    if spec.n_nodes == 0 || spec.n_nodes > data.len() {
        return infeasible(format!("{} nodes for {} samples", spec.n_nodes, data.len()));
    }
    let mut rng = seed::rng(seed);
    match spec.mode {
        PartitionMode::Iid => {
            let mut idx: Vec<usize> = (0..data.len()).collect();
            idx.shuffle(&mut rng);
            let share = data.len() / spec.n_nodes;
            Ok(idx
                .chunks_exact(share)
                .take(spec.n_nodes)
                .map(|c| data.select(c))
                .collect())
        }
        PartitionMode::NonIid => {
            let k = spec.classes_per_node;
            let c = data.num_classes();
            if k == 0 || k > c {
                return infeasible(format!("{k} classes per node with {c} classes"));
            }
            let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); c];
            for (i, &l) in data.labels().iter().enumerate() {
                by_class[l as usize].push(i);
            }
            for rows in &mut by_class {
                rows.shuffle(&mut rng);
            }
            let mut order: Vec<usize> = (0..c).collect();
            order.shuffle(&mut rng);
            let slots = spec.n_nodes * k;
            let slot_class: Vec<usize> = (0..slots).map(|j| order[j % c]).collect();
            let mut shards_of = vec![0usize; c];
            for &cl in &slot_class {
                shards_of[cl] += 1;
            }
            let shard = (0..c)
                .filter(|&cl| shards_of[cl] > 0)
                .map(|cl| by_class[cl].len() / shards_of[cl])
                .min()
                .unwrap_or(0);
            if shard == 0 {
                return infeasible("some class has fewer rows than shards".into());
            }
            let mut next = vec![0usize; c];
            let mut shares = Vec::with_capacity(spec.n_nodes);
            for node in 0..spec.n_nodes {
                let mut rows = Vec::with_capacity(shard * k);
                for &cl in &slot_class[node * k..(node + 1) * k] {
                    rows.extend_from_slice(&by_class[cl][next[cl]..next[cl] + shard]);
                    next[cl] += shard;
                }
                shares.push(data.select(&rows));
            }
            Ok(shares)
        }
    }
}
