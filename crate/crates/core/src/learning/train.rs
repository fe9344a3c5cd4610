use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::data::Dataset;
use super::model::{Arch, ModelParams};
use super::{LearningError, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Mini-batch updates per call to [`train`].
    pub steps: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            steps: 10,
            batch_size: 16,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(LearningError::InvalidTrainConfig(
                "learning_rate must be positive".into(),
            ));
        }
        if self.steps == 0 || self.batch_size == 0 {
            return Err(LearningError::InvalidTrainConfig(
                "steps and batch_size must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub correct: usize,
    pub n_samples: usize,
}

fn check_shapes(arch: &Arch, data: &Dataset) -> Result<()> {
    if !arch.is_trainable() {
        return Err(LearningError::InvalidArch("model has no layers".into()));
    }
    if data.is_empty() {
        return Err(LearningError::EmptyDataset);
    }
    if arch.inputs() != data.dims() {
        return Err(LearningError::DimensionMismatch {
            expected: arch.inputs(),
            got: data.dims(),
        });
    }
    if arch.outputs() != data.num_classes() {
        return Err(LearningError::DimensionMismatch {
            expected: arch.outputs(),
            got: data.num_classes(),
        });
    }
    Ok(())
}

/// Seeded initialization: weights ~ N(0, 1/fan_in), biases zero.
pub fn init_model(arch: &Arch, seed: u64) -> ModelParams {
    let mut rng = seed::rng(seed);
    let mut params = Vec::with_capacity(arch.param_count());
    for w in arch.layers().windows(2) {
        let (inp, out) = (w[0], w[1]);
        let normal = Normal::new(0.0, 1.0 / (inp as f64).sqrt()).expect("positive std");
        params.extend((0..inp * out).map(|_| normal.sample(&mut rng) as f32));
        params.extend(std::iter::repeat_n(0.0f32, out));
    }
    ModelParams::new(arch.clone(), params).expect("sized from arch")
}

/// Activations for every layer; the last entry holds the logits.
fn forward(layers: &[usize], params: &[f64], x: &[f32]) -> Vec<Vec<f64>> {
    let mut acts = vec![x.iter().map(|&v| f64::from(v)).collect::<Vec<f64>>()];
    let mut off = 0;
    let last = layers.len() - 2;
    for (l, w) in layers.windows(2).enumerate() {
        let (inp, out) = (w[0], w[1]);
        let weights = &params[off..off + inp * out];
        let bias = &params[off + inp * out..off + inp * out + out];
        let a = acts.last().expect("input present");
        let z: Vec<f64> = (0..out)
            .map(|o| {
                let row = &weights[o * inp..(o + 1) * inp];
                bias[o] + row.iter().zip(a).map(|(w, x)| w * x).sum::<f64>()
            })
            .collect();
        acts.push(if l == last {
            z
        } else {
            z.into_iter().map(|v| v.max(0.0)).collect()
        });
        off += inp * out + out;
    }
    acts
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

/// Mean softmax cross-entropy over `rows` and its gradient.
pub fn loss_and_grad(
    arch: &Arch,
    params: &[f64],
    data: &Dataset,
    rows: &[usize],
) -> (f64, Vec<f64>) {
    let layers = arch.layers();
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    let offsets: Vec<usize> = layers
        .windows(2)
        .scan(0, |off, w| {
            let start = *off;
            *off += w[0] * w[1] + w[1];
            Some(start)
        })
        .collect();
    for &i in rows {
        let acts = forward(layers, params, data.row(i));
        let mut delta = acts.last().expect("logits").clone();
        softmax_in_place(&mut delta);
        let y = data.labels()[i] as usize;
        loss -= delta[y].max(f64::MIN_POSITIVE).ln();
        delta[y] -= 1.0;
        for l in (0..layers.len() - 1).rev() {
            let (inp, out) = (layers[l], layers[l + 1]);
            let off = offsets[l];
            let a = &acts[l];
            for o in 0..out {
                let g = &mut grad[off + o * inp..off + (o + 1) * inp];
                for (gj, &aj) in g.iter_mut().zip(a) {
                    *gj += delta[o] * aj;
                }
                grad[off + inp * out + o] += delta[o];
            }
            if l > 0 {
                let weights = &params[off..off + inp * out];
                delta = (0..inp)
                    .map(|j| {
                        if a[j] > 0.0 {
                            (0..out).map(|o| weights[o * inp + j] * delta[o]).sum()
                        } else {
                            0.0
                        }
                    })
                    .collect();
            }
        }
    }
    let n = rows.len() as f64;
    for g in &mut grad {
        *g /= n;
    }
    (loss / n, grad)
}

/// Mini-batch SGD on softmax cross-entropy. Batches are drawn with replacement.
pub fn train(model: &ModelParams, data: &Dataset, cfg: &TrainConfig) -> Result<ModelParams> {
    cfg.validate()?;
    check_shapes(model.arch(), data)?;
    let mut rng = seed::rng(cfg.seed);
    let mut params: Vec<f64> = model.params().iter().map(|&p| f64::from(p)).collect();
    let mut batch = vec![0usize; cfg.batch_size];
    for _ in 0..cfg.steps {
        for b in &mut batch {
            *b = rng.random_range(0..data.len());
        }
        let (_, grad) = loss_and_grad(model.arch(), &params, data, &batch);
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= cfg.learning_rate * g;
        }
    }
    ModelParams::new(
        model.arch().clone(),
        params.into_iter().map(|p| p as f32).collect(),
    )
}

/// Predicted class per row; ties go to the lowest index.
pub fn predict(model: &ModelParams, data: &Dataset) -> Result<Vec<u32>> {
    check_shapes(model.arch(), data)?;
    let params: Vec<f64> = model.params().iter().map(|&p| f64::from(p)).collect();
    Ok((0..data.len())
        .map(|i| {
            let acts = forward(model.arch().layers(), &params, data.row(i));
            let logits = acts.last().expect("logits");
            let mut best = 0;
            for (c, &v) in logits.iter().enumerate() {
                if v > logits[best] {
                    best = c;
                }
            }
            best as u32
        })
        .collect())
}

pub fn evaluate(model: &ModelParams, data: &Dataset) -> Result<EvalReport> {
    let preds = predict(model, data)?;
    let correct = preds
        .iter()
        .zip(data.labels())
        .filter(|(p, l)| p == l)
        .count();
    Ok(EvalReport {
        accuracy: correct as f64 / data.len() as f64,
        correct,
        n_samples: data.len(),
    })
}
