//! The reference classifier: a single-hidden-layer MLP (ReLU hidden,
//! softmax output) with hand-rolled forward and backward passes in f64.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

/// MLP parameters. Weight layout is row-major: `w1[d * hidden + h]`,
/// `w2[h * num_classes + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    input_dim: usize,
    hidden: usize,
    num_classes: usize,
    pub(crate) w1: Vec<f64>,
    pub(crate) b1: Vec<f64>,
    pub(crate) w2: Vec<f64>,
    pub(crate) b2: Vec<f64>,
}

/// Gradients with the same shapes as [`ModelParams`].
#[derive(Debug, Clone)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl ModelParams {
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Total parameter count.
    pub fn len(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All parameters as one flat vector, order w1, b1, w2, b2.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.w1);
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.extend_from_slice(&self.b2);
        out
    }

    pub fn from_flat(
        input_dim: usize,
        hidden: usize,
        num_classes: usize,
        flat: &[f64],
    ) -> Result<Self> {
        let expected = input_dim * hidden + hidden + hidden * num_classes + num_classes;
        if flat.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "flat parameter vector has {} entries, expected {expected}",
                flat.len()
            )));
        }
        let mut offset = 0;
        let mut take = |n: usize| {
            let slice = flat[offset..offset + n].to_vec();
            offset += n;
            slice
        };
        Ok(Self {
            input_dim,
            hidden,
            num_classes,
            w1: take(input_dim * hidden),
            b1: take(hidden),
            w2: take(hidden * num_classes),
            b2: take(num_classes),
        })
    }

    pub fn assert_finite(&self) -> Result<()> {
        let all = [&self.w1, &self.b1, &self.w2, &self.b2];
        for part in all {
            if part.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("model parameters".into()));
            }
        }
        Ok(())
    }

    /// In-place SGD step: `p -= lr * g`.
    pub fn apply_sgd(&mut self, grads: &Gradients, learning_rate: f64) {
        for (p, g) in self.w1.iter_mut().zip(&grads.w1) {
            *p -= learning_rate * g;
        }
        for (p, g) in self.b1.iter_mut().zip(&grads.b1) {
            *p -= learning_rate * g;
        }
        for (p, g) in self.w2.iter_mut().zip(&grads.w2) {
            *p -= learning_rate * g;
        }
        for (p, g) in self.b2.iter_mut().zip(&grads.b2) {
            *p -= learning_rate * g;
        }
    }

    /// Persist as a one-line JSON shape header followed by the flat
    /// little-endian f64 array (order w1, b1, w2, b2).
    pub fn save(&self, path: &Path) -> Result<()> {
        let header = ModelHeader {
            input_dim: self.input_dim,
            hidden: self.hidden,
            num_classes: self.num_classes,
            dtype: "f64-le".into(),
            order: "w1,b1,w2,b2".into(),
        };
        let mut file = std::fs::File::create(path)?;
        serde_json::to_writer(&mut file, &header)?;
        file.write_all(b"\n")?;
        for v in self.to_flat() {
            file.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let newline = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::MalformedHeader("model file has no header line".into()))?;
        let header: ModelHeader = serde_json::from_slice(&bytes[..newline])?;
        let payload = &bytes[newline + 1..];
        if payload.len() % 8 != 0 {
            return Err(Error::MalformedHeader(
                "model payload is not a whole number of f64s".into(),
            ));
        }
        let flat: Vec<f64> = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::from_flat(header.input_dim, header.hidden, header.num_classes, &flat)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    input_dim: usize,
    hidden: usize,
    num_classes: usize,
    dtype: String,
    order: String,
}

/// Scaled-uniform (Glorot) initialization: weights uniform in ±sqrt(6 /
/// (fan_in + fan_out)), biases zero. Draw order is w1 then w2, row-major,
/// via `ChaCha8Rng::seed_from_u64(seed)`.
pub fn init_model(input_dim: usize, hidden: usize, num_classes: usize, seed: u64) -> ModelParams {
    assert!(input_dim >= 1 && hidden >= 1 && num_classes >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = |n: usize, bound: f64| -> Vec<f64> {
        (0..n)
            .map(|_| (rng.random::<f64>() * 2.0 - 1.0) * bound)
            .collect()
    };
    let bound1 = (6.0 / (input_dim + hidden) as f64).sqrt();
    let w1 = uniform(input_dim * hidden, bound1);
    let bound2 = (6.0 / (hidden + num_classes) as f64).sqrt();
    let w2 = uniform(hidden * num_classes, bound2);
    ModelParams {
        input_dim,
        hidden,
        num_classes,
        w1,
        b1: vec![0.0; hidden],
        w2,
        b2: vec![0.0; num_classes],
    }
}

fn batch_size_of(params: &ModelParams, inputs: &[f64]) -> Result<usize> {
    if params.input_dim == 0 || inputs.is_empty() || !inputs.len().is_multiple_of(params.input_dim) {
        return Err(Error::ShapeMismatch(format!(
            "input length {} is not a multiple of input_dim {}",
            inputs.len(),
            params.input_dim
        )));
    }
    Ok(inputs.len() / params.input_dim)
}

/// Hidden pre-activations and ReLU activations for a batch.
fn hidden_forward(params: &ModelParams, inputs: &[f64], batch: usize) -> (Vec<f64>, Vec<f64>) {
    let (d, h) = (params.input_dim, params.hidden);
    let mut z1 = vec![0.0f64; batch * h];
    for b in 0..batch {
        let x = &inputs[b * d..(b + 1) * d];
        let z = &mut z1[b * h..(b + 1) * h];
        z.copy_from_slice(&params.b1);
        for (di, &xv) in x.iter().enumerate() {
            if xv == 0.0 {
                continue;
            }
            let row = &params.w1[di * h..(di + 1) * h];
            for (zi, &wv) in z.iter_mut().zip(row) {
                *zi += xv * wv;
            }
        }
    }
    let a1: Vec<f64> = z1.iter().map(|&z| z.max(0.0)).collect();
    (z1, a1)
}

/// Output logits for given hidden activations.
fn output_logits(params: &ModelParams, a1: &[f64], batch: usize) -> Vec<f64> {
    let (h, k) = (params.hidden, params.num_classes);
    let mut z2 = vec![0.0f64; batch * k];
    for b in 0..batch {
        let a = &a1[b * h..(b + 1) * h];
        let z = &mut z2[b * k..(b + 1) * k];
        z.copy_from_slice(&params.b2);
        for (hi, &av) in a.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let row = &params.w2[hi * k..(hi + 1) * k];
            for (zi, &wv) in z.iter_mut().zip(row) {
                *zi += av * wv;
            }
        }
    }
    z2
}

/// Row-wise softmax with max subtraction.
fn softmax_rows(logits: &mut [f64], k: usize) {
    for row in logits.chunks_mut(k) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
}

/// Class probabilities for a batch of flattened inputs (normalized to
/// [0, 1], `batch × input_dim` values). Returns `batch × num_classes`
/// probabilities; each row sums to 1 within numerical accuracy.
pub fn forward(params: &ModelParams, inputs: &[f64]) -> Result<Vec<f64>> {
    let batch = batch_size_of(params, inputs)?;
    let (_, a1) = hidden_forward(params, inputs, batch);
    let mut z2 = output_logits(params, &a1, batch);
    softmax_rows(&mut z2, params.num_classes);
    Ok(z2)
}

/// Mean cross-entropy over the batch plus its analytic gradient.
pub fn loss_and_grad(
    params: &ModelParams,
    inputs: &[f64],
    labels: &[u32],
) -> Result<(f64, Gradients)> {
    let batch = batch_size_of(params, inputs)?;
    if labels.len() != batch {
        return Err(Error::ShapeMismatch(format!(
            "{} labels for a batch of {batch}",
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l as usize >= params.num_classes) {
        return Err(Error::ShapeMismatch(format!(
            "label {bad} out of range for {} classes",
            params.num_classes
        )));
    }
    let (d, h, k) = (params.input_dim, params.hidden, params.num_classes);

    let (z1, a1) = hidden_forward(params, inputs, batch);
    let z2 = output_logits(params, &a1, batch);

    // log-softmax for a stable loss; plain softmax for the gradient
    let mut loss = 0.0f64;
    let mut probs = z2;
    for (b, row) in probs.chunks_mut(k).enumerate() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        let log_total = total.ln();
        let label = labels[b] as usize;
        // -log p = log(sum exp(z - max)) - (z_label - max)
        loss += log_total - (row[label].ln());
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    loss /= batch as f64;

    // dL/dz2 = (p - onehot) / batch
    let mut dz2 = probs;
    for (b, row) in dz2.chunks_mut(k).enumerate() {
        row[labels[b] as usize] -= 1.0;
        for v in row.iter_mut() {
            *v /= batch as f64;
        }
    }

    let mut gw2 = vec![0.0f64; h * k];
    let mut gb2 = vec![0.0f64; k];
    for b in 0..batch {
        let dz = &dz2[b * k..(b + 1) * k];
        let a = &a1[b * h..(b + 1) * h];
        for (gb, &dv) in gb2.iter_mut().zip(dz) {
            *gb += dv;
        }
        for (hi, &av) in a.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let row = &mut gw2[hi * k..(hi + 1) * k];
            for (gv, &dv) in row.iter_mut().zip(dz) {
                *gv += av * dv;
            }
        }
    }

    // backprop into the hidden layer through the ReLU mask
    let mut dz1 = vec![0.0f64; batch * h];
    for b in 0..batch {
        let dz = &dz2[b * k..(b + 1) * k];
        let d1 = &mut dz1[b * h..(b + 1) * h];
        for hi in 0..h {
            if z1[b * h + hi] > 0.0 {
                let row = &params.w2[hi * k..(hi + 1) * k];
                let mut acc = 0.0;
                for (&wv, &dv) in row.iter().zip(dz) {
                    acc += wv * dv;
                }
                d1[hi] = acc;
            }
        }
    }

    let mut gw1 = vec![0.0f64; d * h];
    let mut gb1 = vec![0.0f64; h];
    for b in 0..batch {
        let d1 = &dz1[b * h..(b + 1) * h];
        let x = &inputs[b * d..(b + 1) * d];
        for (gb, &dv) in gb1.iter_mut().zip(d1) {
            *gb += dv;
        }
        for (di, &xv) in x.iter().enumerate() {
            if xv == 0.0 {
                continue;
            }
            let row = &mut gw1[di * h..(di + 1) * h];
            for (gv, &dv) in row.iter_mut().zip(d1) {
                *gv += xv * dv;
            }
        }
    }

    Ok((
        loss,
        Gradients {
            w1: gw1,
            b1: gb1,
            w2: gw2,
            b2: gb2,
        },
    ))
}

/// Per-example cross-entropy losses, order-preserving.
pub fn per_example_losses(
    params: &ModelParams,
    inputs: &[f64],
    labels: &[u32],
) -> Result<Vec<f64>> {
    if inputs.is_empty() && labels.is_empty() {
        return Ok(Vec::new());
    }
    let batch = batch_size_of(params, inputs)?;
    if labels.len() != batch {
        return Err(Error::ShapeMismatch(format!(
            "{} labels for a batch of {batch}",
            labels.len()
        )));
    }
    let k = params.num_classes;
    let (_, a1) = hidden_forward(params, inputs, batch);
    let z2 = output_logits(params, &a1, batch);
    let mut out = Vec::with_capacity(batch);
    for (b, row) in z2.chunks(k).enumerate() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = row.iter().map(|&v| (v - max).exp()).sum();
        let label = labels[b] as usize;
        out.push(total.ln() - (row[label] - max));
    }
    Ok(out)
}
