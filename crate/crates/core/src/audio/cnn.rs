//! Small 1-D convolutional network over one-second MFCC blocks.
//!
//! Each of the convolution blocks applies a "same"-padded convolution over
//! time, a ReLU, max-pooling by 2 and dropout; a single dense unit with a
//! sigmoid produces the shouting probability. All parameters live in one flat
//! vector so the optimizer and the gradient check can treat them uniformly.

use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::blocks::FeatureBlock;
use super::AudioError;
use crate::optim::{bce_with_logit, sigmoid, Adam};
use crate::tensorfile::TensorFile;

const KIND: &str = "shout_cnn";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShoutArchitecture {
    pub time_steps: usize,
    pub n_coeffs: usize,
    pub channels: Vec<usize>,
    pub kernel: usize,
    pub dropout: f64,
}

impl Default for ShoutArchitecture {
    fn default() -> Self {
        Self {
            time_steps: 100,
            n_coeffs: 26,
            channels: vec![8, 8, 16, 16],
            kernel: 3,
            dropout: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct ConvLayout {
    weight: usize,
    bias: usize,
    c_in: usize,
    c_out: usize,
    len_in: usize,
}

#[derive(Debug, Clone)]
struct Layout {
    convs: Vec<ConvLayout>,
    dense_weight: usize,
    dense_bias: usize,
    flat_len: usize,
    total: usize,
}

impl ShoutArchitecture {
    pub fn validate(&self) -> Result<(), AudioError> {
        let bad = |m: &str| Err(AudioError::InvalidArchitecture(m.to_string()));
        if self.kernel == 0 || self.kernel % 2 == 0 {
            return bad("kernel size must be odd");
        }
        if self.channels.is_empty() || self.channels.contains(&0) {
            return bad("every convolution block needs at least one channel");
        }
        if self.n_coeffs == 0 {
            return bad("input needs at least one coefficient");
        }
        if self.time_steps >> self.channels.len() == 0 {
            return bad("input too short for the number of pooling steps");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        Ok(())
    }

    fn layout(&self) -> Layout {
        let mut convs = Vec::with_capacity(self.channels.len());
        let mut offset = 0;
        let mut c_in = self.n_coeffs;
        let mut len = self.time_steps;
        for &c_out in &self.channels {
            let weight = offset;
            offset += c_out * self.kernel * c_in;
            let bias = offset;
            offset += c_out;
            convs.push(ConvLayout {
                weight,
                bias,
                c_in,
                c_out,
                len_in: len,
            });
            c_in = c_out;
            len /= 2;
        }
        let flat_len = len * c_in;
        let dense_weight = offset;
        let dense_bias = offset + flat_len;
        Layout {
            convs,
            dense_weight,
            dense_bias,
            flat_len,
            total: dense_bias + 1,
        }
    }

    pub fn n_parameters(&self) -> usize {
        self.layout().total
    }
}

/// Intermediate values kept for backpropagation.
struct Trace {
    inputs: Vec<Vec<f64>>,
    pre_activation: Vec<Vec<f64>>,
    argmax: Vec<Vec<usize>>,
    masks: Vec<Option<Vec<f64>>>,
    flat: Vec<f64>,
    logit: f64,
}

fn conv_forward(p: &[f64], l: &ConvLayout, k: usize, x: &[f64]) -> Vec<f64> {
    let pad = k / 2;
    let mut z = vec![0.0; l.len_in * l.c_out];
    for t in 0..l.len_in {
        for o in 0..l.c_out {
            let mut acc = p[l.bias + o];
            for j in 0..k {
                let Some(ti) = (t + j).checked_sub(pad).filter(|&ti| ti < l.len_in) else {
                    continue;
                };
                let w = &p[l.weight + (o * k + j) * l.c_in..][..l.c_in];
                let xi = &x[ti * l.c_in..][..l.c_in];
                acc += w.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
            }
            z[t * l.c_out + o] = acc;
        }
    }
    z
}

fn relu_pool(z: &[f64], len: usize, c: usize) -> (Vec<f64>, Vec<usize>) {
    let out_len = len / 2;
    let mut out = vec![0.0; out_len * c];
    let mut idx = vec![0; out_len * c];
    for t in 0..out_len {
        for ch in 0..c {
            let a = 2 * t * c + ch;
            let b = a + c;
            let pick = if z[b] > z[a] { b } else { a };
            out[t * c + ch] = z[pick].max(0.0);
            idx[t * c + ch] = pick;
        }
    }
    (out, idx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub epochs: usize,
    pub seed: u64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub loss_curve: Vec<f64>,
}

/// Trained (or hand-built) shouting classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ShoutModel {
    architecture: ShoutArchitecture,
    params: Vec<f64>,
    pub training: Option<TrainingMetadata>,
}

impl ShoutModel {
    /// A model whose every weight and bias is zero; it predicts exactly 0.5.
    pub fn zeros(architecture: ShoutArchitecture) -> Result<Self, AudioError> {
        architecture.validate()?;
        let n = architecture.n_parameters();
        Ok(Self {
            architecture,
            params: vec![0.0; n],
            training: None,
        })
    }

    pub fn from_parameters(architecture: ShoutArchitecture, params: Vec<f64>) -> Result<Self, AudioError> {
        architecture.validate()?;
        if params.len() != architecture.n_parameters() {
            return Err(AudioError::InvalidArchitecture(format!(
                "expected {} parameters, got {}",
                architecture.n_parameters(),
                params.len()
            )));
        }
        Ok(Self {
            architecture,
            params,
            training: None,
        })
    }

    /// Randomly initialized model (He-uniform convolutions, Glorot-uniform head).
    pub fn initialized(architecture: ShoutArchitecture, rng: &mut impl Rng) -> Result<Self, AudioError> {
        let mut model = Self::zeros(architecture)?;
        let layout = model.architecture.layout();
        let k = model.architecture.kernel;
        for l in &layout.convs {
            let bound = (6.0 / (l.c_in * k) as f64).sqrt();
            for w in &mut model.params[l.weight..l.bias] {
                *w = rng.gen_range(-bound..bound);
            }
        }
        let bound = (6.0 / (layout.flat_len + 1) as f64).sqrt();
        for w in &mut model.params[layout.dense_weight..layout.dense_bias] {
            *w = rng.gen_range(-bound..bound);
        }
        Ok(model)
    }

    pub fn architecture(&self) -> &ShoutArchitecture {
        &self.architecture
    }

    pub fn parameters(&self) -> &[f64] {
        &self.params
    }

    pub fn parameters_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn check_shape(&self, block: &Array2<f64>) -> Result<(), AudioError> {
        let expected = (self.architecture.time_steps, self.architecture.n_coeffs);
        if block.dim() != expected {
            return Err(AudioError::ShapeMismatch {
                expected,
                found: block.dim(),
            });
        }
        Ok(())
    }

    fn forward(&self, x: Vec<f64>, rng: Option<&mut ChaCha8Rng>) -> Trace {
        let layout = self.architecture.layout();
        let k = self.architecture.kernel;
        let p = &self.params;
        let mut rng = rng;
        let keep = 1.0 - self.architecture.dropout;
        let mut trace = Trace {
            inputs: Vec::with_capacity(layout.convs.len()),
            pre_activation: Vec::with_capacity(layout.convs.len()),
            argmax: Vec::with_capacity(layout.convs.len()),
            masks: Vec::with_capacity(layout.convs.len()),
            flat: Vec::new(),
            logit: 0.0,
        };
        let mut h = x;
        for l in &layout.convs {
            let z = conv_forward(p, l, k, &h);
            let (mut pooled, idx) = relu_pool(&z, l.len_in, l.c_out);
            let mask = match rng.as_deref_mut() {
                Some(r) if self.architecture.dropout > 0.0 => {
                    let m: Vec<f64> = (0..pooled.len())
                        .map(|_| if r.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
                        .collect();
                    pooled.iter_mut().zip(&m).for_each(|(v, s)| *v *= s);
                    Some(m)
                }
                _ => None,
            };
            trace.inputs.push(std::mem::replace(&mut h, pooled));
            trace.pre_activation.push(z);
            trace.argmax.push(idx);
            trace.masks.push(mask);
        }
        let w = &p[layout.dense_weight..layout.dense_bias];
        trace.logit = p[layout.dense_bias] + w.iter().zip(&h).map(|(a, b)| a * b).sum::<f64>();
        trace.flat = h;
        trace
    }

    fn backward(&self, trace: &Trace, dlogit: f64, grad: &mut [f64]) {
        let layout = self.architecture.layout();
        let k = self.architecture.kernel;
        let pad = k / 2;
        let p = &self.params;

        grad[layout.dense_bias] += dlogit;
        let mut d_h: Vec<f64> = Vec::with_capacity(layout.flat_len);
        for (i, &f) in trace.flat.iter().enumerate() {
            grad[layout.dense_weight + i] += dlogit * f;
            d_h.push(dlogit * p[layout.dense_weight + i]);
        }

        for (li, l) in layout.convs.iter().enumerate().rev() {
            if let Some(mask) = &trace.masks[li] {
                d_h.iter_mut().zip(mask).for_each(|(d, m)| *d *= m);
            }
            let z = &trace.pre_activation[li];
            let mut d_z = vec![0.0; z.len()];
            for (d, &idx) in d_h.iter().zip(&trace.argmax[li]) {
                if z[idx] > 0.0 {
                    d_z[idx] += d;
                }
            }
            let x = &trace.inputs[li];
            let mut d_x = vec![0.0; x.len()];
            for t in 0..l.len_in {
                for o in 0..l.c_out {
                    let g = d_z[t * l.c_out + o];
                    if g == 0.0 {
                        continue;
                    }
                    grad[l.bias + o] += g;
                    for j in 0..k {
                        let Some(ti) = (t + j).checked_sub(pad).filter(|&ti| ti < l.len_in) else {
                            continue;
                        };
                        let w_off = l.weight + (o * k + j) * l.c_in;
                        for i in 0..l.c_in {
                            grad[w_off + i] += g * x[ti * l.c_in + i];
                            d_x[ti * l.c_in + i] += g * p[w_off + i];
                        }
                    }
                }
            }
            d_h = d_x;
        }
    }

    /// Shouting probability of one block in inference mode.
    pub fn predict(&self, block: &Array2<f64>) -> Result<f64, AudioError> {
        self.check_shape(block)?;
        Ok(sigmoid(self.forward(flatten(block), None).logit))
    }

    pub fn predict_blocks(&self, blocks: &[FeatureBlock]) -> Result<Vec<f64>, AudioError> {
        blocks.iter().map(|b| self.predict(&b.data)).collect()
    }

    /// Mean binary cross-entropy over the inputs and its gradient with respect
    /// to every parameter, in inference mode (no dropout).
    pub fn loss_and_gradient(&self, inputs: &[Array2<f64>], labels: &[bool]) -> Result<(f64, Vec<f64>), AudioError> {
        if inputs.len() != labels.len() || inputs.is_empty() {
            return Err(AudioError::LabelCountMismatch {
                blocks: inputs.len(),
                labels: labels.len(),
            });
        }
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        let n = inputs.len() as f64;
        for (x, &y) in inputs.iter().zip(labels) {
            self.check_shape(x)?;
            let trace = self.forward(flatten(x), None);
            let y = f64::from(u8::from(y));
            loss += bce_with_logit(trace.logit, y) / n;
            self.backward(&trace, (sigmoid(trace.logit) - y) / n, &mut grad);
        }
        Ok((loss, grad))
    }

    fn to_tensor_file(&self) -> TensorFile {
        let arch = serde_json::to_value(&self.architecture).expect("architecture serializes");
        let meta = serde_json::to_value(&self.training).expect("metadata serializes");
        let mut file = TensorFile::new(KIND, arch, meta);
        let layout = self.architecture.layout();
        let k = self.architecture.kernel;
        let grab = |a: usize, b: usize| self.params[a..b].iter().map(|&v| v as f32).collect::<Vec<_>>();
        for (i, l) in layout.convs.iter().enumerate() {
            file.push(&format!("conv{i}.weight"), vec![l.c_out, k, l.c_in], grab(l.weight, l.bias));
            file.push(&format!("conv{i}.bias"), vec![l.c_out], grab(l.bias, l.bias + l.c_out));
        }
        file.push("dense.weight", vec![layout.flat_len], grab(layout.dense_weight, layout.dense_bias));
        file.push("dense.bias", vec![1], grab(layout.dense_bias, layout.total));
        file
    }

    /// Serializes with parameters stored as little-endian `f32`.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.to_tensor_file().to_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AudioError> {
        let file = TensorFile::from_bytes(bytes)?;
        file.expect_kind(KIND)?;
        let architecture: ShoutArchitecture = serde_json::from_value(file.architecture.clone())
            .map_err(|e| AudioError::InvalidArchitecture(e.to_string()))?;
        architecture.validate()?;
        let training: Option<TrainingMetadata> = serde_json::from_value(file.metadata.clone())
            .map_err(|e| AudioError::InvalidArchitecture(e.to_string()))?;
        let layout = architecture.layout();
        let mut params = Vec::with_capacity(layout.total);
        let mut take = |name: &str, len: usize| -> Result<(), AudioError> {
            let (spec, data) = file.tensor(name)?;
            if spec.len() != len {
                return Err(AudioError::InvalidArchitecture(format!("tensor `{name}` has the wrong size")));
            }
            params.extend(data.iter().map(|&v| v as f64));
            Ok(())
        };
        for (i, l) in layout.convs.iter().enumerate() {
            take(&format!("conv{i}.weight"), l.bias - l.weight)?;
            take(&format!("conv{i}.bias"), l.c_out)?;
        }
        take("dense.weight", layout.flat_len)?;
        take("dense.bias", 1)?;
        let mut model = Self::from_parameters(architecture, params)?;
        model.training = training;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), AudioError> {
        Ok(self.to_tensor_file().save(path)?)
    }

    pub fn load(path: &Path) -> Result<Self, AudioError> {
        let bytes = std::fs::read(path).map_err(|e| AudioError::Io(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }
}

fn flatten(block: &Array2<f64>) -> Vec<f64> {
    block.iter().copied().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShoutTrainParams {
    pub architecture: ShoutArchitecture,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for ShoutTrainParams {
    fn default() -> Self {
        Self {
            architecture: ShoutArchitecture::default(),
            epochs: 25,
            batch_size: 16,
            learning_rate: 2e-3,
        }
    }
}

/// Trains a model with Adam on mean binary cross-entropy. The result is
/// deterministic for a given seed, and its parameters are rounded to `f32`
/// so that saving and loading reproduces the model exactly.
pub fn train_shout_model(
    blocks: &[Array2<f64>],
    labels: &[bool],
    params: &ShoutTrainParams,
    seed: u64,
) -> Result<ShoutModel, AudioError> {
    if blocks.len() != labels.len() || blocks.is_empty() {
        return Err(AudioError::LabelCountMismatch {
            blocks: blocks.len(),
            labels: labels.len(),
        });
    }
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Err(AudioError::SingleClassLabels);
    }
    if params.batch_size == 0 || params.epochs == 0 {
        return Err(AudioError::InvalidArchitecture("epochs and batch size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = ShoutModel::initialized(params.architecture.clone(), &mut rng)?;
    for b in blocks {
        model.check_shape(b)?;
    }
    let inputs: Vec<Vec<f64>> = blocks.iter().map(flatten).collect();
    let mut adam = Adam::new(model.params.len(), params.learning_rate);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut curve = Vec::with_capacity(params.epochs);

    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(params.batch_size) {
            let seeds: Vec<u64> = batch.iter().map(|_| rng.gen()).collect();
            let per_sample: Vec<(f64, Vec<f64>)> = batch
                .par_iter()
                .zip(seeds.par_iter())
                .map(|(&i, &s)| {
                    let mut drop_rng = ChaCha8Rng::seed_from_u64(s);
                    let trace = model.forward(inputs[i].clone(), Some(&mut drop_rng));
                    let y = f64::from(u8::from(labels[i]));
                    let mut g = vec![0.0; model.params.len()];
                    model.backward(&trace, sigmoid(trace.logit) - y, &mut g);
                    (bce_with_logit(trace.logit, y), g)
                })
                .collect();
            let n = batch.len() as f64;
            let mut grad = vec![0.0; model.params.len()];
            for (loss, g) in &per_sample {
                epoch_loss += loss;
                grad.iter_mut().zip(g).for_each(|(a, b)| *a += b / n);
            }
            adam.step(&mut model.params, &grad);
        }
        let mean = epoch_loss / inputs.len() as f64;
        if !mean.is_finite() || model.params.iter().any(|p| !p.is_finite()) {
            return Err(AudioError::NonFiniteLoss);
        }
        curve.push(mean);
    }

    model.params.iter_mut().for_each(|p| *p = *p as f32 as f64);
    model.training = Some(TrainingMetadata {
        epochs: params.epochs,
        seed,
        learning_rate: params.learning_rate,
        batch_size: params.batch_size,
        loss_curve: curve,
    });
    Ok(model)
}

/// Held-out accuracy at the 0.5 decision threshold.
pub fn accuracy(model: &ShoutModel, blocks: &[Array2<f64>], labels: &[bool]) -> Result<f64, AudioError> {
    let mut correct = 0usize;
    for (b, &l) in blocks.iter().zip(labels) {
        if (model.predict(b)? >= 0.5) == l {
            correct += 1;
        }
    }
    Ok(correct as f64 / blocks.len().max(1) as f64)
}
