use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::corpus::tokenize;
use super::ig::{IgTarget, SentenceClassifier};
use super::{BiasError, BiasLabel, CorpusSentence};
use crate::optim::{bce_with_logit, sigmoid, Adam};
use crate::tensorfile::TensorFile;

const KIND: &str = "bias_classifier";

pub const PAD_ID: usize = 0;
pub const OOV_ID: usize = 1;
const PAD_TOKEN: &str = "[pad]";
const OOV_TOKEN: &str = "[oov]";

/// Token ↔ id table. Id 0 is padding, id 1 is the out-of-vocabulary bucket.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    fn from_tokens(tokens: Vec<String>) -> Result<Self, BiasError> {
        if tokens.len() < 2 || tokens[PAD_ID] != PAD_TOKEN || tokens[OOV_ID] != OOV_TOKEN {
            return Err(BiasError::MalformedModel("vocabulary lacks the reserved entries".into()));
        }
        let index: HashMap<String, usize> = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        if index.len() != tokens.len() {
            return Err(BiasError::MalformedModel("vocabulary has duplicate tokens".into()));
        }
        Ok(Self { tokens, index })
    }

    /// Tokens seen at least `min_count` times, most frequent first, ties by token.
    pub fn build<'a, I>(sentences: I, min_count: usize) -> Self
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for s in sentences {
            for t in s {
                *counts.entry(t.as_str()).or_insert(0) += 1;
            }
        }
        let mut kept: Vec<(&str, usize)> = counts.into_iter().filter(|(_, c)| *c >= min_count.max(1)).collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let mut tokens = vec![PAD_TOKEN.to_string(), OOV_TOKEN.to_string()];
        tokens.extend(kept.into_iter().map(|(t, _)| t.to_string()));
        Self::from_tokens(tokens).expect("reserved entries present")
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(OOV_ID)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t)).collect()
    }
}

/// Mean-pooled token embeddings followed by a linear head and a sigmoid.
/// The output is the probability that a sentence is about the BJP.
#[derive(Debug, Clone, PartialEq)]
pub struct TextClassifier {
    vocab: Vocabulary,
    embeddings: Array2<f64>,
    head_weight: Array1<f64>,
    head_bias: f64,
}

impl TextClassifier {
    pub fn new(vocab: Vocabulary, mut embeddings: Array2<f64>, head_weight: Array1<f64>, head_bias: f64) -> Result<Self, BiasError> {
        if embeddings.nrows() != vocab.len() || embeddings.ncols() != head_weight.len() || head_weight.is_empty() {
            return Err(BiasError::MalformedModel("parameter shapes disagree".into()));
        }
        embeddings.row_mut(PAD_ID).fill(0.0);
        Ok(Self {
            vocab,
            embeddings,
            head_weight,
            head_bias,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.head_weight.len()
    }

    pub fn embeddings(&self) -> &Array2<f64> {
        &self.embeddings
    }

    pub fn head_weight(&self) -> &Array1<f64> {
        &self.head_weight
    }

    pub fn head_bias(&self) -> f64 {
        self.head_bias
    }

    pub fn encode_text(&self, text: &str) -> Vec<usize> {
        self.vocab.encode(&tokenize(text))
    }

    fn pooled(&self, ids: &[usize]) -> Array1<f64> {
        let mut acc = Array1::zeros(self.dim());
        for &id in ids {
            acc += &self.embeddings.row(id);
        }
        if !ids.is_empty() {
            acc /= ids.len() as f64;
        }
        acc
    }

    pub fn logit_ids(&self, ids: &[usize]) -> f64 {
        self.head_weight.dot(&self.pooled(ids)) + self.head_bias
    }

    pub fn predict_ids(&self, ids: &[usize]) -> f64 {
        sigmoid(self.logit_ids(ids))
    }

    /// Probability that `text` is about the BJP.
    pub fn predict(&self, text: &str) -> f64 {
        self.predict_ids(&self.encode_text(text))
    }

    pub fn classify(&self, text: &str) -> BiasLabel {
        if self.predict(text) >= 0.5 {
            BiasLabel::Bjp
        } else {
            BiasLabel::Opposition
        }
    }

    fn to_tensor_file(&self) -> TensorFile {
        let mut file = TensorFile::new(
            KIND,
            json!({ "dim": self.dim(), "vocab_size": self.vocab.len() }),
            json!({ "vocabulary": self.vocab.tokens }),
        );
        file.push(
            "embedding",
            vec![self.vocab.len(), self.dim()],
            self.embeddings.iter().map(|&v| v as f32).collect(),
        );
        file.push("head.weight", vec![self.dim()], self.head_weight.iter().map(|&v| v as f32).collect());
        file.push("head.bias", vec![1], vec![self.head_bias as f32]);
        file
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.to_tensor_file().to_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, BiasError> {
        let file = TensorFile::from_bytes(bytes)?;
        file.expect_kind(KIND)?;
        let tokens: Vec<String> = serde_json::from_value(file.metadata["vocabulary"].clone())
            .map_err(|e| BiasError::MalformedModel(e.to_string()))?;
        let vocab = Vocabulary::from_tokens(tokens)?;
        let (spec, data) = file.tensor("embedding")?;
        if spec.shape.len() != 2 || spec.shape[0] != vocab.len() {
            return Err(BiasError::MalformedModel("embedding shape".into()));
        }
        let embeddings = Array2::from_shape_vec((spec.shape[0], spec.shape[1]), data.iter().map(|&v| v as f64).collect())
            .map_err(|e| BiasError::MalformedModel(e.to_string()))?;
        let (_, w) = file.tensor("head.weight")?;
        let (_, b) = file.tensor("head.bias")?;
        let bias = *b.first().ok_or_else(|| BiasError::MalformedModel("empty head bias".into()))?;
        Self::new(vocab, embeddings, w.iter().map(|&v| v as f64).collect(), bias as f64)
    }

    pub fn save(&self, path: &Path) -> Result<(), BiasError> {
        Ok(self.to_tensor_file().save(path)?)
    }

    pub fn load(path: &Path) -> Result<Self, BiasError> {
        let bytes = std::fs::read(path).map_err(|e| BiasError::MalformedModel(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }
}

impl SentenceClassifier for TextClassifier {
    fn embedding_dim(&self) -> usize {
        self.dim()
    }

    fn encode(&self, tokens: &[String]) -> Vec<usize> {
        self.vocab.encode(tokens)
    }

    fn embed(&self, ids: &[usize]) -> Array2<f64> {
        self.embeddings.select(Axis(0), ids)
    }

    fn output(&self, embedded: &Array2<f64>, target: IgTarget) -> f64 {
        let pooled = if embedded.nrows() == 0 {
            Array1::zeros(self.dim())
        } else {
            embedded.mean_axis(Axis(0)).expect("nonempty")
        };
        let z = self.head_weight.dot(&pooled) + self.head_bias;
        match target {
            IgTarget::Logit => z,
            IgTarget::Probability => sigmoid(z),
        }
    }

    fn output_gradient(&self, embedded: &Array2<f64>, target: IgTarget) -> Array2<f64> {
        let n = embedded.nrows();
        if n == 0 {
            return Array2::zeros((0, self.dim()));
        }
        let scale = match target {
            IgTarget::Logit => 1.0,
            IgTarget::Probability => {
                let p = self.output(embedded, IgTarget::Probability);
                p * (1.0 - p)
            }
        } / n as f64;
        let row = &self.head_weight * scale;
        let mut out = Array2::zeros((n, self.dim()));
        for mut r in out.rows_mut() {
            r.assign(&row);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BiasTrainParams {
    pub dim: usize,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub min_count: usize,
    pub train_fraction: f64,
    pub val_fraction: f64,
}

impl Default for BiasTrainParams {
    fn default() -> Self {
        Self {
            dim: 64,
            max_epochs: 30,
            batch_size: 32,
            learning_rate: 1e-2,
            patience: 3,
            min_count: 2,
            train_fraction: 0.8,
            val_fraction: 0.1,
        }
    }
}

impl BiasTrainParams {
    fn validate(&self) -> Result<(), BiasError> {
        let ok_fracs = self.train_fraction > 0.0 && self.val_fraction > 0.0 && self.train_fraction + self.val_fraction < 1.0;
        if self.dim == 0 || self.max_epochs == 0 || self.batch_size == 0 || !(self.learning_rate > 0.0) || !ok_fracs {
            return Err(BiasError::InvalidParams(format!("{self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasTrainReport {
    pub seed: u64,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub vocab_size: usize,
    pub epochs_run: usize,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub test_accuracy: f64,
    /// Corpus indices of the held-out test sentences, in split order.
    pub test_indices: Vec<usize>,
}

struct Encoded {
    ids: Vec<usize>,
    y: f64,
}

fn mean_loss(model: &TextClassifier, data: &[&Encoded]) -> f64 {
    let total: f64 = data.iter().map(|e| bce_with_logit(model.logit_ids(&e.ids), e.y)).sum();
    total / data.len() as f64
}

/// Seeded 80/10/10 split, vocabulary from the training split, Adam on mean
/// binary cross-entropy and early stopping on validation loss. Parameters
/// are rounded to `f32` at the end so that saved models reload bit-exactly.
pub fn train_classifier(
    corpus: &[CorpusSentence],
    params: &BiasTrainParams,
    seed: u64,
) -> Result<(TextClassifier, BiasTrainReport), BiasError> {
    params.validate()?;
    let n = corpus.len();
    if corpus.iter().all(|s| s.label == BiasLabel::Bjp) || corpus.iter().all(|s| s.label == BiasLabel::Opposition) {
        return Err(BiasError::SingleClassCorpus);
    }
    let n_train = (n as f64 * params.train_fraction).floor() as usize;
    let n_val = (n as f64 * params.val_fraction).floor() as usize;
    if n_train == 0 || n_val == 0 || n_train + n_val >= n {
        return Err(BiasError::TooFewSentences(n));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let (train_idx, rest) = order.split_at(n_train);
    let (val_idx, test_idx) = rest.split_at(n_val);

    let tokens: Vec<Vec<String>> = corpus.iter().map(|s| tokenize(&s.text)).collect();
    let vocab = Vocabulary::build(train_idx.iter().map(|&i| tokens[i].as_slice()), params.min_count);
    let encoded: Vec<Encoded> = corpus
        .iter()
        .zip(&tokens)
        .map(|(s, t)| Encoded {
            ids: vocab.encode(t),
            y: s.label.target(),
        })
        .collect();
    let pick = |idx: &[usize]| -> Vec<&Encoded> { idx.iter().map(|&i| &encoded[i]).collect() };
    let (val, test) = (pick(val_idx), pick(test_idx));

    let (v, d) = (vocab.len(), params.dim);
    let mut flat: Vec<f64> = (0..v * d + d).map(|_| rng.gen_range(-0.1..0.1)).collect();
    flat[..d].fill(0.0);
    flat.push(0.0);
    let w_off = v * d;
    let b_off = v * d + d;
    let unpack = |flat: &[f64]| -> TextClassifier {
        TextClassifier::new(
            vocab.clone(),
            Array2::from_shape_vec((v, d), flat[..w_off].to_vec()).expect("shape"),
            Array1::from(flat[w_off..b_off].to_vec()),
            flat[b_off],
        )
        .expect("consistent shapes")
    };

    let mut adam = Adam::new(flat.len(), params.learning_rate);
    let mut grad = vec![0.0; flat.len()];
    let mut touched: Vec<bool> = vec![false; v];
    let mut shuffled: Vec<usize> = train_idx.to_vec();
    let (mut train_curve, mut val_curve) = (Vec::new(), Vec::new());
    let mut best = (f64::INFINITY, 0usize, flat.clone());
    let mut stale = 0;

    for epoch in 1..=params.max_epochs {
        shuffled.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in shuffled.chunks(params.batch_size) {
            let nb = batch.len() as f64;
            let mut rows: Vec<usize> = Vec::new();
            for &i in batch {
                let e = &encoded[i];
                let len = e.ids.len().max(1) as f64;
                let mut pooled = vec![0.0; d];
                for &id in &e.ids {
                    for (p, x) in pooled.iter_mut().zip(&flat[id * d..id * d + d]) {
                        *p += x;
                    }
                }
                pooled.iter_mut().for_each(|p| *p /= len);
                let z: f64 = pooled.iter().zip(&flat[w_off..b_off]).map(|(p, w)| p * w).sum::<f64>() + flat[b_off];
                epoch_loss += bce_with_logit(z, e.y);
                let r = (sigmoid(z) - e.y) / nb;
                for k in 0..d {
                    grad[w_off + k] += r * pooled[k];
                }
                grad[b_off] += r;
                for &id in &e.ids {
                    if id == PAD_ID {
                        continue;
                    }
                    if !touched[id] {
                        touched[id] = true;
                        rows.push(id);
                    }
                    for k in 0..d {
                        grad[id * d + k] += r * flat[w_off + k] / len;
                    }
                }
            }
            rows.sort_unstable();
            let mut indices: Vec<usize> = rows.iter().flat_map(|&id| id * d..id * d + d).collect();
            indices.extend(w_off..=b_off);
            adam.step_sparse(&mut flat, &grad, &indices);
            for &i in &indices {
                grad[i] = 0.0;
            }
            for &id in &rows {
                touched[id] = false;
            }
        }
        let train_loss = epoch_loss / shuffled.len() as f64;
        if !train_loss.is_finite() {
            return Err(BiasError::NonFiniteLoss);
        }
        let val_loss = mean_loss(&unpack(&flat), &val);
        train_curve.push(train_loss);
        val_curve.push(val_loss);
        if val_loss < best.0 {
            best = (val_loss, epoch, flat.clone());
            stale = 0;
        } else {
            stale += 1;
            if stale >= params.patience {
                break;
            }
        }
    }

    let (_, best_epoch, mut flat) = best;
    flat.iter_mut().for_each(|p| *p = *p as f32 as f64);
    let model = unpack(&flat);
    let correct = test
        .iter()
        .filter(|e| (model.predict_ids(&e.ids) >= 0.5) == (e.y == 1.0))
        .count();
    let report = BiasTrainReport {
        seed,
        n_train,
        n_val,
        n_test: test.len(),
        vocab_size: v,
        epochs_run: train_curve.len(),
        best_epoch,
        train_loss: train_curve,
        val_loss: val_curve,
        test_accuracy: correct as f64 / test.len() as f64,
        test_indices: test_idx.to_vec(),
    };
    Ok((model, report))
}
