use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::BiasError;

/// Quantity being attributed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IgTarget {
    Probability,
    Logit,
}

/// A classifier that reads a sequence of token embeddings. Integrated
/// gradients only needs the forward output and its gradient with respect to
/// the embedded input, so any backend exposing these can be attributed.
pub trait SentenceClassifier {
    fn embedding_dim(&self) -> usize;
    fn encode(&self, tokens: &[String]) -> Vec<usize>;
    /// One row per token id.
    fn embed(&self, ids: &[usize]) -> Array2<f64>;
    fn output(&self, embedded: &Array2<f64>, target: IgTarget) -> f64;
    /// Gradient of [`SentenceClassifier::output`] with respect to every
    /// entry of `embedded`.
    fn output_gradient(&self, embedded: &Array2<f64>, target: IgTarget) -> Array2<f64>;
}

/// Per-token integrated gradients against the all-zero (padding) baseline,
/// using a right Riemann sum with `steps` points on the straight path.
pub fn integrated_gradients<M: SentenceClassifier + ?Sized>(
    model: &M,
    ids: &[usize],
    steps: usize,
    target: IgTarget,
) -> Result<Vec<f64>, BiasError> {
    if steps == 0 {
        return Err(BiasError::NonpositiveSteps);
    }
    let x = model.embed(ids);
    let mut acc = Array2::<f64>::zeros(x.raw_dim());
    for k in 1..=steps {
        let alpha = k as f64 / steps as f64;
        let point = &x * alpha;
        acc += &model.output_gradient(&point, target);
    }
    acc /= steps as f64;
    Ok(x.rows().into_iter().zip(acc.rows()).map(|(xi, gi)| xi.dot(&gi)).collect())
}
