use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::tokenize;
use super::ig::{integrated_gradients, IgTarget, SentenceClassifier};
use super::{BiasError, BiasLabel, CorpusSentence};

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Stopwords(BTreeSet<String>);

impl Stopwords {
    /// One word per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn shipped() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }
}

/// Attribution of every token of one sentence toward its own label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenAttributions {
    pub label: BiasLabel,
    pub tokens: Vec<String>,
    pub scores: Vec<f64>,
}

impl TokenAttributions {
    /// Attributes the model's probability of `sentence.label`. The model
    /// scores the BJP probability, so opposition attributions are negated.
    pub fn compute<M: SentenceClassifier + ?Sized>(
        model: &M,
        sentence: &CorpusSentence,
        steps: usize,
    ) -> Result<Self, BiasError> {
        let tokens = tokenize(&sentence.text);
        let ids = model.encode(&tokens);
        let mut scores = integrated_gradients(model, &ids, steps, IgTarget::Probability)?;
        if sentence.label == BiasLabel::Opposition {
            scores.iter_mut().for_each(|s| *s = -*s);
        }
        Ok(Self {
            label: sentence.label,
            tokens,
            scores,
        })
    }

    pub fn compute_all<M: SentenceClassifier + Sync + ?Sized>(
        model: &M,
        sentences: &[CorpusSentence],
        steps: usize,
    ) -> Result<Vec<Self>, BiasError> {
        sentences.par_iter().map(|s| Self::compute(model, s, steps)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionRow {
    pub token: String,
    pub score: f64,
    pub frequency: usize,
}

fn is_mask(token: &str) -> bool {
    token.starts_with('<') && token.ends_with('>')
}

/// Mean attribution per token over the sentences carrying `label`. Stopwords,
/// mask markers and tokens seen fewer than `min_freq` times are dropped. Rows
/// are sorted by descending score, ties by token.
pub fn rank_tokens(
    attributions: &[TokenAttributions],
    label: BiasLabel,
    stopwords: &Stopwords,
    min_freq: usize,
) -> Vec<AttributionRow> {
    let mut per_token: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for a in attributions.iter().filter(|a| a.label == label) {
        for (t, s) in a.tokens.iter().zip(&a.scores) {
            per_token.entry(t.as_str()).or_default().push(*s);
        }
    }
    let mut rows: Vec<AttributionRow> = per_token
        .into_iter()
        .filter(|(t, v)| v.len() >= min_freq && !stopwords.contains(t) && !is_mask(t))
        .map(|(t, mut v)| {
            v.sort_by(f64::total_cmp);
            let frequency = v.len();
            AttributionRow {
                token: t.to_string(),
                score: v.into_iter().sum::<f64>() / frequency as f64,
                frequency,
            }
        })
        .collect();
    rows.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.token.cmp(&b.token)));
    rows
}

/// `label,token,score,frequency` rows, labels in the given order.
pub fn attribution_csv(tables: &[(BiasLabel, Vec<AttributionRow>)]) -> String {
    let mut out = String::from("label,token,score,frequency\n");
    for (label, rows) in tables {
        for r in rows {
            out.push_str(&format!("{},{},{},{}\n", label, r.token, r.score, r.frequency));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attr(label: BiasLabel, pairs: &[(&str, f64)]) -> TokenAttributions {
        TokenAttributions {
            label,
            tokens: pairs.iter().map(|p| p.0.to_string()).collect(),
            scores: pairs.iter().map(|p| p.1).collect(),
        }
    }

    #[test]
    fn filters_and_sorting() {
        let mut items = Vec::new();
        for i in 0..50 {
            items.push(attr(BiasLabel::Bjp, &[("wave", 0.6 + (i % 2) as f64 * 0.1), ("the", 0.9), ("<per>", 0.9)]));
        }
        for _ in 0..49 {
            items.push(attr(BiasLabel::Bjp, &[("rare", 1.0)]));
        }
        items.push(attr(BiasLabel::Opposition, &[("wave", -5.0)]));
        let rows = rank_tokens(&items, BiasLabel::Bjp, &Stopwords::shipped(), 50);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].token, "wave");
        assert_eq!(rows[0].frequency, 50);
        assert!((rows[0].score - 0.65).abs() < 1e-12);

        let mut reversed = items.clone();
        reversed.reverse();
        assert_eq!(rank_tokens(&reversed, BiasLabel::Bjp, &Stopwords::shipped(), 50), rows);
    }

    #[test]
    fn csv_layout() {
        let rows = vec![AttributionRow {
            token: "wave".into(),
            score: 0.5,
            frequency: 60,
        }];
        assert_eq!(
            attribution_csv(&[(BiasLabel::Bjp, rows)]),
            "label,token,score,frequency\nBJP,wave,0.5,60\n"
        );
    }
}
