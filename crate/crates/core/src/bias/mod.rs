//! Party-bias analysis: a masked BJP/opposition sentence corpus, a small
//! differentiable sentence classifier, integrated-gradients token attribution,
//! on-screen hashtags and panel appearance shares.

mod appearance;
mod classifier;
mod corpus;
mod hashtags;
mod ig;
mod rank;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensorfile::TensorFileError;

pub use appearance::{appearance_bias, AppearanceShare};
pub use classifier::{
    train_classifier, BiasTrainParams, BiasTrainReport, TextClassifier, Vocabulary, OOV_ID, PAD_ID,
};
pub use corpus::{build_corpus, split_sentences, tokenize, BiasCorpusConfig, CorpusSentence};
pub use hashtags::{extract_hashtags, hashtags_per_video};
pub use ig::{integrated_gradients, IgTarget, SentenceClassifier};
pub use rank::{attribution_csv, rank_tokens, AttributionRow, Stopwords, TokenAttributions};

#[derive(Debug, Error)]
pub enum BiasError {
    #[error("keyword configuration: {0}")]
    InvalidKeywords(String),
    #[error("corpus contains a single label")]
    SingleClassCorpus,
    #[error("corpus of {0} sentences is too small to split")]
    TooFewSentences(usize),
    #[error("integrated gradients needs at least one step")]
    NonpositiveSteps,
    #[error("invalid training parameters: {0}")]
    InvalidParams(String),
    #[error("training diverged")]
    NonFiniteLoss,
    #[error("malformed model file: {0}")]
    MalformedModel(String),
    #[error(transparent)]
    ModelFile(#[from] TensorFileError),
    #[error("line {0}: malformed corpus row")]
    MalformedCorpusRow(usize),
}

/// Which side a sentence is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BiasLabel {
    Bjp,
    #[serde(rename = "OPP")]
    Opposition,
}

impl BiasLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            BiasLabel::Bjp => "BJP",
            BiasLabel::Opposition => "OPP",
        }
    }

    /// Classifier target: BJP is the positive class.
    pub fn target(self) -> f64 {
        match self {
            BiasLabel::Bjp => 1.0,
            BiasLabel::Opposition => 0.0,
        }
    }
}

impl fmt::Display for BiasLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BiasLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "BJP" => Ok(BiasLabel::Bjp),
            "OPP" | "OPPOSITION" => Ok(BiasLabel::Opposition),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}
