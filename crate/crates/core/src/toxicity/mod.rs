//! Utterance-level toxicity: score containers, the foul-speech rule, scoring
//! clients (offline lexicon and remote HTTP service) and per-video aggregation.

mod lexicon;
mod remote;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::TranscriptSegment;

pub use lexicon::{LexiconEntry, LexiconScorer};
pub use remote::{text_hash, RemoteConfig, RemoteScorer};

#[derive(Debug, Error)]
pub enum ToxicityError {
    #[error("scoring service unavailable: {0}")]
    ScoringUnavailable(String),
    #[error("malformed service response: {0}")]
    MalformedResponse(String),
    #[error("score for `{0}` outside [0, 1]")]
    OutOfRange(String),
    #[error("line {0}: malformed lexicon row")]
    MalformedLexicon(usize),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("missing API key: environment variable {0} is not set")]
    MissingApiKey(String),
    #[error("cache error: {0}")]
    Cache(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    Toxicity,
    SevereToxicity,
    Profanity,
    Insult,
    Threat,
    IdentityAttack,
}

impl Attribute {
    pub const ALL: [Attribute; 6] = [
        Attribute::Toxicity,
        Attribute::SevereToxicity,
        Attribute::Profanity,
        Attribute::Insult,
        Attribute::Threat,
        Attribute::IdentityAttack,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Attribute::Toxicity => "toxicity",
            Attribute::SevereToxicity => "severe_toxicity",
            Attribute::Profanity => "profanity",
            Attribute::Insult => "insult",
            Attribute::Threat => "threat",
            Attribute::IdentityAttack => "identity_attack",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ToxicityError> {
        let key = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        Attribute::ALL
            .into_iter()
            .find(|a| a.as_str() == key)
            .ok_or_else(|| ToxicityError::UnknownAttribute(s.to_string()))
    }
}

/// Six attribute probabilities.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ToxicityScores {
    pub toxicity: f64,
    pub severe_toxicity: f64,
    pub profanity: f64,
    pub insult: f64,
    pub threat: f64,
    pub identity_attack: f64,
}

impl ToxicityScores {
    pub fn get(&self, a: Attribute) -> f64 {
        match a {
            Attribute::Toxicity => self.toxicity,
            Attribute::SevereToxicity => self.severe_toxicity,
            Attribute::Profanity => self.profanity,
            Attribute::Insult => self.insult,
            Attribute::Threat => self.threat,
            Attribute::IdentityAttack => self.identity_attack,
        }
    }

    pub fn set(&mut self, a: Attribute, v: f64) {
        match a {
            Attribute::Toxicity => self.toxicity = v,
            Attribute::SevereToxicity => self.severe_toxicity = v,
            Attribute::Profanity => self.profanity = v,
            Attribute::Insult => self.insult = v,
            Attribute::Threat => self.threat = v,
            Attribute::IdentityAttack => self.identity_attack = v,
        }
    }

    pub fn uniform(v: f64) -> Self {
        let mut s = Self::default();
        for a in Attribute::ALL {
            s.set(a, v);
        }
        s
    }

    pub fn validate(&self) -> Result<(), ToxicityError> {
        for a in Attribute::ALL {
            let v = self.get(a);
            if !(0.0..=1.0).contains(&v) {
                return Err(ToxicityError::OutOfRange(a.as_str().to_string()));
            }
        }
        Ok(())
    }
}

/// True when any attribute strictly exceeds `threshold`.
pub fn is_foul(scores: &ToxicityScores, threshold: f64) -> bool {
    Attribute::ALL.iter().any(|&a| scores.get(a) > threshold)
}

/// Anything that can score a single utterance.
pub trait ToxicityClient: Send + Sync {
    fn score(&self, text: &str) -> Result<ToxicityScores, ToxicityError>;
}

/// Per-video toxicity summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VideoToxicity {
    pub foul_utterances: usize,
    pub utterances: usize,
    pub toxic_utterance_fraction: f64,
    pub has_toxic_speech: bool,
}

/// Scores every utterance with non-empty text. Any scoring failure aborts the
/// whole video so partial results are never reported.
pub fn video_toxicity(
    segments: &[TranscriptSegment],
    client: &dyn ToxicityClient,
    threshold: f64,
) -> Result<VideoToxicity, ToxicityError> {
    let mut utterances = 0;
    let mut foul = 0;
    for seg in segments.iter().filter(|s| !s.text.trim().is_empty()) {
        utterances += 1;
        if is_foul(&client.score(&seg.text)?, threshold) {
            foul += 1;
        }
    }
    let fraction = if utterances == 0 { 0.0 } else { foul as f64 / utterances as f64 };
    Ok(VideoToxicity {
        foul_utterances: foul,
        utterances,
        toxic_utterance_fraction: fraction,
        has_toxic_speech: foul > 0,
    })
}
