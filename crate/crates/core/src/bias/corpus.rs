use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{BiasError, BiasLabel};
use crate::model::TranscriptSegment;

const DEFAULT_KEYWORDS: &str = include_str!("../../data/keywords.json");

fn token_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"<per>|<party>|[\p{L}\p{N}']+").expect("valid token regex"))
}

/// Lowercase word tokens. The mask markers `<PER>` and `<PARTY>` survive as
/// single tokens; apostrophes stay inside words.
pub fn tokenize(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    token_regex()
        .find_iter(&lower)
        .map(|m| m.as_str().trim_matches('\'').to_string())
        .filter(|t| !t.is_empty())
        .collect()
}

/// Splits on `.`, `!` and `?`, trimming and dropping empty pieces.
pub fn split_sentences(text: &str) -> Vec<&str> {
    text.split(['.', '!', '?']).map(str::trim).filter(|s| !s.is_empty()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasCorpusConfig {
    #[serde(rename = "bjp")]
    pub bjp_keywords: Vec<String>,
    #[serde(rename = "opposition")]
    pub opposition_keywords: Vec<String>,
    /// Keywords masked as a party rather than a person.
    pub party_names: Vec<String>,
    #[serde(rename = "negation")]
    pub negation_keywords: Vec<String>,
    #[serde(default = "default_person_mask")]
    pub person_mask: String,
    #[serde(default = "default_party_mask")]
    pub party_mask: String,
}

fn default_person_mask() -> String {
    "<PER>".into()
}

fn default_party_mask() -> String {
    "<PARTY>".into()
}

impl Default for BiasCorpusConfig {
    fn default() -> Self {
        Self::from_json(DEFAULT_KEYWORDS).expect("shipped keyword file is valid")
    }
}

impl BiasCorpusConfig {
    pub fn from_json(text: &str) -> Result<Self, BiasError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| BiasError::InvalidKeywords(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), BiasError> {
        let bjp = self.side_set(&self.bjp_keywords);
        let opp = self.side_set(&self.opposition_keywords);
        if bjp.is_empty() || opp.is_empty() {
            return Err(BiasError::InvalidKeywords("both keyword lists must be nonempty".into()));
        }
        if let Some(k) = bjp.intersection(&opp).next() {
            return Err(BiasError::InvalidKeywords(format!("`{k}` is listed for both sides")));
        }
        for k in bjp.iter().chain(&opp) {
            if tokenize(k).len() != 1 {
                return Err(BiasError::InvalidKeywords(format!("keyword `{k}` is not a single word")));
            }
        }
        for p in &self.party_names {
            let p = p.to_lowercase();
            if !bjp.contains(&p) && !opp.contains(&p) {
                return Err(BiasError::InvalidKeywords(format!("party name `{p}` is not a keyword")));
            }
        }
        for mask in [&self.person_mask, &self.party_mask] {
            let toks = tokenize(mask);
            if toks.len() != 1 || bjp.contains(&toks[0]) || opp.contains(&toks[0]) {
                return Err(BiasError::InvalidKeywords(format!("mask `{mask}` collides with a keyword")));
            }
        }
        Ok(())
    }

    fn side_set(&self, words: &[String]) -> BTreeSet<String> {
        words.iter().map(|w| w.trim().to_lowercase()).collect()
    }

    fn negation_sequences(&self) -> Vec<Vec<String>> {
        self.negation_keywords.iter().map(|n| tokenize(n)).filter(|t| !t.is_empty()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSentence {
    pub video_id: String,
    /// Lowercased tokens joined by single spaces, keywords replaced by masks.
    pub text: String,
    pub label: BiasLabel,
}

fn contains_sequence(tokens: &[String], seq: &[String]) -> bool {
    !seq.is_empty() && tokens.windows(seq.len()).any(|w| w == seq)
}

/// Strips a possessive `'s` so that "modi's" matches "modi".
fn keyword_stem(token: &str) -> &str {
    token.strip_suffix("'s").unwrap_or(token)
}

struct Matcher {
    bjp: BTreeSet<String>,
    opp: BTreeSet<String>,
    parties: BTreeSet<String>,
    negations: Vec<Vec<String>>,
    person_mask: String,
    party_mask: String,
}

impl Matcher {
    fn new(cfg: &BiasCorpusConfig) -> Self {
        Self {
            bjp: cfg.side_set(&cfg.bjp_keywords),
            opp: cfg.side_set(&cfg.opposition_keywords),
            parties: cfg.side_set(&cfg.party_names),
            negations: cfg.negation_sequences(),
            person_mask: cfg.person_mask.clone(),
            party_mask: cfg.party_mask.clone(),
        }
    }

    fn sentence(&self, sentence: &str) -> Option<(String, BiasLabel)> {
        let tokens = tokenize(sentence);
        if self.negations.iter().any(|n| contains_sequence(&tokens, n)) {
            return None;
        }
        let has = |set: &BTreeSet<String>| tokens.iter().any(|t| set.contains(keyword_stem(t)));
        let label = match (has(&self.bjp), has(&self.opp)) {
            (true, false) => BiasLabel::Bjp,
            (false, true) => BiasLabel::Opposition,
            _ => return None,
        };
        let masked: Vec<&str> = tokens
            .iter()
            .map(|t| {
                let stem = keyword_stem(t);
                if self.parties.contains(stem) {
                    self.party_mask.as_str()
                } else if self.bjp.contains(stem) || self.opp.contains(stem) {
                    self.person_mask.as_str()
                } else {
                    t.as_str()
                }
            })
            .collect();
        Some((masked.join(" "), label))
    }
}

/// Masked single-side sentences from transcript segments. Sentences naming
/// both sides, neither side, or containing a negation are dropped.
pub fn build_corpus(segments: &[TranscriptSegment], cfg: &BiasCorpusConfig) -> Vec<CorpusSentence> {
    let matcher = Matcher::new(cfg);
    let mut out = Vec::new();
    for seg in segments {
        for s in split_sentences(&seg.text) {
            if let Some((text, label)) = matcher.sentence(s) {
                out.push(CorpusSentence {
                    video_id: seg.video_id.clone(),
                    text,
                    label,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(text: &str) -> TranscriptSegment {
        TranscriptSegment {
            video_id: "v".into(),
            start_s: 0.0,
            end_s: 1.0,
            speaker: "S".into(),
            text: text.into(),
            overlapped: false,
        }
    }

    #[test]
    fn tokenization() {
        assert_eq!(tokenize("<PER> won, didn't he?"), vec!["<per>", "won", "didn't", "he"]);
        assert_eq!(tokenize("'quoted' words"), vec!["quoted", "words"]);
        assert_eq!(split_sentences("A. B! C? "), vec!["A", "B", "C"]);
    }

    #[test]
    fn examples() {
        let cfg = BiasCorpusConfig::default();
        let out = build_corpus(&[seg("modi won the vote")], &cfg);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].text, "<PER> won the vote");
        assert_eq!(out[0].label, BiasLabel::Bjp);

        assert!(build_corpus(&[seg("rahul and modi met")], &cfg).is_empty());
        assert!(build_corpus(&[seg("congress will not apologize")], &cfg).is_empty());
        assert!(build_corpus(&[seg("the weather is fine")], &cfg).is_empty());

        let out = build_corpus(&[seg("Congress rallied. Modi's speech! BJP should not gloat")], &cfg);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].text, "<PARTY> rallied");
        assert_eq!(out[0].label, BiasLabel::Opposition);
        assert_eq!(out[1].text, "<PER> speech");
    }

    #[test]
    fn multiword_negation_is_a_token_sequence() {
        let cfg = BiasCorpusConfig::default();
        assert!(build_corpus(&[seg("modi will not come")], &cfg).is_empty());
        assert_eq!(build_corpus(&[seg("modi will knot come")], &cfg).len(), 1);
    }

    #[test]
    fn config_validation() {
        let mut cfg = BiasCorpusConfig::default();
        cfg.opposition_keywords.push("Modi".into());
        assert!(cfg.validate().is_err());
        let mut cfg = BiasCorpusConfig::default();
        cfg.party_names.push("shiv sena".into());
        assert!(cfg.validate().is_err());
    }
}
