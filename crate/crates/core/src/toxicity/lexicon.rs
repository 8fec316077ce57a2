use std::collections::BTreeMap;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{Attribute, ToxicityClient, ToxicityError, ToxicityScores};

/// One lexicon term and the attribute it contributes to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub term: String,
    pub attribute: Attribute,
    pub weight: f64,
}

/// Offline scorer: each attribute is `1 - Π(1 - w)` over the distinct lexicon
/// terms found in the text as whole-word token sequences (case-insensitive).
#[derive(Debug, Clone)]
pub struct LexiconScorer {
    terms: BTreeMap<Vec<String>, Vec<(Attribute, f64)>>,
    max_len: usize,
    word: Regex,
}

fn word_regex() -> Regex {
    Regex::new(r"[\p{L}\p{N}']+").expect("valid regex")
}

fn tokens(word: &Regex, text: &str) -> Vec<String> {
    word.find_iter(&text.to_lowercase()).map(|m| m.as_str().to_string()).collect()
}

impl LexiconScorer {
    pub fn new(entries: impl IntoIterator<Item = LexiconEntry>) -> Result<Self, ToxicityError> {
        let word = word_regex();
        let mut terms: BTreeMap<Vec<String>, Vec<(Attribute, f64)>> = BTreeMap::new();
        for e in entries {
            if !(0.0..=1.0).contains(&e.weight) {
                return Err(ToxicityError::OutOfRange(e.term));
            }
            let key = tokens(&word, &e.term);
            if key.is_empty() {
                continue;
            }
            terms.entry(key).or_default().push((e.attribute, e.weight));
        }
        let max_len = terms.keys().map(Vec::len).max().unwrap_or(0);
        Ok(Self { terms, max_len, word })
    }

    /// Parses `term,attribute,weight` CSV with a header row.
    pub fn parse_csv(text: &str) -> Result<Self, ToxicityError> {
        #[derive(Deserialize)]
        struct Row {
            term: String,
            attribute: String,
            weight: f64,
        }
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut entries = Vec::new();
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let row = row.map_err(|_| ToxicityError::MalformedLexicon(i + 2))?;
            entries.push(LexiconEntry {
                term: row.term,
                attribute: Attribute::parse(&row.attribute)?,
                weight: row.weight,
            });
        }
        Self::new(entries)
    }

    pub fn score_text(&self, text: &str) -> ToxicityScores {
        let toks = tokens(&self.word, text);
        let mut matched: Vec<&Vec<String>> = Vec::new();
        for start in 0..toks.len() {
            for len in 1..=self.max_len.min(toks.len() - start) {
                if let Some((key, _)) = self.terms.get_key_value(&toks[start..start + len]) {
                    matched.push(key);
                }
            }
        }
        matched.sort();
        matched.dedup();
        let mut keep = [1.0f64; 6];
        for key in matched {
            for &(attr, w) in &self.terms[key] {
                let idx = Attribute::ALL.iter().position(|&a| a == attr).expect("known attribute");
                keep[idx] *= 1.0 - w;
            }
        }
        let mut out = ToxicityScores::default();
        for (i, a) in Attribute::ALL.into_iter().enumerate() {
            out.set(a, 1.0 - keep[i]);
        }
        out
    }
}

impl ToxicityClient for LexiconScorer {
    fn score(&self, text: &str) -> Result<ToxicityScores, ToxicityError> {
        Ok(self.score_text(text))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scorer() -> LexiconScorer {
        LexiconScorer::parse_csv(
            "term,attribute,weight\nidiot,insult,0.8\ndamn,profanity,0.5\nbloody hell,profanity,0.5\nshut up,toxicity,0.3\n",
        )
        .unwrap()
    }

    #[test]
    fn hand_cases() {
        let s = scorer();
        assert_eq!(s.score_text("a perfectly polite remark"), ToxicityScores::default());
        assert_eq!(s.score_text("You IDIOT.").insult, 0.8);
        assert_eq!(s.score_text("damn, bloody hell").profanity, 0.75);
    }

    #[test]
    fn whole_words_and_distinct_terms() {
        let s = scorer();
        assert_eq!(s.score_text("idiotic"), ToxicityScores::default());
        assert_eq!(s.score_text("damn damn damn").profanity, 0.5);
        assert!((s.score_text("shut up").toxicity - 0.3).abs() < 1e-15);
        assert_eq!(s.score_text("shut the door, up").toxicity, 0.0);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(matches!(
            LexiconScorer::parse_csv("term,attribute,weight\nx,insult,high\n"),
            Err(ToxicityError::MalformedLexicon(2))
        ));
        assert!(LexiconScorer::parse_csv("term,attribute,weight\nx,insult,1.5\n").is_err());
        assert!(LexiconScorer::parse_csv("term,attribute,weight\nx,rudeness,0.5\n").is_err());
    }
}
