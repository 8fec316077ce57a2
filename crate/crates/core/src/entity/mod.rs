//! Panelist name resolution: normalization, phonetic keys, fuzzy matching and
//! greedy clustering of per-video name candidates.

mod cluster;
mod fuzzy;
mod metaphone;
mod roster;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cluster::{cluster_names, ClusterOptions, NameIndex};
pub use fuzzy::{levenshtein, partial_token_sort_ratio};
pub use metaphone::{metaphone_word, phonetic_key};
pub use roster::{attach_roster, parse_roster, RosterError, RosterRow};

const DEFAULT_HONORIFICS: &str = include_str!("../../data/honorifics.txt");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EntityError {
    #[error("`{0}` is empty after normalization")]
    EmptyAfterNormalization(String),
}

/// Name normalizer with a configurable honorific list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameNormalizer {
    honorifics: BTreeSet<String>,
}

impl NameNormalizer {
    pub fn new<I, S>(honorifics: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            honorifics: honorifics
                .into_iter()
                .map(|h| h.as_ref().trim().to_lowercase())
                .filter(|h| !h.is_empty())
                .collect(),
        }
    }

    /// Lowercases, turns hyphens into spaces, drops other non-alphanumerics,
    /// collapses whitespace and strips honorific tokens from both ends.
    pub fn normalize(&self, raw: &str) -> Result<String, EntityError> {
        let cleaned: String = raw
            .to_lowercase()
            .chars()
            .filter_map(|c| match c {
                '-' => Some(' '),
                c if c.is_whitespace() => Some(' '),
                c if c.is_alphanumeric() => Some(c),
                _ => None,
            })
            .collect();
        let mut tokens: &[&str] = &cleaned.split_whitespace().collect::<Vec<_>>();
        while let Some((first, rest)) = tokens.split_first() {
            if !self.honorifics.contains(*first) {
                break;
            }
            tokens = rest;
        }
        while let Some((last, rest)) = tokens.split_last() {
            if !self.honorifics.contains(*last) {
                break;
            }
            tokens = rest;
        }
        if tokens.is_empty() {
            return Err(EntityError::EmptyAfterNormalization(raw.to_string()));
        }
        Ok(tokens.join(" "))
    }
}

impl Default for NameNormalizer {
    fn default() -> Self {
        Self::new(DEFAULT_HONORIFICS.lines())
    }
}

fn default_normalizer() -> &'static NameNormalizer {
    static CELL: OnceLock<NameNormalizer> = OnceLock::new();
    CELL.get_or_init(NameNormalizer::default)
}

/// [`NameNormalizer::normalize`] with the shipped honorific list.
pub fn normalize_name(raw: &str) -> Result<String, EntityError> {
    default_normalizer().normalize(raw)
}

/// A raw name together with its normalized form and phonetic key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameKey {
    pub raw: String,
    pub normalized: String,
    pub phonetic: String,
}

impl NameKey {
    pub fn new(raw: &str, normalizer: &NameNormalizer) -> Result<Self, EntityError> {
        let normalized = normalizer.normalize(raw)?;
        let phonetic = phonetic_key(&normalized);
        Ok(Self {
            raw: raw.to_string(),
            normalized,
            phonetic,
        })
    }
}
