use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::NameNormalizer;
use crate::model::{Occupation, PanelistCluster};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RosterError {
    #[error("line {0}: malformed roster row")]
    MalformedRow(usize),
    #[error("line {line}: {message}")]
    UnknownOccupation { line: usize, message: String },
}

/// One manually coded panelist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterRow {
    pub canonical_name: String,
    pub occupation: Option<Occupation>,
    pub affiliation: Option<String>,
}

#[derive(Deserialize)]
struct RawRow {
    canonical_name: String,
    #[serde(default)]
    occupation: String,
    #[serde(default)]
    affiliation: String,
}

fn blank(s: &str) -> bool {
    let s = s.trim();
    s.is_empty() || s.eq_ignore_ascii_case("none")
}

/// Parses `canonical_name,occupation,affiliation` CSV. Empty or `None`
/// occupation and affiliation cells become `None`.
pub fn parse_roster(text: &str) -> Result<Vec<RosterRow>, RosterError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, row) in reader.deserialize::<RawRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|_| RosterError::MalformedRow(line))?;
        let occupation = if blank(&row.occupation) {
            None
        } else {
            Some(
                row.occupation
                    .parse()
                    .map_err(|message| RosterError::UnknownOccupation { line, message })?,
            )
        };
        rows.push(RosterRow {
            canonical_name: row.canonical_name,
            occupation,
            affiliation: (!blank(&row.affiliation)).then(|| row.affiliation.trim().to_string()),
        });
    }
    Ok(rows)
}

/// Joins roster rows onto clusters by exact canonical name. Returns the
/// updated clusters and the roster rows that matched no cluster.
pub fn attach_roster(
    clusters: &[PanelistCluster],
    roster: &[RosterRow],
    normalizer: &NameNormalizer,
) -> (Vec<PanelistCluster>, Vec<RosterRow>) {
    let by_name: HashMap<&str, usize> = clusters
        .iter()
        .enumerate()
        .map(|(i, c)| (c.canonical_name.as_str(), i))
        .collect();
    let mut out = clusters.to_vec();
    let mut unmatched = Vec::new();
    for row in roster {
        let key = normalizer
            .normalize(&row.canonical_name)
            .unwrap_or_else(|_| row.canonical_name.trim().to_lowercase());
        match by_name.get(key.as_str()) {
            Some(&i) => {
                out[i].occupation = row.occupation;
                out[i].affiliation = row.affiliation.clone();
            }
            None => unmatched.push(row.clone()),
        }
    }
    (out, unmatched)
}
