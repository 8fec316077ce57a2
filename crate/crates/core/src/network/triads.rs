use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::NetworkError;
use crate::stats::{welch_t, TTestResult, Tail};

const DEFAULT_PARTY_TABLE: &str = include_str!("../../data/party_table.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PartySide {
    Opposition,
    Bjp,
    Other,
}

impl PartySide {
    fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "BJP" => Some(Self::Bjp),
            "OPPOSITION" => Some(Self::Opposition),
            "OTHER" => Some(Self::Other),
            _ => None,
        }
    }
}

/// Affiliation → side lookup, case-insensitive.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartyTable {
    sides: BTreeMap<String, PartySide>,
}

impl PartyTable {
    /// Parses `affiliation,side` CSV with a header row.
    pub fn parse(csv_text: &str) -> Result<Self, NetworkError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(csv_text.as_bytes());
        let mut sides = BTreeMap::new();
        for (i, row) in reader.records().enumerate() {
            let row = row.map_err(|_| NetworkError::MalformedPartyRow(i + 2))?;
            if row.len() != 2 {
                return Err(NetworkError::MalformedPartyRow(i + 2));
            }
            let side = PartySide::parse(&row[1]).ok_or_else(|| NetworkError::UnknownSide(row[1].to_string()))?;
            sides.insert(row[0].to_lowercase(), side);
        }
        Ok(Self { sides })
    }

    pub fn shipped() -> Self {
        Self::parse(DEFAULT_PARTY_TABLE).expect("shipped party table is valid")
    }

    pub fn side(&self, affiliation: &str) -> Option<PartySide> {
        self.sides.get(&affiliation.trim().to_lowercase()).copied()
    }
}

/// Three affiliations with one side outnumbering the other 2 to 1.
/// Members are stored opposition first, then BJP, each group sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triad {
    members: [String; 3],
}

impl Triad {
    /// Returns `None` unless the sides are {1 BJP, 2 opposition} or
    /// {2 BJP, 1 opposition}.
    pub fn new(members: [(&str, PartySide); 3]) -> Option<Self> {
        let bjp = members.iter().filter(|m| m.1 == PartySide::Bjp).count();
        let opp = members.iter().filter(|m| m.1 == PartySide::Opposition).count();
        if bjp + opp != 3 || bjp == 0 || opp == 0 {
            return None;
        }
        let mut sorted: Vec<(PartySide, String)> = members.iter().map(|(a, s)| (*s, a.trim().to_string())).collect();
        sorted.sort();
        Some(Self {
            members: [sorted[0].1.clone(), sorted[1].1.clone(), sorted[2].1.clone()],
        })
    }

    pub fn members(&self) -> &[String; 3] {
        &self.members
    }
}

impl fmt::Display for Triad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}", self.members[0], self.members[1], self.members[2])
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriadCounting {
    /// Each distinct triad counts once per video.
    #[default]
    OncePerVideo,
    /// Every qualifying 3-combination of panelists counts.
    PerCombination,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TriadOptions {
    pub min_freq: usize,
    pub counting: TriadCounting,
}

impl Default for TriadOptions {
    fn default() -> Self {
        Self {
            min_freq: 50,
            counting: TriadCounting::OncePerVideo,
        }
    }
}

/// Qualifying triads among a video's panelist affiliations. Affiliations
/// outside the party table or on neither side are ignored.
pub fn video_triads(affiliations: &[String], table: &PartyTable, counting: TriadCounting) -> Vec<Triad> {
    let members: Vec<(&str, PartySide)> = affiliations
        .iter()
        .filter_map(|a| table.side(a).map(|s| (a.as_str(), s)))
        .filter(|(_, s)| *s != PartySide::Other)
        .collect();
    let mut out = Vec::new();
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            for k in j + 1..members.len() {
                if let Some(t) = Triad::new([members[i], members[j], members[k]]) {
                    out.push(t);
                }
            }
        }
    }
    if counting == TriadCounting::OncePerVideo {
        out.sort();
        out.dedup();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriadRow {
    pub triad: Triad,
    pub frequency: usize,
    pub n_videos: usize,
    /// Mean incivility over the videos containing the triad.
    pub mean_incivility: f64,
    /// One-tailed Welch test of those videos against all videos; `None` when
    /// the test is undefined.
    pub t_test: Option<TTestResult>,
}

fn sorted_sum(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs.into_iter().sum()
}

/// Frequency, mean incivility and significance for every triad seen at least
/// `min_freq` times. Videos without an incivility value are skipped. Rows
/// are ordered by descending frequency, then by triad.
pub fn triad_incivility(
    affiliations: &BTreeMap<String, Vec<String>>,
    incivility: &BTreeMap<String, f64>,
    table: &PartyTable,
    options: TriadOptions,
) -> Vec<TriadRow> {
    let mut counts: BTreeMap<Triad, usize> = BTreeMap::new();
    let mut videos: BTreeMap<Triad, BTreeSet<&str>> = BTreeMap::new();
    for (video, affs) in affiliations {
        if !incivility.contains_key(video) {
            continue;
        }
        for t in video_triads(affs, table, options.counting) {
            *counts.entry(t.clone()).or_insert(0) += 1;
            videos.entry(t).or_default().insert(video.as_str());
        }
    }
    let all: Vec<f64> = incivility.values().copied().collect();
    let mut rows: Vec<TriadRow> = counts
        .into_iter()
        .filter(|(_, n)| *n >= options.min_freq)
        .map(|(triad, frequency)| {
            let values: Vec<f64> = videos[&triad].iter().map(|v| incivility[*v]).collect();
            let n_videos = values.len();
            let t_test = welch_t(&values, &all, Tail::OneGreater).ok();
            TriadRow {
                mean_incivility: sorted_sum(values) / n_videos as f64,
                triad,
                frequency,
                n_videos,
                t_test,
            }
        })
        .collect();
    rows.sort_by(|a, b| b.frequency.cmp(&a.frequency).then_with(|| a.triad.cmp(&b.triad)));
    rows
}
