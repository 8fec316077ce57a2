//! Topic categories from video tags: a tag → category table plus a priority
//! ladder that picks one major category per video.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Deserialize;
use thiserror::Error;

use crate::model::{CategoryId, VideoRecord};

const DEFAULT_TAGMAP: &str = include_str!("../data/tagmap.csv");
const DEFAULT_PRIORITY: &str = include_str!("../data/priority.txt");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CategorizeError {
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("category set is empty")]
    EmptyCategorySet,
    #[error("duplicate category `{0}` in priority ladder")]
    DuplicateCategory(String),
    #[error("priority ladder is empty")]
    EmptyLadder,
    #[error("line {0}: malformed row")]
    MalformedRow(usize),
}

/// Lowercases and collapses internal whitespace.
pub fn normalize_tag(tag: &str) -> String {
    tag.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Ordered categories, highest priority first.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorityLadder {
    order: Vec<CategoryId>,
    rank: HashMap<CategoryId, usize>,
}

impl PriorityLadder {
    pub fn new(order: Vec<CategoryId>) -> Result<Self, CategorizeError> {
        if order.is_empty() {
            return Err(CategorizeError::EmptyLadder);
        }
        let mut rank = HashMap::with_capacity(order.len());
        for (i, c) in order.iter().enumerate() {
            if rank.insert(c.clone(), i).is_some() {
                return Err(CategorizeError::DuplicateCategory(c.to_string()));
            }
        }
        Ok(Self { order, rank })
    }

    /// One category per non-blank line.
    pub fn parse(text: &str) -> Result<Self, CategorizeError> {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(CategoryId::from)
                .collect(),
        )
    }

    pub fn rank(&self, category: &CategoryId) -> Option<usize> {
        self.rank.get(category).copied()
    }

    pub fn contains(&self, category: &CategoryId) -> bool {
        self.rank.contains_key(category)
    }

    pub fn categories(&self) -> &[CategoryId] {
        &self.order
    }

    /// The lowest-priority entry, used as the fallback category.
    pub fn last(&self) -> &CategoryId {
        self.order.last().expect("ladder is nonempty")
    }
}

impl Default for PriorityLadder {
    fn default() -> Self {
        Self::parse(DEFAULT_PRIORITY).expect("shipped priority ladder is valid")
    }
}

/// Normalized tag → category mapping.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TagMap {
    map: BTreeMap<String, CategoryId>,
}

#[derive(Deserialize)]
struct TagRow {
    tag: String,
    category: String,
}

impl TagMap {
    /// Parses `tag,category` CSV and checks every target against the ladder.
    pub fn parse(csv_text: &str, ladder: &PriorityLadder) -> Result<Self, CategorizeError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(csv_text.as_bytes());
        let mut map = BTreeMap::new();
        for (i, row) in reader.deserialize::<TagRow>().enumerate() {
            let row = row.map_err(|_| CategorizeError::MalformedRow(i + 2))?;
            let category = CategoryId::new(row.category);
            if !ladder.contains(&category) {
                return Err(CategorizeError::UnknownCategory(category.to_string()));
            }
            map.insert(normalize_tag(&row.tag), category);
        }
        Ok(Self { map })
    }

    pub fn shipped(ladder: &PriorityLadder) -> Result<Self, CategorizeError> {
        Self::parse(DEFAULT_TAGMAP, ladder)
    }

    pub fn get(&self, tag: &str) -> Option<&CategoryId> {
        self.map.get(&normalize_tag(tag))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Union of tag-mapped categories and externally supplied suggestions.
pub fn categories_for(
    record: &VideoRecord,
    tagmap: &TagMap,
    suggestions: &BTreeSet<CategoryId>,
    ladder: &PriorityLadder,
) -> Result<BTreeSet<CategoryId>, CategorizeError> {
    let mut out: BTreeSet<CategoryId> = record.tags.iter().filter_map(|t| tagmap.get(t)).cloned().collect();
    for s in suggestions {
        if !ladder.contains(s) {
            return Err(CategorizeError::UnknownCategory(s.to_string()));
        }
        out.insert(s.clone());
    }
    Ok(out)
}

/// Splits a category set into its highest-priority member and the rest.
pub fn assign_major_minor(
    categories: &BTreeSet<CategoryId>,
    ladder: &PriorityLadder,
) -> Result<(CategoryId, BTreeSet<CategoryId>), CategorizeError> {
    let mut best: Option<(usize, &CategoryId)> = None;
    for c in categories {
        let r = ladder.rank(c).ok_or_else(|| CategorizeError::UnknownCategory(c.to_string()))?;
        if best.map_or(true, |(br, _)| r < br) {
            best = Some((r, c));
        }
    }
    let (_, major) = best.ok_or(CategorizeError::EmptyCategorySet)?;
    let major = major.clone();
    let minors = categories.iter().filter(|c| **c != major).cloned().collect();
    Ok((major, minors))
}

/// Sets the record's major and minor categories. An empty category set falls
/// back to the ladder's last entry.
pub fn categorize_record(
    record: &mut VideoRecord,
    tagmap: &TagMap,
    suggestions: &BTreeSet<CategoryId>,
    ladder: &PriorityLadder,
) -> Result<(), CategorizeError> {
    let cats = categories_for(record, tagmap, suggestions, ladder)?;
    let (major, minors) = if cats.is_empty() {
        (ladder.last().clone(), BTreeSet::new())
    } else {
        assign_major_minor(&cats, ladder)?
    };
    record.major_category = Some(major);
    record.minor_categories = minors;
    Ok(())
}

#[derive(Deserialize)]
struct SuggestionRow {
    video_id: String,
    categories: Vec<String>,
}

/// Parses `suggestions.jsonl` (`{video_id, categories}` per line).
pub fn parse_suggestions(text: &str) -> Result<BTreeMap<String, BTreeSet<CategoryId>>, CategorizeError> {
    let mut out: BTreeMap<String, BTreeSet<CategoryId>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: SuggestionRow = serde_json::from_str(line).map_err(|_| CategorizeError::MalformedRow(i + 1))?;
        out.entry(row.video_id)
            .or_default()
            .extend(row.categories.into_iter().map(CategoryId::new));
    }
    Ok(out)
}
