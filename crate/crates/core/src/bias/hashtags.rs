use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use regex::Regex;

use crate::ingest::OcrRow;

fn hashtag_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"#[A-Za-z0-9_]+").expect("valid hashtag regex"))
}

/// Hashtags in order of first appearance, deduplicated case-insensitively
/// and keeping the casing seen first.
pub fn extract_hashtags<'a, I>(texts: I) -> Vec<String>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for text in texts {
        for m in hashtag_regex().find_iter(text) {
            if seen.insert(m.as_str().to_lowercase()) {
                out.push(m.as_str().to_string());
            }
        }
    }
    out
}

/// Hashtags per video, reading OCR rows in timestamp order.
pub fn hashtags_per_video(rows: &[OcrRow]) -> BTreeMap<String, Vec<String>> {
    let mut by_video: BTreeMap<&str, Vec<&OcrRow>> = BTreeMap::new();
    for r in rows {
        by_video.entry(r.video_id.as_str()).or_default().push(r);
    }
    by_video
        .into_iter()
        .map(|(v, mut rs)| {
            rs.sort_by(|a, b| a.t_s.total_cmp(&b.t_s));
            (v.to_string(), extract_hashtags(rs.iter().map(|r| r.text.as_str())))
        })
        .collect()
}
