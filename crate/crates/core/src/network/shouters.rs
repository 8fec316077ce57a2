use std::collections::BTreeSet;

use crate::ingest::intersection;
use crate::model::TranscriptSegment;

/// A speaker takes part in shouting when one of their turns overlaps a
/// shouting segment by more than this many seconds.
pub const SHOUTER_MIN_INTERSECTION_S: f64 = 0.5;

/// Number of distinct speakers whose turns intersect any shouting segment by
/// more than [`SHOUTER_MIN_INTERSECTION_S`].
pub fn shouters_per_video(shouting: &[(f64, f64)], segments: &[TranscriptSegment]) -> usize {
    let mut speakers: BTreeSet<&str> = BTreeSet::new();
    for seg in segments {
        if shouting
            .iter()
            .any(|&s| intersection(s, (seg.start_s, seg.end_s)) > SHOUTER_MIN_INTERSECTION_S)
        {
            speakers.insert(seg.speaker.as_str());
        }
    }
    speakers.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(speaker: &str, start: f64, end: f64) -> TranscriptSegment {
        TranscriptSegment {
            video_id: "v".into(),
            start_s: start,
            end_s: end,
            speaker: speaker.into(),
            text: String::new(),
            overlapped: false,
        }
    }

    #[test]
    fn counting() {
        let segs = vec![seg("A", 0.0, 5.0), seg("B", 5.0, 10.0), seg("A", 10.0, 12.0)];
        assert_eq!(shouters_per_video(&[], &segs), 0);
        assert_eq!(shouters_per_video(&[(3.0, 8.0)], &segs), 2);
        assert_eq!(shouters_per_video(&[(4.7, 6.0)], &segs), 1);
        assert_eq!(shouters_per_video(&[(4.7, 5.3)], &segs), 0);
    }
}
