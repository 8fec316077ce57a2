use serde::{Deserialize, Serialize};

use super::AudioError;
use crate::model::TranscriptSegment;

/// Majority-vote window over per-second labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(try_from = "RawSmoothing")]
pub struct Smoothing {
    window: usize,
    min_votes: usize,
}

#[derive(Deserialize)]
struct RawSmoothing {
    window: usize,
    min_votes: usize,
}

impl TryFrom<RawSmoothing> for Smoothing {
    type Error = AudioError;

    fn try_from(raw: RawSmoothing) -> Result<Self, Self::Error> {
        Smoothing::new(raw.window, raw.min_votes)
    }
}

impl Smoothing {
    /// `window` must be odd and `1 <= min_votes <= window`.
    pub fn new(window: usize, min_votes: usize) -> Result<Self, AudioError> {
        if window % 2 == 0 || min_votes == 0 || min_votes > window {
            return Err(AudioError::InvalidSmoothing { window, min_votes });
        }
        Ok(Self { window, min_votes })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn min_votes(&self) -> usize {
        self.min_votes
    }

    /// Relabels each second by vote over the centered window. Windows cut by
    /// either edge need `ceil(min_votes * len / window)` positive votes.
    pub fn relabel(&self, labels: &[bool]) -> Vec<bool> {
        let half = self.window / 2;
        (0..labels.len())
            .map(|i| {
                let lo = i.saturating_sub(half);
                let hi = (i + half + 1).min(labels.len());
                let len = hi - lo;
                let needed = (self.min_votes * len).div_ceil(self.window);
                labels[lo..hi].iter().filter(|&&l| l).count() >= needed
            })
            .collect()
    }

    /// Relabels and merges maximal positive runs into `(start_s, end_s)` spans
    /// at one-second resolution.
    pub fn segments(&self, labels: &[bool]) -> Vec<(f64, f64)> {
        runs(&self.relabel(labels))
    }
}

impl Default for Smoothing {
    fn default() -> Self {
        Self { window: 5, min_votes: 3 }
    }
}

impl Serialize for Smoothing {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("Smoothing", 2)?;
        st.serialize_field("window", &self.window)?;
        st.serialize_field("min_votes", &self.min_votes)?;
        st.end()
    }
}

/// Maximal runs of `true` as `(start, end)` second spans.
pub fn runs(labels: &[bool]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &l) in labels.iter().enumerate() {
        match (l, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s as f64, i as f64));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s as f64, labels.len() as f64));
    }
    out
}

/// Convenience wrapper around [`Smoothing`].
pub fn smooth_segments(labels: &[bool], window: usize, min_votes: usize) -> Result<Vec<(f64, f64)>, AudioError> {
    Ok(Smoothing::new(window, min_votes)?.segments(labels))
}

/// Sums after sorting so the total does not depend on input order.
fn order_free_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.into_iter().sum()
}

/// Fraction of the video covered by shouting segments.
pub fn shouting_fraction(segments: &[(f64, f64)], duration_s: f64) -> Result<f64, AudioError> {
    if !(duration_s > 0.0) {
        return Err(AudioError::ZeroDuration);
    }
    let total = order_free_sum(segments.iter().map(|(s, e)| (e - s).max(0.0)).collect());
    Ok((total / duration_s).clamp(0.0, 1.0))
}

/// Overlapped speech duration over total speech duration; 0 without speech.
pub fn overlap_fraction(segments: &[TranscriptSegment]) -> f64 {
    let total = order_free_sum(segments.iter().map(TranscriptSegment::duration_s).collect());
    if total <= 0.0 {
        return 0.0;
    }
    let overlapped = order_free_sum(
        segments
            .iter()
            .filter(|s| s.overlapped)
            .map(TranscriptSegment::duration_s)
            .collect(),
    );
    overlapped / total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &[u8]) -> Vec<bool> {
        s.iter().map(|&b| b == 1).collect()
    }

    #[test]
    fn examples() {
        assert!(smooth_segments(&bits(&[0, 0, 1, 0, 0]), 5, 3).unwrap().is_empty());
        assert_eq!(smooth_segments(&bits(&[1, 1, 1, 1, 1]), 5, 3).unwrap(), vec![(0.0, 5.0)]);
        assert_eq!(smooth_segments(&bits(&[1, 1, 0, 1, 1]), 3, 2).unwrap(), vec![(0.0, 5.0)]);
        assert!(smooth_segments(&[], 5, 3).unwrap().is_empty());
    }

    #[test]
    fn invalid_parameters() {
        assert!(Smoothing::new(4, 2).is_err());
        assert!(Smoothing::new(3, 4).is_err());
        assert!(Smoothing::new(3, 0).is_err());
        assert!(serde_json::from_str::<Smoothing>(r#"{"window":4,"min_votes":1}"#).is_err());
        let ok: Smoothing = serde_json::from_str(r#"{"window":3,"min_votes":2}"#).unwrap();
        assert_eq!(ok, Smoothing::new(3, 2).unwrap());
    }

    #[test]
    fn fractions() {
        assert_eq!(shouting_fraction(&[], 100.0).unwrap(), 0.0);
        assert!((shouting_fraction(&[(0.0, 50.0), (100.0, 140.0)], 1000.0).unwrap() - 0.09).abs() < 1e-15);
        assert!(matches!(shouting_fraction(&[], 0.0), Err(AudioError::ZeroDuration)));
        let seg = |a: f64, b: f64, o: bool| TranscriptSegment {
            video_id: "v".into(),
            start_s: a,
            end_s: b,
            speaker: "s".into(),
            text: "t".into(),
            overlapped: o,
        };
        assert_eq!(overlap_fraction(&[seg(0.0, 80.0, false), seg(80.0, 100.0, true)]), 0.2);
        assert_eq!(overlap_fraction(&[]), 0.0);
    }
}
