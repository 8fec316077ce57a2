//! Shared domain types and their invariants.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// A topic label drawn from the category vocabulary (see [`crate::categorize`]).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoryId(String);

impl CategoryId {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CategoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CategoryId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

/// One debate video as described by its platform metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub video_id: String,
    pub title: String,
    pub description: String,
    pub tags: Vec<String>,
    pub duration_s: f64,
    pub published_at: DateTime<Utc>,
    #[serde(default)]
    pub major_category: Option<CategoryId>,
    #[serde(default)]
    pub minor_categories: BTreeSet<CategoryId>,
}

/// A diarized utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptSegment {
    pub video_id: String,
    pub start_s: f64,
    pub end_s: f64,
    pub speaker: String,
    pub text: String,
    #[serde(default)]
    pub overlapped: bool,
}

impl TranscriptSegment {
    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    /// Accepts the spellings emitted by common face-attribute models.
    pub fn parse_label(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "male" | "m" | "man" => Some(Gender::Male),
            "female" | "f" | "woman" => Some(Gender::Female),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
        }
    }
}

/// One detected face at a sampled frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceObservation {
    pub video_id: String,
    pub t_s: f64,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub gender: Gender,
    pub confidence: f64,
}

impl FaceObservation {
    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

/// Panelist occupation codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Occupation {
    TvRelated,
    Academic,
    Accountant,
    Activist,
    Advocate,
    Analyst,
    Author,
    CivilServant,
    Consultant,
    Doctor,
    FilmRelated,
    Journalist,
    Politician,
    ReligiousLeader,
    SocialLeader,
    Spokesperson,
}

impl FromStr for Occupation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { ' ' })
            .collect();
        let key = key.split_whitespace().collect::<Vec<_>>().join(" ");
        let occ = match key.as_str() {
            "tv related" | "tv" => Occupation::TvRelated,
            "academic" | "academics" => Occupation::Academic,
            "accountant" => Occupation::Accountant,
            "activist" => Occupation::Activist,
            "advocate" => Occupation::Advocate,
            "analyst" => Occupation::Analyst,
            "author" => Occupation::Author,
            "civil servant" => Occupation::CivilServant,
            "consultant" => Occupation::Consultant,
            "doctor" => Occupation::Doctor,
            "film related" | "film" => Occupation::FilmRelated,
            "journalist" => Occupation::Journalist,
            "politician" => Occupation::Politician,
            "religious leader" => Occupation::ReligiousLeader,
            "social leader" => Occupation::SocialLeader,
            "spokesperson" => Occupation::Spokesperson,
            _ => return Err(format!("unknown occupation `{s}`")),
        };
        Ok(occ)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClusterId(pub u32);

impl fmt::Display for ClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A resolved panelist identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelistCluster {
    pub cluster_id: ClusterId,
    pub canonical_name: String,
    pub variants: BTreeSet<String>,
    pub occupation: Option<Occupation>,
    pub affiliation: Option<String>,
    /// Number of videos in which any variant was proposed.
    pub frequency: u32,
    /// Set when every variant was seen in a single video only.
    pub low_confidence: bool,
}

/// Per-video metric bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoAnalysis {
    pub video_id: String,
    pub overlap_fraction: f64,
    pub toxic_utterance_fraction: f64,
    pub has_toxic_speech: bool,
    pub shouting_fraction: f64,
    pub shouting_segments: Vec<(f64, f64)>,
    pub male_face_seconds: f64,
    pub female_face_seconds: f64,
    pub panelists: BTreeSet<ClusterId>,
}

impl VideoAnalysis {
    /// Checks the bundle's own invariants against the owning video's duration.
    pub fn check(&self, duration_s: f64) -> Result<(), String> {
        for (name, v) in [
            ("overlap_fraction", self.overlap_fraction),
            ("toxic_utterance_fraction", self.toxic_utterance_fraction),
            ("shouting_fraction", self.shouting_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} = {v} outside [0, 1]"));
            }
        }
        if self.has_toxic_speech != (self.toxic_utterance_fraction > 0.0) {
            return Err("has_toxic_speech disagrees with toxic_utterance_fraction".into());
        }
        let mut prev_end = f64::NEG_INFINITY;
        for &(s, e) in &self.shouting_segments {
            if !(s < e) || s < prev_end || s < 0.0 || e > duration_s {
                return Err(format!("shouting segment ({s}, {e}) is not disjoint, sorted and in range"));
            }
            prev_end = e;
        }
        Ok(())
    }
}

/// Duration window for admitting a video to analysis. Both bounds are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdmissionBounds {
    pub min_duration_s: f64,
    pub max_duration_s: f64,
}

impl Default for AdmissionBounds {
    fn default() -> Self {
        Self {
            min_duration_s: 600.0,
            max_duration_s: 14_400.0,
        }
    }
}

impl AdmissionBounds {
    pub fn admits(&self, record: &VideoRecord) -> bool {
        record.duration_s >= self.min_duration_s && record.duration_s <= self.max_duration_s
    }
}

/// Default-bounds admission check (10 minutes to 4 hours, inclusive).
pub fn admit_for_analysis(record: &VideoRecord) -> bool {
    AdmissionBounds::default().admits(record)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationReason {
    EmptyVideoId,
    DuplicateVideoId,
    NonpositiveDuration,
    MajorAlsoMinor,
    ForeignSegment,
    NegativeStart,
    InvertedSpan,
    BeyondDuration,
    EmptyText,
    NonpositiveBox,
    ConfidenceOutOfRange,
    OffSamplingGrid,
}

impl fmt::Display for ValidationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ValidationReason::EmptyVideoId => "empty video id",
            ValidationReason::DuplicateVideoId => "duplicate video id",
            ValidationReason::NonpositiveDuration => "nonpositive duration",
            ValidationReason::MajorAlsoMinor => "major category also listed as minor",
            ValidationReason::ForeignSegment => "segment belongs to another video",
            ValidationReason::NegativeStart => "negative start time",
            ValidationReason::InvertedSpan => "inverted span",
            ValidationReason::BeyondDuration => "segment ends after the video",
            ValidationReason::EmptyText => "empty text on a non-overlapped segment",
            ValidationReason::NonpositiveBox => "nonpositive face box",
            ValidationReason::ConfidenceOutOfRange => "confidence outside [0, 1]",
            ValidationReason::OffSamplingGrid => "timestamp not on the sampling grid",
        };
        f.write_str(s)
    }
}

/// One invariant violation. `locator` pins the offending item without relying on
/// its position in the input, so reports are stable under reordering.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ValidationError {
    pub video_id: String,
    pub field: String,
    pub locator: String,
    pub reason: ValidationReason,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} {}: {}", self.video_id, self.field, self.locator, self.reason)
    }
}

/// Checks a video record and its transcript against the model invariants.
///
/// The result is sorted, so it does not depend on segment order.
pub fn validate_video(record: &VideoRecord, segments: &[TranscriptSegment]) -> Vec<ValidationError> {
    let mut errors = Vec::new();
    let vid = record.video_id.clone();
    let mut push = |field: &str, locator: String, reason| {
        errors.push(ValidationError {
            video_id: vid.clone(),
            field: field.to_string(),
            locator,
            reason,
        })
    };

    if record.video_id.is_empty() {
        push("video_id", String::new(), ValidationReason::EmptyVideoId);
    }
    if !(record.duration_s > 0.0) {
        push("duration_s", String::new(), ValidationReason::NonpositiveDuration);
    }
    if let Some(major) = &record.major_category {
        if record.minor_categories.contains(major) {
            push("major_category", major.to_string(), ValidationReason::MajorAlsoMinor);
        }
    }

    let duration_known = record.duration_s > 0.0;
    for seg in segments {
        let loc = format!("[{}, {}] {}", seg.start_s, seg.end_s, seg.speaker);
        if seg.video_id != record.video_id {
            push("segment.video_id", loc.clone(), ValidationReason::ForeignSegment);
        }
        if seg.start_s < 0.0 {
            push("segment.start_s", loc.clone(), ValidationReason::NegativeStart);
        }
        if !(seg.start_s < seg.end_s) {
            push("segment.end_s", loc.clone(), ValidationReason::InvertedSpan);
        }
        if duration_known && seg.end_s > record.duration_s {
            push("segment.end_s", loc.clone(), ValidationReason::BeyondDuration);
        }
        if seg.text.is_empty() && !seg.overlapped {
            push("segment.text", loc, ValidationReason::EmptyText);
        }
    }

    errors.sort();
    errors
}

/// Flags repeated video ids across a corpus.
pub fn validate_corpus_ids<'a>(ids: impl IntoIterator<Item = &'a str>) -> Vec<ValidationError> {
    let mut seen = BTreeSet::new();
    let mut errors = Vec::new();
    for id in ids {
        if !seen.insert(id) {
            errors.push(ValidationError {
                video_id: id.to_string(),
                field: "video_id".into(),
                locator: String::new(),
                reason: ValidationReason::DuplicateVideoId,
            });
        }
    }
    errors.sort();
    errors
}

/// Checks face rows: positive box, confidence in [0, 1], timestamp on the
/// sampling grid.
pub fn validate_faces(faces: &[FaceObservation], frame_interval_s: f64) -> Vec<ValidationError> {
    let mut errors = Vec::new();
    for f in faces {
        let loc = format!("t={} box=({}, {}, {}, {})", f.t_s, f.x, f.y, f.w, f.h);
        let mut push = |field: &str, reason| {
            errors.push(ValidationError {
                video_id: f.video_id.clone(),
                field: field.into(),
                locator: loc.clone(),
                reason,
            })
        };
        if !(f.w > 0.0 && f.h > 0.0) {
            push("face.box", ValidationReason::NonpositiveBox);
        }
        if !(0.0..=1.0).contains(&f.confidence) {
            push("face.confidence", ValidationReason::ConfidenceOutOfRange);
        }
        let steps = f.t_s / frame_interval_s;
        if (steps - steps.round()).abs() > 1e-6 {
            push("face.t_s", ValidationReason::OffSamplingGrid);
        }
    }
    errors.sort();
    errors
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn record(duration_s: f64) -> VideoRecord {
        VideoRecord {
            video_id: "v1".into(),
            title: "t".into(),
            description: String::new(),
            tags: vec![],
            duration_s,
            published_at: Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap(),
            major_category: None,
            minor_categories: BTreeSet::new(),
        }
    }

    fn seg(start: f64, end: f64, text: &str) -> TranscriptSegment {
        TranscriptSegment {
            video_id: "v1".into(),
            start_s: start,
            end_s: end,
            speaker: "spk_00".into(),
            text: text.into(),
            overlapped: false,
        }
    }

    #[test]
    fn zero_duration_is_reported() {
        let errs = validate_video(&record(0.0), &[]);
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].reason, ValidationReason::NonpositiveDuration);
    }

    #[test]
    fn inverted_segment_is_reported() {
        let errs = validate_video(&record(100.0), &[seg(10.0, 5.0, "x")]);
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].reason, ValidationReason::InvertedSpan);
    }

    #[test]
    fn well_formed_fixture_is_clean() {
        let segs = [seg(0.0, 4.5, "good evening"), seg(4.5, 9.0, "thank you"), seg(9.0, 20.0, "let me finish")];
        assert!(validate_video(&record(3600.0), &segs).is_empty());
    }

    #[test]
    fn empty_text_allowed_only_when_overlapped() {
        let mut s = seg(1.0, 2.0, "");
        assert_eq!(validate_video(&record(10.0), &[s.clone()])[0].reason, ValidationReason::EmptyText);
        s.overlapped = true;
        assert!(validate_video(&record(10.0), &[s]).is_empty());
    }

    #[test]
    fn major_in_minors_is_reported() {
        let mut r = record(700.0);
        r.major_category = Some("Politics".into());
        r.minor_categories.insert("Politics".into());
        assert_eq!(validate_video(&r, &[])[0].reason, ValidationReason::MajorAlsoMinor);
    }

    #[test]
    fn admission_bounds() {
        assert!(!admit_for_analysis(&record(540.0)));
        assert!(admit_for_analysis(&record(600.0)));
        assert!(admit_for_analysis(&record(14_400.0)));
        assert!(!admit_for_analysis(&record(15_000.0)));
    }

    #[test]
    fn duplicate_ids() {
        let errs = validate_corpus_ids(["a", "b", "a"]);
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].video_id, "a");
    }

    #[test]
    fn face_checks() {
        let f = FaceObservation {
            video_id: "v1".into(),
            t_s: 4.0,
            x: 0.0,
            y: 0.0,
            w: 0.0,
            h: 10.0,
            gender: Gender::Male,
            confidence: 1.2,
        };
        let reasons: Vec<_> = validate_faces(&[f], 3.0).into_iter().map(|e| e.reason).collect();
        assert_eq!(
            reasons,
            vec![
                ValidationReason::NonpositiveBox,
                ValidationReason::ConfidenceOutOfRange,
                ValidationReason::OffSamplingGrid
            ]
        );
    }

    #[test]
    fn gender_spellings() {
        for s in ["male", "M", "Man", "MALE"] {
            assert_eq!(Gender::parse_label(s), Some(Gender::Male));
        }
        for s in ["female", "f", "Woman"] {
            assert_eq!(Gender::parse_label(s), Some(Gender::Female));
        }
        assert_eq!(Gender::parse_label("X"), None);
    }

    #[test]
    fn occupations_parse() {
        assert_eq!("TV related".parse::<Occupation>(), Ok(Occupation::TvRelated));
        assert_eq!("civil servant".parse::<Occupation>(), Ok(Occupation::CivilServant));
        assert_eq!("academics".parse::<Occupation>(), Ok(Occupation::Academic));
        assert!("astronaut".parse::<Occupation>().is_err());
    }
}
