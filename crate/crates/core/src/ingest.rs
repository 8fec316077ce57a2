//! Parsers for the canonical upstream artifact files.
//!
//! Every parser is total: arbitrary bytes produce either typed values or an
//! [`IngestError`] naming the offending line. Text fields are normalized to
//! Unicode NFC and otherwise left untouched.
//!
//! | artifact          | format |
//! |-------------------|--------|
//! | `metadata.json`   | JSON object `{id, title, description, tags, duration_s, published_at}` |
//! | `transcript.jsonl`| one `{video_id, start_s, end_s, speaker, text}` per line |
//! | `diarization.rttm`, `overlap.rttm` | 10-field RTTM |
//! | `faces.csv`       | `video_id,t_s,x,y,w,h,gender,confidence` |
//! | `ocr.jsonl`       | one `{video_id, t_s, text}` per line |
//! | `names.jsonl`     | one `{video_id, candidates: [..]}` per line |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::model::{FaceObservation, Gender, TranscriptSegment, VideoRecord};

#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("field `{0}` has the wrong type")]
    TypeMismatch(String),
    #[error("line {0}: malformed record")]
    MalformedLine(usize),
    #[error("line {0}: end precedes start")]
    InvertedSpan(usize),
    #[error("line {0}: malformed RTTM line")]
    MalformedRttm(usize),
    #[error("line {0}: unexpected RTTM type field")]
    WrongTypeField(usize),
    #[error("line {0}: RTTM duration must be positive")]
    NonpositiveDuration(usize),
    #[error("line {0}: malformed row")]
    MalformedRow(usize),
    #[error("line {0}: unknown gender label")]
    UnknownGender(usize),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, IngestError>;

fn nfc(s: &str) -> String {
    s.nfc().collect()
}

fn utf8(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|e| IngestError::MalformedJson(e.to_string()))
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value> {
    obj.get(name).ok_or_else(|| IngestError::MissingField(name.to_string()))
}

fn str_field(obj: &Map<String, Value>, name: &str) -> Result<String> {
    field(obj, name)?
        .as_str()
        .map(nfc)
        .ok_or_else(|| IngestError::TypeMismatch(name.to_string()))
}

fn num_field(obj: &Map<String, Value>, name: &str) -> Result<f64> {
    field(obj, name)?
        .as_f64()
        .ok_or_else(|| IngestError::TypeMismatch(name.to_string()))
}

/// Parses a platform metadata document. Categories are left unset.
pub fn parse_metadata(bytes: &[u8]) -> Result<VideoRecord> {
    let text = utf8(bytes)?;
    let value: Value = serde_json::from_str(text).map_err(|e| IngestError::MalformedJson(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| IngestError::MalformedJson("top level is not an object".into()))?;

    let video_id = str_field(obj, "id")?;
    let title = str_field(obj, "title")?;
    let description = str_field(obj, "description")?;
    let tags = field(obj, "tags")?
        .as_array()
        .ok_or_else(|| IngestError::TypeMismatch("tags".into()))?
        .iter()
        .map(|t| t.as_str().map(nfc).ok_or_else(|| IngestError::TypeMismatch("tags".into())))
        .collect::<Result<Vec<_>>>()?;
    let duration_s = num_field(obj, "duration_s")?;
    let published_at = field(obj, "published_at")?
        .as_str()
        .and_then(|s| DateTime::parse_from_rfc3339(s).ok())
        .map(|d| d.with_timezone(&Utc))
        .ok_or_else(|| IngestError::TypeMismatch("published_at".into()))?;

    Ok(VideoRecord {
        video_id,
        title,
        description,
        tags,
        duration_s,
        published_at,
        major_category: None,
        minor_categories: Default::default(),
    })
}

/// Serializes a record back into the metadata document format.
pub fn write_metadata(record: &VideoRecord) -> String {
    serde_json::json!({
        "id": record.video_id,
        "title": record.title,
        "description": record.description,
        "tags": record.tags,
        "duration_s": record.duration_s,
        "published_at": record.published_at.to_rfc3339_opts(chrono::SecondsFormat::AutoSi, true),
    })
    .to_string()
}

fn jsonl_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn line_object(line: &str, line_no: usize) -> Result<Map<String, Value>> {
    match serde_json::from_str::<Value>(line) {
        Ok(Value::Object(map)) => Ok(map),
        _ => Err(IngestError::MalformedLine(line_no)),
    }
}

/// Parses a JSON-lines transcript, sorted by start time. `overlapped` starts false.
pub fn parse_transcript(bytes: &[u8]) -> Result<Vec<TranscriptSegment>> {
    let text = std::str::from_utf8(bytes).map_err(|_| IngestError::MalformedLine(1))?;
    let mut segments = Vec::new();
    for (line_no, line) in jsonl_lines(text) {
        let obj = line_object(line, line_no)?;
        let bad = |_| IngestError::MalformedLine(line_no);
        let seg = TranscriptSegment {
            video_id: str_field(&obj, "video_id").map_err(bad)?,
            start_s: num_field(&obj, "start_s").map_err(bad)?,
            end_s: num_field(&obj, "end_s").map_err(bad)?,
            speaker: str_field(&obj, "speaker").map_err(bad)?,
            text: str_field(&obj, "text").map_err(bad)?,
            overlapped: false,
        };
        if seg.end_s < seg.start_s {
            return Err(IngestError::InvertedSpan(line_no));
        }
        segments.push(seg);
    }
    segments.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
    Ok(segments)
}

#[derive(Serialize)]
struct TranscriptLine<'a> {
    video_id: &'a str,
    start_s: f64,
    end_s: f64,
    speaker: &'a str,
    text: &'a str,
}

/// Serializes segments as JSON lines with fields in canonical order.
pub fn write_transcript(segments: &[TranscriptSegment]) -> String {
    let mut out = String::new();
    for s in segments {
        let line = TranscriptLine {
            video_id: &s.video_id,
            start_s: s.start_s,
            end_s: s.end_s,
            speaker: &s.speaker,
            text: &s.text,
        };
        out.push_str(&serde_json::to_string(&line).expect("transcript line serializes"));
        out.push('\n');
    }
    out
}

/// The RTTM type field a file is expected to carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LabelClass {
    Speaker,
    Overlap,
}

impl LabelClass {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelClass::Speaker => "SPEAKER",
            LabelClass::Overlap => "OVERLAP",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RttmSpan {
    pub video_id: String,
    pub start_s: f64,
    pub dur_s: f64,
    pub label: String,
}

impl RttmSpan {
    pub fn end_s(&self) -> f64 {
        self.start_s + self.dur_s
    }
}

/// Parses RTTM lines of the expected class. `;;` comment lines and blank lines
/// are skipped.
pub fn parse_rttm(bytes: &[u8], expected: LabelClass) -> Result<Vec<RttmSpan>> {
    let text = std::str::from_utf8(bytes).map_err(|_| IngestError::MalformedRttm(1))?;
    let mut spans = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with(";;") {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 10 {
            return Err(IngestError::MalformedRttm(line_no));
        }
        if fields[0] != expected.as_str() {
            return Err(IngestError::WrongTypeField(line_no));
        }
        let start_s: f64 = fields[3].parse().map_err(|_| IngestError::MalformedRttm(line_no))?;
        let dur_s: f64 = fields[4].parse().map_err(|_| IngestError::MalformedRttm(line_no))?;
        if !start_s.is_finite() || !dur_s.is_finite() {
            return Err(IngestError::MalformedRttm(line_no));
        }
        if dur_s <= 0.0 {
            return Err(IngestError::NonpositiveDuration(line_no));
        }
        spans.push(RttmSpan {
            video_id: nfc(fields[1]),
            start_s,
            dur_s,
            label: nfc(fields[7]),
        });
    }
    Ok(spans)
}

pub fn write_rttm(spans: &[RttmSpan], class: LabelClass) -> String {
    let mut out = String::new();
    for s in spans {
        let _ = writeln!(
            out,
            "{} {} 1 {} {} <NA> <NA> {} <NA> <NA>",
            class.as_str(),
            s.video_id,
            s.start_s,
            s.dur_s,
            s.label
        );
    }
    out
}

/// Length of the intersection of two half-open intervals.
pub fn intersection(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1.min(b.1) - a.0.max(b.0)).max(0.0)
}

/// Sets `overlapped` on every segment that intersects some overlap span by
/// strictly more than `min_intersection_s`.
pub fn mark_overlap(
    segments: &[TranscriptSegment],
    overlap_spans: &[RttmSpan],
    min_intersection_s: f64,
) -> Vec<TranscriptSegment> {
    segments
        .iter()
        .map(|seg| {
            let hit = overlap_spans
                .iter()
                .any(|o| intersection((seg.start_s, seg.end_s), (o.start_s, o.end_s())) > min_intersection_s);
            TranscriptSegment {
                overlapped: hit,
                ..seg.clone()
            }
        })
        .collect()
}

const FACE_HEADER: [&str; 8] = ["video_id", "t_s", "x", "y", "w", "h", "gender", "confidence"];

/// Parses face detections from CSV with the header
/// `video_id,t_s,x,y,w,h,gender,confidence`.
pub fn parse_faces(bytes: &[u8]) -> Result<Vec<FaceObservation>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(bytes);
    let header = reader.headers().map_err(|_| IngestError::MalformedRow(1))?.clone();
    if header.len() != FACE_HEADER.len() || header.iter().zip(FACE_HEADER).any(|(h, want)| h != want) {
        return Err(IngestError::MalformedRow(1));
    }

    let mut faces = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let fallback_line = i + 2;
        let row = row.map_err(|e| {
            IngestError::MalformedRow(e.position().map(|p| p.line() as usize).unwrap_or(fallback_line))
        })?;
        let line_no = row.position().map(|p| p.line() as usize).unwrap_or(fallback_line);
        if row.len() != FACE_HEADER.len() {
            return Err(IngestError::MalformedRow(line_no));
        }
        let num = |idx: usize| -> Result<f64> {
            row[idx]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or(IngestError::MalformedRow(line_no))
        };
        let gender = Gender::parse_label(&row[6]).ok_or(IngestError::UnknownGender(line_no))?;
        faces.push(FaceObservation {
            video_id: nfc(&row[0]),
            t_s: num(1)?,
            x: num(2)?,
            y: num(3)?,
            w: num(4)?,
            h: num(5)?,
            gender,
            confidence: num(7)?,
        });
    }
    Ok(faces)
}

pub fn write_faces(faces: &[FaceObservation]) -> String {
    let mut out = FACE_HEADER.join(",");
    out.push('\n');
    for f in faces {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            f.video_id,
            f.t_s,
            f.x,
            f.y,
            f.w,
            f.h,
            f.gender.as_str(),
            f.confidence
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcrRow {
    pub video_id: String,
    pub t_s: f64,
    pub text: String,
}

/// Parses OCR rows (`{video_id, t_s, text}` per line).
pub fn parse_ocr(bytes: &[u8]) -> Result<Vec<OcrRow>> {
    let text = std::str::from_utf8(bytes).map_err(|_| IngestError::MalformedRow(1))?;
    let mut rows = Vec::new();
    for (line_no, line) in jsonl_lines(text) {
        let obj = line_object(line, line_no).map_err(|_| IngestError::MalformedRow(line_no))?;
        let bad = |_| IngestError::MalformedRow(line_no);
        rows.push(OcrRow {
            video_id: str_field(&obj, "video_id").map_err(bad)?,
            t_s: num_field(&obj, "t_s").map_err(bad)?,
            text: str_field(&obj, "text").map_err(bad)?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NameCandidates {
    pub video_id: String,
    pub candidates: Vec<String>,
}

/// Parses per-video raw name candidates (`{video_id, candidates}` per line).
pub fn parse_name_candidates(bytes: &[u8]) -> Result<Vec<NameCandidates>> {
    let text = std::str::from_utf8(bytes).map_err(|_| IngestError::MalformedRow(1))?;
    let mut rows = Vec::new();
    for (line_no, line) in jsonl_lines(text) {
        let obj = line_object(line, line_no).map_err(|_| IngestError::MalformedRow(line_no))?;
        let video_id = str_field(&obj, "video_id").map_err(|_| IngestError::MalformedRow(line_no))?;
        let candidates = obj
            .get("candidates")
            .and_then(Value::as_array)
            .ok_or(IngestError::MalformedRow(line_no))?
            .iter()
            .map(|v| v.as_str().map(nfc).ok_or(IngestError::MalformedRow(line_no)))
            .collect::<Result<Vec<_>>>()?;
        rows.push(NameCandidates { video_id, candidates });
    }
    Ok(rows)
}

/// File locations for one video's artifacts. Only the metadata is mandatory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoArtifacts {
    pub video_id: String,
    pub metadata: PathBuf,
    #[serde(default)]
    pub transcript: Option<PathBuf>,
    #[serde(default)]
    pub diarization: Option<PathBuf>,
    #[serde(default)]
    pub overlap: Option<PathBuf>,
    #[serde(default)]
    pub faces: Option<PathBuf>,
    #[serde(default)]
    pub ocr: Option<PathBuf>,
    #[serde(default)]
    pub names: Option<PathBuf>,
    #[serde(default)]
    pub audio: Option<PathBuf>,
}

impl VideoArtifacts {
    fn paths(&self) -> impl Iterator<Item = &PathBuf> {
        std::iter::once(&self.metadata).chain(
            [
                &self.transcript,
                &self.diarization,
                &self.overlap,
                &self.faces,
                &self.ocr,
                &self.names,
                &self.audio,
            ]
            .into_iter()
            .flatten(),
        )
    }
}

/// Index of a corpus: one [`VideoArtifacts`] entry per video id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub root: PathBuf,
    pub videos: BTreeMap<String, VideoArtifacts>,
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| IngestError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

impl CorpusManifest {
    /// Builds a manifest from the directory layout
    /// `<root>/<video_id>/{metadata.json, transcript.jsonl, ...}`.
    /// Absent optional artifacts are left as `None`.
    pub fn from_dir(root: &Path) -> Result<Self> {
        let io = |e: std::io::Error| IngestError::Io {
            path: root.to_path_buf(),
            message: e.to_string(),
        };
        let mut videos = BTreeMap::new();
        let mut entries: Vec<_> = fs::read_dir(root).map_err(io)?.collect::<std::io::Result<_>>().map_err(io)?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let dir = entry.path();
            let metadata = dir.join("metadata.json");
            if !dir.is_dir() || !metadata.is_file() {
                continue;
            }
            let video_id = entry.file_name().to_string_lossy().into_owned();
            let opt = |name: &str| {
                let p = dir.join(name);
                p.is_file().then_some(p)
            };
            videos.insert(
                video_id.clone(),
                VideoArtifacts {
                    video_id,
                    metadata,
                    transcript: opt("transcript.jsonl"),
                    diarization: opt("diarization.rttm"),
                    overlap: opt("overlap.rttm"),
                    faces: opt("faces.csv"),
                    ocr: opt("ocr.jsonl"),
                    names: opt("names.jsonl"),
                    audio: opt("audio.wav"),
                },
            );
        }
        Ok(Self {
            root: root.to_path_buf(),
            videos,
        })
    }

    /// Loads a JSON manifest. Relative paths resolve against `root`, which in
    /// turn resolves against the manifest file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = read_file(path)?;
        let mut manifest: CorpusManifest =
            serde_json::from_slice(&bytes).map_err(|e| IngestError::MalformedJson(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        manifest.root = base.join(&manifest.root);
        let root = manifest.root.clone();
        for (key, v) in manifest.videos.iter_mut() {
            if v.video_id.is_empty() {
                v.video_id = key.clone();
            }
            let fix = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = root.join(&*p);
                }
            };
            fix(&mut v.metadata);
            for p in [
                &mut v.transcript,
                &mut v.diarization,
                &mut v.overlap,
                &mut v.faces,
                &mut v.ocr,
                &mut v.names,
                &mut v.audio,
            ]
            .into_iter()
            .flatten()
            {
                fix(p);
            }
        }
        Ok(manifest)
    }

    /// Paths referenced by the manifest that do not exist.
    pub fn missing_paths(&self) -> Vec<PathBuf> {
        self.videos
            .values()
            .flat_map(|v| v.paths())
            .filter(|p| !p.exists())
            .cloned()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_metadata() {
        let doc = br#"{"id":"v1","title":"t","description":"","tags":["fake trp"],"duration_s":3600,"published_at":"2020-01-01T00:00:00Z"}"#;
        let rec = parse_metadata(doc).unwrap();
        assert_eq!(rec.video_id, "v1");
        assert_eq!(rec.tags, vec!["fake trp"]);
        assert_eq!(rec.duration_s, 3600.0);
        assert!(rec.major_category.is_none());
    }

    #[test]
    fn metadata_missing_tags() {
        let doc = br#"{"id":"v1","title":"t","description":"","duration_s":3600,"published_at":"2020-01-01T00:00:00Z"}"#;
        assert_eq!(parse_metadata(doc), Err(IngestError::MissingField("tags".into())));
    }

    #[test]
    fn metadata_type_mismatch() {
        let doc = br#"{"id":"v1","title":"t","description":"","tags":[],"duration_s":"long","published_at":"2020-01-01T00:00:00Z"}"#;
        assert_eq!(parse_metadata(doc), Err(IngestError::TypeMismatch("duration_s".into())));
        assert!(matches!(parse_metadata(b"{not json"), Err(IngestError::MalformedJson(_))));
    }

    #[test]
    fn metadata_tag_round_trips() {
        let doc = br#"{"id":"v9","title":"Justice For Sushant","description":"d","tags":["Sushant case CBI","Kangana Ranaut"],"duration_s":2400.5,"published_at":"2020-08-01T18:30:00Z"}"#;
        let rec = parse_metadata(doc).unwrap();
        assert_eq!(rec.tags[0].as_bytes(), "Sushant case CBI".as_bytes());
        let again = parse_metadata(write_metadata(&rec).as_bytes()).unwrap();
        assert_eq!(rec, again);
    }

    #[test]
    fn metadata_is_nfc_normalized() {
        // "é" as e + combining acute
        let doc = "{\"id\":\"v\",\"title\":\"cafe\u{301}\",\"description\":\"\",\"tags\":[],\"duration_s\":700,\"published_at\":\"2021-01-01T00:00:00Z\"}";
        assert_eq!(parse_metadata(doc.as_bytes()).unwrap().title, "caf\u{e9}");
    }

    #[test]
    fn transcript_sorted() {
        let doc = concat!(
            r#"{"video_id":"v1","start_s":5.0,"end_s":7.5,"speaker":"B","text":"second"}"#,
            "\n",
            r#"{"video_id":"v1","start_s":0.0,"end_s":5.0,"speaker":"A","text":"first"}"#,
            "\n"
        );
        let segs = parse_transcript(doc.as_bytes()).unwrap();
        assert_eq!(segs[0].text, "first");
        assert_eq!(segs[1].text, "second");
        assert!(segs.iter().all(|s| !s.overlapped));
    }

    #[test]
    fn transcript_inverted_span() {
        let doc = concat!(
            r#"{"video_id":"v1","start_s":0,"end_s":1,"speaker":"A","text":"ok"}"#,
            "\n",
            r#"{"video_id":"v1","start_s":9,"end_s":3,"speaker":"A","text":"bad"}"#
        );
        assert_eq!(parse_transcript(doc.as_bytes()), Err(IngestError::InvertedSpan(2)));
        assert_eq!(parse_transcript(b"{\"video_id\":1}"), Err(IngestError::MalformedLine(1)));
    }

    #[test]
    fn transcript_fixture_round_trip() {
        let doc = concat!(
            r#"{"video_id":"v2","start_s":0.0,"end_s":3.25,"speaker":"spk_00","text":"Good evening and welcome."}"#,
            "\n",
            r#"{"video_id":"v2","start_s":3.25,"end_s":8.0,"speaker":"spk_01","text":"Thank you, Arnab."}"#,
            "\n",
            r#"{"video_id":"v2","start_s":8.0,"end_s":12.5,"speaker":"spk_02","text":"Let me finish!"}"#,
            "\n"
        );
        let segs = parse_transcript(doc.as_bytes()).unwrap();
        assert_eq!(segs.len(), 3);
        assert_eq!(segs[1].speaker, "spk_01");
        assert_eq!(segs[1].start_s, 3.25);
        assert_eq!(segs[2].end_s, 12.5);
        assert_eq!(segs[2].text, "Let me finish!");
        assert_eq!(write_transcript(&segs), doc);
    }

    #[test]
    fn rttm_line() {
        let spans = parse_rttm(b"SPEAKER v1 1 12.30 4.50 <NA> <NA> spk_00 <NA> <NA>\n", LabelClass::Speaker).unwrap();
        assert_eq!(
            spans,
            vec![RttmSpan {
                video_id: "v1".into(),
                start_s: 12.3,
                dur_s: 4.5,
                label: "spk_00".into()
            }]
        );
    }

    #[test]
    fn rttm_errors() {
        assert_eq!(
            parse_rttm(b"SPEAKER v1 1 12.30 4.50 <NA> <NA> spk_00 <NA>\n", LabelClass::Speaker),
            Err(IngestError::MalformedRttm(1))
        );
        assert_eq!(
            parse_rttm(b";; header\nOVERLAP v1 1 0 1 <NA> <NA> ov <NA> <NA>\n", LabelClass::Speaker),
            Err(IngestError::WrongTypeField(2))
        );
        assert_eq!(
            parse_rttm(b"SPEAKER v1 1 0 -1 <NA> <NA> a <NA> <NA>\n", LabelClass::Speaker),
            Err(IngestError::NonpositiveDuration(1))
        );
        assert_eq!(
            parse_rttm(b"SPEAKER v1 1 zero 1 <NA> <NA> a <NA> <NA>\n", LabelClass::Speaker),
            Err(IngestError::MalformedRttm(1))
        );
    }

    #[test]
    fn rttm_adjacent_overlap_spans() {
        let doc = b";; overlap regions\nOVERLAP v1 1 0.0 2.0 <NA> <NA> overlap <NA> <NA>\nOVERLAP v1 1 2.0 1.0 <NA> <NA> overlap <NA> <NA>\n";
        let spans = parse_rttm(doc, LabelClass::Overlap).unwrap();
        assert_eq!(spans.len(), 2);
        assert_eq!(spans.iter().map(|s| s.dur_s).sum::<f64>(), 3.0);
    }

    fn seg(start: f64, end: f64) -> TranscriptSegment {
        TranscriptSegment {
            video_id: "v1".into(),
            start_s: start,
            end_s: end,
            speaker: "A".into(),
            text: "x".into(),
            overlapped: false,
        }
    }

    fn span(start: f64, end: f64) -> RttmSpan {
        RttmSpan {
            video_id: "v1".into(),
            start_s: start,
            dur_s: end - start,
            label: "overlap".into(),
        }
    }

    #[test]
    fn overlap_marking() {
        // 0.2 s graze stays below the 0.5 s minimum
        let out = mark_overlap(&[seg(10.0, 20.0)], &[span(19.8, 25.0)], 0.5);
        assert!(!out[0].overlapped);
        let out = mark_overlap(&[seg(11.0, 12.0)], &[span(10.0, 20.0)], 0.5);
        assert!(out[0].overlapped);
        let out = mark_overlap(&[seg(0.0, 1.0), seg(1.0, 2.0)], &[], 0.5);
        assert!(out.iter().all(|s| !s.overlapped));
    }

    #[test]
    fn faces_csv() {
        let doc = b"video_id,t_s,x,y,w,h,gender,confidence\nv1,3,100,50,80,90,Woman,0.97\n";
        let faces = parse_faces(doc).unwrap();
        assert_eq!(faces[0].gender, Gender::Female);
        assert_eq!(faces[0].confidence, 0.97);
        assert_eq!(faces[0].area(), 7200.0);
        assert_eq!(parse_faces(write_faces(&faces).as_bytes()).unwrap(), faces);
    }

    #[test]
    fn faces_errors() {
        let doc = b"video_id,t_s,x,y,w,h,gender,confidence\nv1,3,100,50,80,90,X,0.97\n";
        assert_eq!(parse_faces(doc), Err(IngestError::UnknownGender(2)));
        let doc = b"video_id,t_s,x,y,w,h,gender,confidence\nv1,3,100,50,80,90,M,0.9\nv1,6,1,1,wide,1,M,0.9\n";
        assert_eq!(parse_faces(doc), Err(IngestError::MalformedRow(3)));
        let doc = b"video_id,t_s,x,y,w,h,gender,confidence\nv1,3,100\n";
        assert_eq!(parse_faces(doc), Err(IngestError::MalformedRow(2)));
        assert_eq!(parse_faces(b"a,b\n"), Err(IngestError::MalformedRow(1)));
    }

    #[test]
    fn name_candidates() {
        let rows =
            parse_name_candidates(br#"{"video_id":"v1","candidates":["general gd bakshi","mr bakshi"]}"#).unwrap();
        assert_eq!(rows[0].video_id, "v1");
        assert_eq!(rows[0].candidates.len(), 2);
        assert_eq!(parse_name_candidates(b"{\"video_id\":\"v1\"}"), Err(IngestError::MalformedRow(1)));
    }

    #[test]
    fn ocr_rows() {
        let rows = parse_ocr(b"{\"video_id\":\"v1\",\"t_s\":30,\"text\":\"LIVE #CongInsultsDemocracy\"}\n\n").unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].t_s, 30.0);
        assert_eq!(parse_ocr(b"[1,2]"), Err(IngestError::MalformedRow(1)));
    }

    #[test]
    fn manifest_from_dir() {
        let dir = tempfile::tempdir().unwrap();
        let v = dir.path().join("v1");
        fs::create_dir(&v).unwrap();
        fs::write(v.join("metadata.json"), "{}").unwrap();
        fs::write(v.join("faces.csv"), "").unwrap();
        fs::create_dir(dir.path().join("not_a_video")).unwrap();
        let m = CorpusManifest::from_dir(dir.path()).unwrap();
        assert_eq!(m.videos.len(), 1);
        assert!(m.videos["v1"].faces.is_some());
        assert!(m.videos["v1"].audio.is_none());
        assert!(m.missing_paths().is_empty());
    }

    #[test]
    fn manifest_file_reports_missing_paths() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("m.json"), r#"{"root":"data","videos":{"v1":{"video_id":"v1","metadata":"v1/metadata.json"}}}"#).unwrap();
        let m = CorpusManifest::load(&dir.path().join("m.json")).unwrap();
        assert_eq!(m.missing_paths(), vec![dir.path().join("data").join("v1/metadata.json")]);
    }
}
