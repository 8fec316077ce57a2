use std::path::Path;

use serde::{Deserialize, Serialize};

use super::analyze::{load_corpus, FailedVideo, Resources};
use super::{PipelineConfig, PipelineError};
use crate::ingest::{
    self, parse_faces, parse_metadata, parse_name_candidates, parse_ocr, parse_rttm, parse_transcript, LabelClass,
    VideoArtifacts,
};
use crate::model;

/// Outcome of a dry-run ingest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub videos: usize,
    pub admitted: Vec<String>,
    pub not_admitted: Vec<String>,
    pub problems: Vec<FailedVideo>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.problems.is_empty()
    }
}

fn check_video(art: &VideoArtifacts, cfg: &PipelineConfig) -> Result<Option<()>, (&'static str, String)> {
    let s = |stage: &'static str| move |e: ingest::IngestError| (stage, e.to_string());
    let record = ingest::read_file(&art.metadata).and_then(|b| parse_metadata(&b)).map_err(s("metadata"))?;
    if !cfg.admission.admits(&record) {
        return Ok(None);
    }
    let transcript = art.transcript.as_ref().ok_or(("transcript", "transcript.jsonl is missing".to_string()))?;
    let segments = ingest::read_file(transcript).and_then(|b| parse_transcript(&b)).map_err(s("transcript"))?;
    if let Some(first) = model::validate_video(&record, &segments).first() {
        return Err(("validate", first.to_string()));
    }
    if let Some(p) = &art.overlap {
        ingest::read_file(p).and_then(|b| parse_rttm(&b, LabelClass::Overlap)).map_err(s("overlap"))?;
    }
    if let Some(p) = &art.diarization {
        ingest::read_file(p).and_then(|b| parse_rttm(&b, LabelClass::Speaker)).map_err(s("diarization"))?;
    }
    if let Some(p) = &art.faces {
        let faces = ingest::read_file(p).and_then(|b| parse_faces(&b)).map_err(s("faces"))?;
        if let Some(first) = model::validate_faces(&faces, cfg.visual.frame_interval_s).first() {
            return Err(("faces", first.to_string()));
        }
    }
    if let Some(p) = &art.ocr {
        ingest::read_file(p).and_then(|b| parse_ocr(&b)).map_err(s("ocr"))?;
    }
    if let Some(p) = &art.names {
        ingest::read_file(p).and_then(|b| parse_name_candidates(&b)).map_err(s("names"))?;
    }
    if let Some(p) = &art.audio {
        hound::WavReader::open(p).map_err(|e| ("audio", format!("{}: {e}", p.display())))?;
    }
    Ok(Some(()))
}

/// Parses every artifact of the corpus and loads every configured resource
/// without computing or writing anything.
pub fn validate(cfg: &PipelineConfig) -> Result<ValidationReport, PipelineError> {
    cfg.validate()?;
    Resources::load(cfg)?;
    let corpus = load_corpus(&cfg.corpus)?;
    let mut report = ValidationReport {
        videos: corpus.videos.len(),
        ..Default::default()
    };
    for art in corpus.videos.values() {
        match check_video(art, cfg) {
            Ok(Some(())) => report.admitted.push(art.video_id.clone()),
            Ok(None) => report.not_admitted.push(art.video_id.clone()),
            Err((stage, error)) => report.problems.push(FailedVideo {
                video_id: art.video_id.clone(),
                stage: stage.to_string(),
                error,
            }),
        }
    }
    Ok(report)
}

/// Convenience wrapper: load the configuration file, then [`validate`].
pub fn validate_file(path: &Path) -> Result<ValidationReport, PipelineError> {
    validate(&PipelineConfig::load(path)?)
}
