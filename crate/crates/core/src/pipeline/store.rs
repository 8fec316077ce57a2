use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{PipelineConfig, PipelineError};
use crate::bias::CorpusSentence;
use crate::model::{PanelistCluster, VideoAnalysis, VideoRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VideoStatus {
    Ok,
    Failed,
}

/// Everything computed for one admitted video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoMetrics {
    pub analysis: VideoAnalysis,
    /// False when no shouting model is configured or the video has no audio;
    /// such videos are left out of shouting aggregates.
    pub shouting_evaluated: bool,
    pub speech_seconds: f64,
    pub overlapped_seconds: f64,
    pub utterances: usize,
    pub foul_utterances: usize,
    pub sampled_frames: u64,
    pub male_faces: u64,
    pub female_faces: u64,
    pub male_mean_face_area: Option<f64>,
    pub female_mean_face_area: Option<f64>,
    pub shouters: usize,
    pub hashtags: Vec<String>,
    pub bias_sentences: Vec<CorpusSentence>,
}

/// One file per video under `videos/`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredVideo {
    pub video_id: String,
    pub status: VideoStatus,
    /// Stage that failed, for failed records.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub config_hash: String,
    pub input_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record: Option<VideoRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<VideoMetrics>,
}

impl StoredVideo {
    pub fn is_ok(&self) -> bool {
        self.status == VideoStatus::Ok
    }
}

/// One line of `manifest.jsonl`, appended per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub tool_version: String,
    pub config_hash: String,
    pub started_at: String,
    pub finished_at: String,
    pub computed: Vec<String>,
    pub reused: Vec<String>,
    pub failed: Vec<String>,
    pub not_admitted: Vec<String>,
}

/// Directory-backed result store:
///
/// ```text
/// <dir>/config.json      resolved configuration of the latest run
/// <dir>/clusters.jsonl   panelist clusters
/// <dir>/manifest.jsonl   one RunEntry per run
/// <dir>/videos/<id>.json one StoredVideo per admitted video
/// ```
#[derive(Debug, Clone)]
pub struct ResultStore {
    dir: PathBuf,
}

/// Writes via a temporary sibling and a rename so readers never see a
/// partially written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(|e| PipelineError::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| PipelineError::io(&tmp, e))?;
    f.sync_all().map_err(|e| PipelineError::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| PipelineError::io(path, e))
}

impl ResultStore {
    pub fn create(dir: &Path) -> Result<Self, PipelineError> {
        let videos = dir.join("videos");
        fs::create_dir_all(&videos).map_err(|e| PipelineError::io(&videos, e))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn open(dir: &Path) -> Result<Self, PipelineError> {
        if !dir.join("videos").is_dir() {
            return Err(PipelineError::EmptyStore(dir.to_path_buf()));
        }
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn video_path(&self, video_id: &str) -> PathBuf {
        self.dir.join("videos").join(format!("{video_id}.json"))
    }

    pub fn write_video(&self, video: &StoredVideo) -> Result<(), PipelineError> {
        let mut text = serde_json::to_string_pretty(video).map_err(|e| PipelineError::Store(e.to_string()))?;
        text.push('\n');
        write_atomic(&self.video_path(&video.video_id), text.as_bytes())
    }

    /// `None` when the video has no record or the record is unreadable.
    pub fn read_video(&self, video_id: &str) -> Option<StoredVideo> {
        let bytes = fs::read(self.video_path(video_id)).ok()?;
        serde_json::from_slice(&bytes).ok()
    }

    /// All readable video records, ordered by video id.
    pub fn videos(&self) -> Result<BTreeMap<String, StoredVideo>, PipelineError> {
        let dir = self.dir.join("videos");
        let mut out = BTreeMap::new();
        for entry in fs::read_dir(&dir).map_err(|e| PipelineError::io(&dir, e))? {
            let path = entry.map_err(|e| PipelineError::io(&dir, e))?.path();
            let is_record = path.extension().is_some_and(|e| e == "json")
                && !path.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.'));
            if !is_record {
                continue;
            }
            let bytes = fs::read(&path).map_err(|e| PipelineError::io(&path, e))?;
            let video: StoredVideo = serde_json::from_slice(&bytes)
                .map_err(|e| PipelineError::Store(format!("{}: {e}", path.display())))?;
            out.insert(video.video_id.clone(), video);
        }
        Ok(out)
    }

    pub fn write_config(&self, config: &PipelineConfig) -> Result<(), PipelineError> {
        let mut text = serde_json::to_string_pretty(config).map_err(|e| PipelineError::Store(e.to_string()))?;
        text.push('\n');
        write_atomic(&self.dir.join("config.json"), text.as_bytes())
    }

    pub fn read_config(&self) -> Result<PipelineConfig, PipelineError> {
        let path = self.dir.join("config.json");
        let bytes = fs::read(&path).map_err(|e| PipelineError::io(&path, e))?;
        serde_json::from_slice(&bytes).map_err(|e| PipelineError::Store(format!("{}: {e}", path.display())))
    }

    pub fn write_clusters(&self, clusters: &[PanelistCluster]) -> Result<(), PipelineError> {
        let mut text = String::new();
        for c in clusters {
            text.push_str(&serde_json::to_string(c).map_err(|e| PipelineError::Store(e.to_string()))?);
            text.push('\n');
        }
        write_atomic(&self.dir.join("clusters.jsonl"), text.as_bytes())
    }

    pub fn read_clusters(&self) -> Result<Vec<PanelistCluster>, PipelineError> {
        let path = self.dir.join("clusters.jsonl");
        if !path.exists() {
            return Ok(Vec::new());
        }
        let text = fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| PipelineError::Store(format!("{}: {e}", path.display()))))
            .collect()
    }

    pub fn append_run(&self, entry: &RunEntry) -> Result<(), PipelineError> {
        let path = self.dir.join("manifest.jsonl");
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| PipelineError::io(&path, e))?;
        let line = serde_json::to_string(entry).map_err(|e| PipelineError::Store(e.to_string()))?;
        writeln!(f, "{line}").map_err(|e| PipelineError::io(&path, e))
    }

    pub fn runs(&self) -> Result<Vec<RunEntry>, PipelineError> {
        let path = self.dir.join("manifest.jsonl");
        if !path.exists() {
            return Ok(Vec::new());
        }
        let text = fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| PipelineError::Store(e.to_string())))
            .collect()
    }
}
