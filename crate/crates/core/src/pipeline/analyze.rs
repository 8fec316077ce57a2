use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::store::{ResultStore, RunEntry, StoredVideo, VideoMetrics, VideoStatus};
use super::{PipelineConfig, PipelineError};
use crate::audio::{detect_shouting, load_wav, overlap_fraction, shouting_fraction, MfccExtractor, ShoutModel, BLOCK_FRAMES};
use crate::bias::{build_corpus, BiasCorpusConfig};
use crate::categorize::{categorize_record, parse_suggestions, PriorityLadder, TagMap};
use crate::entity::{attach_roster, cluster_names, parse_roster, NameIndex, NameNormalizer};
use crate::ingest::{
    self, mark_overlap, parse_faces, parse_metadata, parse_name_candidates, parse_ocr, parse_rttm, parse_transcript,
    CorpusManifest, LabelClass, NameCandidates, VideoArtifacts,
};
use crate::model::{CategoryId, ClusterId, PanelistCluster, TranscriptSegment, VideoAnalysis, VideoRecord};
use crate::network::shouters_per_video;
use crate::toxicity::{video_toxicity, LexiconScorer, RemoteScorer, ToxicityClient};
use crate::visual::{face_area_stats, filter_faces, sampled_frames, screen_time};
use crate::{bias, model};

/// Restricts a run to a subset of the corpus.
#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    pub videos: Option<BTreeSet<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedVideo {
    pub video_id: String,
    pub stage: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub computed: Vec<String>,
    pub reused: Vec<String>,
    pub failed: Vec<FailedVideo>,
    pub not_admitted: Vec<String>,
}

impl RunSummary {
    pub fn has_failures(&self) -> bool {
        !self.failed.is_empty()
    }
}

/// Immutable state shared by every worker.
pub(super) struct Resources {
    ladder: PriorityLadder,
    tagmap: TagMap,
    suggestions: BTreeMap<String, BTreeSet<CategoryId>>,
    normalizer: NameNormalizer,
    keywords: BiasCorpusConfig,
    scorer: Box<dyn ToxicityClient>,
    shout_model: Option<ShoutModel>,
    extractor: MfccExtractor,
}

fn read_text(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))
}

fn config_err(context: &str, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Config(format!("{context}: {e}"))
}

impl Resources {
    pub(super) fn load(cfg: &PipelineConfig) -> Result<Self, PipelineError> {
        let ladder = match &cfg.categories.priority {
            Some(p) => PriorityLadder::parse(&read_text(p)?).map_err(|e| config_err("priority ladder", e))?,
            None => PriorityLadder::default(),
        };
        let tagmap = match &cfg.categories.tagmap {
            Some(p) => TagMap::parse(&read_text(p)?, &ladder),
            None => TagMap::shipped(&ladder),
        }
        .map_err(|e| config_err("tag map", e))?;
        let suggestions = match &cfg.categories.suggestions {
            Some(p) => parse_suggestions(&read_text(p)?).map_err(|e| config_err("suggestions", e))?,
            None => BTreeMap::new(),
        };
        let normalizer = match &cfg.entity.honorifics {
            Some(p) => NameNormalizer::new(read_text(p)?.lines()),
            None => NameNormalizer::default(),
        };
        let keywords = match &cfg.bias.keywords {
            Some(p) => BiasCorpusConfig::from_json(&read_text(p)?).map_err(|e| config_err("keywords", e))?,
            None => BiasCorpusConfig::default(),
        };
        let scorer: Box<dyn ToxicityClient> = match (&cfg.toxicity.lexicon, &cfg.toxicity.remote) {
            (Some(p), _) => Box::new(LexiconScorer::parse_csv(&read_text(p)?).map_err(|e| config_err("lexicon", e))?),
            (None, Some(remote)) => {
                let scorer = match &remote.api_key {
                    Some(key) => RemoteScorer::new(remote.service.clone(), key.clone()),
                    None => RemoteScorer::from_env(remote.service.clone()),
                };
                Box::new(scorer.map_err(|e| config_err("remote scorer", e))?)
            }
            (None, None) => return Err(PipelineError::Config("no toxicity scorer configured".into())),
        };
        let extractor = MfccExtractor::new(cfg.audio.mfcc.clone()).map_err(|e| config_err("mfcc", e))?;
        let shout_model = match &cfg.audio.shout_model {
            Some(p) => {
                let m = ShoutModel::load(p).map_err(|e| config_err("shout model", e))?;
                let arch = m.architecture();
                if arch.time_steps != BLOCK_FRAMES || arch.n_coeffs != cfg.audio.mfcc.n_mfcc {
                    return Err(PipelineError::Config(format!(
                        "shout model expects {}x{} blocks, features are {}x{}",
                        arch.time_steps, arch.n_coeffs, BLOCK_FRAMES, cfg.audio.mfcc.n_mfcc
                    )));
                }
                Some(m)
            }
            None => None,
        };
        Ok(Self {
            ladder,
            tagmap,
            suggestions,
            normalizer,
            keywords,
            scorer,
            shout_model,
            extractor,
        })
    }
}

/// Reads the corpus from a directory layout or a JSON manifest file.
pub fn load_corpus(path: &Path) -> Result<CorpusManifest, PipelineError> {
    let manifest = if path.is_dir() {
        CorpusManifest::from_dir(path)
    } else {
        CorpusManifest::load(path)
    }
    .map_err(|e| PipelineError::Corpus(e.to_string()))?;
    if manifest.videos.is_empty() {
        return Err(PipelineError::CorpusEmpty(path.to_path_buf()));
    }
    Ok(manifest)
}

fn hash_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest over the contents of every artifact of a video, labelled by kind.
fn input_hash(art: &VideoArtifacts) -> Result<String, PipelineError> {
    let mut h = Sha256::new();
    let parts = [
        ("metadata", Some(&art.metadata)),
        ("transcript", art.transcript.as_ref()),
        ("diarization", art.diarization.as_ref()),
        ("overlap", art.overlap.as_ref()),
        ("faces", art.faces.as_ref()),
        ("ocr", art.ocr.as_ref()),
        ("names", art.names.as_ref()),
        ("audio", art.audio.as_ref()),
    ];
    for (label, path) in parts {
        h.update(label.as_bytes());
        match path {
            Some(p) => {
                let bytes = std::fs::read(p).map_err(|e| PipelineError::io(p, e))?;
                h.update((bytes.len() as u64).to_le_bytes());
                h.update(&bytes);
            }
            None => h.update(u64::MAX.to_le_bytes()),
        }
    }
    Ok(hex::encode(h.finalize()))
}

type StageResult<T> = Result<T, (&'static str, String)>;

fn stage<T, E: std::fmt::Display>(name: &'static str, r: Result<T, E>) -> StageResult<T> {
    r.map_err(|e| (name, e.to_string()))
}

fn read_artifact(path: &Path, name: &'static str) -> StageResult<Vec<u8>> {
    stage(name, ingest::read_file(path))
}

fn sorted_sum(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs.into_iter().sum()
}

fn process_video(
    art: &VideoArtifacts,
    record: &mut VideoRecord,
    panelists: BTreeSet<ClusterId>,
    cfg: &PipelineConfig,
    res: &Resources,
) -> StageResult<VideoMetrics> {
    let empty = BTreeSet::new();
    let suggestions = res.suggestions.get(&record.video_id).unwrap_or(&empty);
    stage("categorize", categorize_record(record, &res.tagmap, suggestions, &res.ladder))?;

    let transcript_path = art
        .transcript
        .as_ref()
        .ok_or(("transcript", "transcript.jsonl is missing".to_string()))?;
    let mut segments = stage("transcript", parse_transcript(&read_artifact(transcript_path, "transcript")?))?;
    if let Some(p) = &art.overlap {
        let spans = stage("overlap", parse_rttm(&read_artifact(p, "overlap")?, LabelClass::Overlap))?;
        segments = mark_overlap(&segments, &spans, cfg.overlap_min_intersection_s);
    }
    let problems = model::validate_video(record, &segments);
    if let Some(first) = problems.first() {
        return Err(("validate", format!("{first} ({} problem(s))", problems.len())));
    }
    let speech_seconds = sorted_sum(segments.iter().map(TranscriptSegment::duration_s).collect());
    let overlapped_seconds = sorted_sum(segments.iter().filter(|s| s.overlapped).map(TranscriptSegment::duration_s).collect());

    let tox = stage("toxicity", video_toxicity(&segments, res.scorer.as_ref(), cfg.toxicity.threshold))?;

    let duration = record.duration_s;
    let (shouting_evaluated, shouting_segments) = match (&res.shout_model, &art.audio) {
        (Some(model), Some(audio)) => {
            let samples = stage("audio", load_wav(audio, cfg.audio.mfcc.sample_rate_hz))?;
            let detection = stage("audio", detect_shouting(&samples, &res.extractor, model, &cfg.audio.smoothing))?;
            let clipped: Vec<(f64, f64)> = detection
                .segments
                .iter()
                .map(|&(s, e)| (s, e.min(duration)))
                .filter(|(s, e)| s < e)
                .collect();
            (true, clipped)
        }
        (Some(_), None) => {
            log::warn!("video={} stage=audio outcome=skipped reason=no audio file", record.video_id);
            (false, Vec::new())
        }
        _ => (false, Vec::new()),
    };
    let shouting = if shouting_evaluated {
        stage("audio", shouting_fraction(&shouting_segments, duration))?
    } else {
        0.0
    };
    let shouters = if shouting_evaluated {
        match &art.diarization {
            Some(p) => {
                let spans = stage("diarization", parse_rttm(&read_artifact(p, "diarization")?, LabelClass::Speaker))?;
                let turns: Vec<TranscriptSegment> = spans
                    .iter()
                    .map(|s| TranscriptSegment {
                        video_id: s.video_id.clone(),
                        start_s: s.start_s,
                        end_s: s.end_s(),
                        speaker: s.label.clone(),
                        text: String::new(),
                        overlapped: false,
                    })
                    .collect();
                shouters_per_video(&shouting_segments, &turns)
            }
            None => shouters_per_video(&shouting_segments, &segments),
        }
    } else {
        0
    };

    let faces = match &art.faces {
        Some(p) => stage("faces", parse_faces(&read_artifact(p, "faces")?))?,
        None => Vec::new(),
    };
    let face_problems = model::validate_faces(&faces, cfg.visual.frame_interval_s);
    if let Some(first) = face_problems.first() {
        return Err(("faces", format!("{first} ({} problem(s))", face_problems.len())));
    }
    let kept = filter_faces(&faces, &cfg.visual.face_filter);
    let st = screen_time(&kept, cfg.visual.frame_interval_s);
    let areas = face_area_stats(&kept);

    let hashtags = match &art.ocr {
        Some(p) => {
            let rows = stage("ocr", parse_ocr(&read_artifact(p, "ocr")?))?;
            bias::extract_hashtags(rows_in_time_order(&rows).into_iter())
        }
        None => Vec::new(),
    };
    let bias_sentences = build_corpus(&segments, &res.keywords);

    let analysis = VideoAnalysis {
        video_id: record.video_id.clone(),
        overlap_fraction: overlap_fraction(&segments),
        toxic_utterance_fraction: tox.toxic_utterance_fraction,
        has_toxic_speech: tox.has_toxic_speech,
        shouting_fraction: shouting,
        shouting_segments,
        male_face_seconds: st.male_face_seconds,
        female_face_seconds: st.female_face_seconds,
        panelists,
    };
    stage("check", analysis.check(duration))?;
    Ok(VideoMetrics {
        analysis,
        shouting_evaluated,
        speech_seconds,
        overlapped_seconds,
        utterances: tox.utterances,
        foul_utterances: tox.foul_utterances,
        sampled_frames: sampled_frames(duration, cfg.visual.frame_interval_s),
        male_faces: areas.male_count as u64,
        female_faces: areas.female_count as u64,
        male_mean_face_area: areas.male_mean_area,
        female_mean_face_area: areas.female_mean_area,
        shouters,
        hashtags,
        bias_sentences,
    })
}

fn rows_in_time_order(rows: &[ingest::OcrRow]) -> Vec<&str> {
    let mut sorted: Vec<&ingest::OcrRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.t_s.total_cmp(&b.t_s));
    sorted.into_iter().map(|r| r.text.as_str()).collect()
}

fn failed_record(video_id: &str, stage: &str, error: String, config_hash: &str, input_hash: &str, record: Option<VideoRecord>) -> StoredVideo {
    StoredVideo {
        video_id: video_id.to_string(),
        status: VideoStatus::Failed,
        stage: Some(stage.to_string()),
        error: Some(error),
        config_hash: config_hash.to_string(),
        input_hash: input_hash.to_string(),
        record,
        metrics: None,
    }
}

fn cluster_corpus(
    names: &[NameCandidates],
    cfg: &PipelineConfig,
    normalizer: &NameNormalizer,
) -> Result<Vec<PanelistCluster>, PipelineError> {
    let clusters = cluster_names(names, normalizer, cfg.entity.clustering);
    match &cfg.entity.roster {
        Some(p) => {
            let roster = parse_roster(&read_text(p)?).map_err(|e| config_err("roster", e))?;
            let (clusters, unmatched) = attach_roster(&clusters, &roster, normalizer);
            for row in unmatched {
                log::warn!("roster entry `{}` matched no panelist cluster", row.canonical_name);
            }
            Ok(clusters)
        }
        None => Ok(clusters),
    }
}

/// Runs the per-video analysis and persists results into `cfg.output`.
///
/// Per-video failures are recorded and never abort the run. A video whose
/// stored record is `ok` with matching configuration and input digests is
/// reused rather than recomputed.
pub fn analyze(cfg: &PipelineConfig, options: &AnalyzeOptions) -> Result<RunSummary, PipelineError> {
    let started_at = chrono::Utc::now().to_rfc3339();
    cfg.validate()?;
    let res = Resources::load(cfg)?;
    let corpus = load_corpus(&cfg.corpus)?;
    let mut selected: Vec<&VideoArtifacts> = corpus.videos.values().collect();
    if let Some(wanted) = &options.videos {
        let unknown: Vec<&String> = wanted.iter().filter(|v| !corpus.videos.contains_key(*v)).collect();
        if !unknown.is_empty() {
            return Err(PipelineError::Config(format!("unknown video ids: {unknown:?}")));
        }
        selected.retain(|a| wanted.contains(&a.video_id));
    }
    let store = ResultStore::create(&cfg.output)?;
    store.write_config(cfg)?;
    let base_hash = cfg.content_hash()?;

    let mut summary = RunSummary::default();
    let mut pending: Vec<(&VideoArtifacts, VideoRecord, String)> = Vec::new();
    let mut early_failures: Vec<StoredVideo> = Vec::new();
    let mut names: Vec<NameCandidates> = Vec::new();
    for art in &selected {
        let ih = input_hash(art)?;
        let parsed = ingest::read_file(&art.metadata).and_then(|b| parse_metadata(&b));
        let record = match parsed {
            Ok(r) => r,
            Err(e) => {
                early_failures.push(failed_record(&art.video_id, "metadata", e.to_string(), &base_hash, &ih, None));
                continue;
            }
        };
        if record.video_id != art.video_id {
            let msg = format!("metadata id `{}` does not match `{}`", record.video_id, art.video_id);
            early_failures.push(failed_record(&art.video_id, "metadata", msg, &base_hash, &ih, Some(record)));
            continue;
        }
        if !cfg.admission.admits(&record) {
            summary.not_admitted.push(art.video_id.clone());
            continue;
        }
        if let Some(p) = &art.names {
            match ingest::read_file(p).and_then(|b| parse_name_candidates(&b)) {
                Ok(rows) => names.extend(rows.into_iter().map(|mut r| {
                    r.video_id = art.video_id.clone();
                    r
                })),
                Err(e) => {
                    early_failures.push(failed_record(&art.video_id, "names", e.to_string(), &base_hash, &ih, Some(record)));
                    continue;
                }
            }
        }
        pending.push((art, record, ih));
    }

    let clusters = cluster_corpus(&names, cfg, &res.normalizer)?;
    store.write_clusters(&clusters)?;
    let clusters_json: String = clusters
        .iter()
        .map(|c| serde_json::to_string(c).expect("cluster serializes"))
        .collect::<Vec<_>>()
        .join("\n");
    let run_hash = hash_hex(format!("{base_hash}\n{clusters_json}").as_bytes());
    for f in &mut early_failures {
        f.config_hash = run_hash.clone();
    }
    let index = NameIndex::new(&clusters);
    let mut panel_of: BTreeMap<&str, BTreeSet<ClusterId>> = BTreeMap::new();
    for row in &names {
        panel_of
            .entry(row.video_id.as_str())
            .or_default()
            .extend(index.resolve_all(&row.candidates, &res.normalizer));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    let outcomes: Vec<Result<(StoredVideo, bool), PipelineError>> = pool.install(|| {
        pending
            .into_par_iter()
            .map(|(art, mut record, ih)| {
                if let Some(prev) = store.read_video(&art.video_id) {
                    if prev.is_ok() && prev.config_hash == run_hash && prev.input_hash == ih {
                        log::info!("video={} stage=resume outcome=reused", art.video_id);
                        return Ok((prev, true));
                    }
                }
                let t0 = Instant::now();
                let panel = panel_of.get(art.video_id.as_str()).cloned().unwrap_or_default();
                let stored = match process_video(art, &mut record, panel, cfg, &res) {
                    Ok(metrics) => {
                        log::info!("video={} stage=all elapsed_ms={} outcome=ok", art.video_id, t0.elapsed().as_millis());
                        StoredVideo {
                            video_id: art.video_id.clone(),
                            status: VideoStatus::Ok,
                            stage: None,
                            error: None,
                            config_hash: run_hash.clone(),
                            input_hash: ih,
                            record: Some(record),
                            metrics: Some(metrics),
                        }
                    }
                    Err((st, msg)) => {
                        log::warn!(
                            "video={} stage={} elapsed_ms={} outcome=failed error={}",
                            art.video_id,
                            st,
                            t0.elapsed().as_millis(),
                            msg
                        );
                        failed_record(&art.video_id, st, msg, &run_hash, &ih, Some(record))
                    }
                };
                store.write_video(&stored)?;
                Ok((stored, false))
            })
            .collect()
    });

    for f in early_failures {
        log::warn!("video={} stage={} outcome=failed", f.video_id, f.stage.as_deref().unwrap_or(""));
        store.write_video(&f)?;
        summary.failed.push(FailedVideo {
            video_id: f.video_id.clone(),
            stage: f.stage.clone().unwrap_or_default(),
            error: f.error.clone().unwrap_or_default(),
        });
    }
    for outcome in outcomes {
        let (stored, reused) = outcome?;
        match (stored.status, reused) {
            (VideoStatus::Ok, true) => summary.reused.push(stored.video_id),
            (VideoStatus::Ok, false) => summary.computed.push(stored.video_id),
            (VideoStatus::Failed, _) => summary.failed.push(FailedVideo {
                video_id: stored.video_id,
                stage: stored.stage.unwrap_or_default(),
                error: stored.error.unwrap_or_default(),
            }),
        }
    }
    summary.computed.sort();
    summary.reused.sort();
    summary.failed.sort_by(|a, b| a.video_id.cmp(&b.video_id));

    store.append_run(&RunEntry {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: run_hash,
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        computed: summary.computed.clone(),
        reused: summary.reused.clone(),
        failed: summary.failed.iter().map(|f| f.video_id.clone()).collect(),
        not_admitted: summary.not_admitted.clone(),
    })?;
    Ok(summary)
}
