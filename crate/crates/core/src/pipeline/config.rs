use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use regex::{Captures, Regex};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::audio::{MfccConfig, Smoothing};
use crate::bias::BiasTrainParams;
use crate::entity::ClusterOptions;
use crate::model::AdmissionBounds;
use crate::network::TriadOptions;
use crate::toxicity::RemoteConfig;
use crate::visual::FaceFilter;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CategoryConfig {
    /// `tag,category` CSV; the shipped table when absent.
    pub tagmap: Option<PathBuf>,
    /// One category per line, highest priority first; the shipped ladder when absent.
    pub priority: Option<PathBuf>,
    /// `suggestions.jsonl` with extra categories per video.
    pub suggestions: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EntityConfig {
    #[serde(flatten)]
    pub clustering: ClusterOptions,
    /// `canonical_name,occupation,affiliation` CSV.
    pub roster: Option<PathBuf>,
    /// One honorific per line; the shipped list when absent.
    pub honorifics: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemoteToxicityConfig {
    #[serde(flatten)]
    pub service: RemoteConfig,
    /// Bearer token, usually given as `${TOXICITY_API_KEY}`. Falls back to
    /// the environment variable named by `api_key_env`.
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
}

impl Default for RemoteToxicityConfig {
    fn default() -> Self {
        Self {
            service: RemoteConfig::default(),
            api_key: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToxicityConfig {
    pub threshold: f64,
    /// `term,attribute,weight` CSV for the offline scorer.
    pub lexicon: Option<PathBuf>,
    pub remote: Option<RemoteToxicityConfig>,
}

impl Default for ToxicityConfig {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            lexicon: None,
            remote: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AudioConfig {
    pub mfcc: MfccConfig,
    pub smoothing: Smoothing,
    /// Trained shouting model; shouting is not evaluated without one.
    pub shout_model: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VisualConfig {
    pub face_filter: FaceFilter,
    pub frame_interval_s: f64,
}

impl Default for VisualConfig {
    fn default() -> Self {
        Self {
            face_filter: FaceFilter::default(),
            frame_interval_s: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BiasConfig {
    /// keywords.json; the shipped lists when absent.
    pub keywords: Option<PathBuf>,
    /// One stopword per line; the shipped list when absent.
    pub stopwords: Option<PathBuf>,
    /// Pretrained classifier. When absent, `report` trains one on the
    /// store's corpus and attributes its test split.
    pub model: Option<PathBuf>,
    pub ig_steps: usize,
    pub min_freq: usize,
    pub train: BiasTrainParams,
}

impl Default for BiasConfig {
    fn default() -> Self {
        Self {
            keywords: None,
            stopwords: None,
            model: None,
            ig_steps: 64,
            min_freq: 50,
            train: BiasTrainParams::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    /// `affiliation,side` CSV; the shipped table when absent.
    pub party_table: Option<PathBuf>,
    pub triads: TriadOptions,
}

/// Everything a run needs. Relative paths resolve against the directory of
/// the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Corpus directory (`<root>/<video_id>/...`) or a JSON manifest file.
    pub corpus: PathBuf,
    /// Result store directory.
    pub output: PathBuf,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub admission: AdmissionBounds,
    #[serde(default = "default_overlap_min")]
    pub overlap_min_intersection_s: f64,
    #[serde(default)]
    pub categories: CategoryConfig,
    #[serde(default)]
    pub entity: EntityConfig,
    #[serde(default)]
    pub toxicity: ToxicityConfig,
    #[serde(default)]
    pub audio: AudioConfig,
    #[serde(default)]
    pub visual: VisualConfig,
    #[serde(default)]
    pub bias: BiasConfig,
    #[serde(default)]
    pub network: NetworkConfig,
}

fn default_jobs() -> usize {
    1
}

fn default_overlap_min() -> f64 {
    0.5
}

fn var_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}").expect("valid variable regex"))
}

/// Replaces every `${NAME}` with the value of environment variable `NAME`.
pub fn interpolate_env(text: &str, lookup: impl Fn(&str) -> Option<String>) -> Result<String, PipelineError> {
    let mut missing = None;
    let out = var_regex().replace_all(text, |caps: &Captures| match lookup(&caps[1]) {
        Some(v) => v,
        None => {
            missing.get_or_insert_with(|| caps[1].to_string());
            String::new()
        }
    });
    match missing {
        Some(name) => Err(PipelineError::Config(format!("environment variable `{name}` is not set"))),
        None => Ok(out.into_owned()),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl PipelineConfig {
    /// Parses JSON after environment interpolation, resolving relative paths
    /// against `base_dir`.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let text = interpolate_env(text, |k| std::env::var(k).ok())?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.resolve_paths(base_dir);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus);
        fix(&mut self.output);
        for p in self.optional_paths_mut().into_iter().flatten() {
            fix(p);
        }
    }

    fn optional_paths_mut(&mut self) -> Vec<Option<&mut PathBuf>> {
        vec![
            self.categories.tagmap.as_mut(),
            self.categories.priority.as_mut(),
            self.categories.suggestions.as_mut(),
            self.entity.roster.as_mut(),
            self.entity.honorifics.as_mut(),
            self.toxicity.lexicon.as_mut(),
            self.toxicity.remote.as_mut().and_then(|r| r.service.cache_path.as_mut()),
            self.audio.shout_model.as_mut(),
            self.bias.keywords.as_mut(),
            self.bias.stopwords.as_mut(),
            self.bias.model.as_mut(),
            self.network.party_table.as_mut(),
        ]
    }

    /// Input files whose contents determine the results, keyed by setting name.
    pub fn input_files(&self) -> BTreeMap<&'static str, &Path> {
        let entries: [(&'static str, Option<&PathBuf>); 11] = [
            ("categories.tagmap", self.categories.tagmap.as_ref()),
            ("categories.priority", self.categories.priority.as_ref()),
            ("categories.suggestions", self.categories.suggestions.as_ref()),
            ("entity.roster", self.entity.roster.as_ref()),
            ("entity.honorifics", self.entity.honorifics.as_ref()),
            ("toxicity.lexicon", self.toxicity.lexicon.as_ref()),
            ("audio.shout_model", self.audio.shout_model.as_ref()),
            ("bias.keywords", self.bias.keywords.as_ref()),
            ("bias.stopwords", self.bias.stopwords.as_ref()),
            ("bias.model", self.bias.model.as_ref()),
            ("network.party_table", self.network.party_table.as_ref()),
        ];
        entries.into_iter().filter_map(|(k, p)| p.map(|p| (k, p.as_path()))).collect()
    }

    /// Structural checks: referenced files exist, numeric settings are sane
    /// and exactly one toxicity scorer is configured.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.jobs == 0 {
            return bad("jobs must be at least 1".into());
        }
        if !self.corpus.exists() {
            return bad(format!("corpus {} does not exist", self.corpus.display()));
        }
        for (name, path) in self.input_files() {
            if !path.is_file() {
                return bad(format!("{name}: {} does not exist", path.display()));
            }
        }
        match (&self.toxicity.lexicon, &self.toxicity.remote) {
            (Some(_), Some(_)) => return bad("toxicity: configure either `lexicon` or `remote`, not both".into()),
            (None, None) => return bad("toxicity: one of `lexicon` or `remote` is required".into()),
            _ => {}
        }
        if !(0.0..=1.0).contains(&self.toxicity.threshold) {
            return bad(format!("toxicity threshold {} outside [0, 1]", self.toxicity.threshold));
        }
        if !(self.visual.frame_interval_s > 0.0) {
            return bad("visual.frame_interval_s must be positive".into());
        }
        if self.visual.face_filter.min_confidence < 0.0 || self.visual.face_filter.min_area_px < 0.0 {
            return bad("face filter thresholds must be nonnegative".into());
        }
        if self.overlap_min_intersection_s < 0.0 {
            return bad("overlap_min_intersection_s must be nonnegative".into());
        }
        if self.admission.min_duration_s > self.admission.max_duration_s {
            return bad("admission bounds are inverted".into());
        }
        if self.bias.ig_steps == 0 {
            return bad("bias.ig_steps must be at least 1".into());
        }
        self.audio.mfcc.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(())
    }

    /// Digest of every setting that influences per-video results. Paths are
    /// replaced by the SHA-256 of the files they point at; the corpus and
    /// output locations, worker count and secrets are left out.
    pub fn content_hash(&self) -> Result<String, PipelineError> {
        let mut value = serde_json::to_value(self).map_err(|e| PipelineError::Config(e.to_string()))?;
        let obj = value.as_object_mut().expect("config serializes to an object");
        for key in ["corpus", "output", "jobs"] {
            obj.remove(key);
        }
        if let Some(Value::Object(remote)) = obj.get_mut("toxicity").and_then(|t| t.get_mut("remote")) {
            remote.remove("cache_path");
        }
        let mut files = serde_json::Map::new();
        for (name, path) in self.input_files() {
            let bytes = std::fs::read(path).map_err(|e| PipelineError::io(path, e))?;
            files.insert(name.to_string(), Value::String(sha256_hex(&bytes)));
        }
        for (name, _) in self.input_files() {
            let (section, key) = name.split_once('.').expect("dotted setting name");
            if let Some(Value::Object(s)) = obj.get_mut(section) {
                s.remove(key);
            }
        }
        obj.insert("input_files".into(), Value::Object(files));
        Ok(sha256_hex(value.to_string().as_bytes()))
    }
}
