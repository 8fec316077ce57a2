use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::store::{write_atomic, ResultStore, StoredVideo, VideoMetrics};
use super::{PipelineConfig, PipelineError};
use crate::bias::{
    appearance_bias, attribution_csv, rank_tokens, train_classifier, BiasLabel, CorpusSentence, Stopwords,
    TextClassifier, TokenAttributions,
};
use crate::model::{CategoryId, PanelistCluster, VideoRecord};
use crate::network::{build_graph, louvain, triad_incivility, PartyTable};
use crate::stats::{category_vs_rest, Tail};

/// Files written by [`report`] and the warnings raised on the way.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReportSummary {
    pub files: Vec<String>,
    pub warnings: Vec<String>,
}

struct Writer {
    out: PathBuf,
    summary: ReportSummary,
}

impl Writer {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), PipelineError> {
        write_atomic(&self.out.join(name), contents.as_bytes())?;
        self.summary.files.push(name.to_string());
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), PipelineError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| PipelineError::Store(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }

    fn warn(&mut self, message: String) {
        log::warn!("report: {message}");
        self.summary.warnings.push(message);
    }
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv write");
    for row in rows {
        w.write_record(&row).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv output is utf-8")
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn mean(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    Some(xs.into_iter().sum::<f64>() / n)
}

fn sorted_sum(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs.into_iter().sum()
}

/// An analysed video with its metadata and metrics.
struct Video<'a> {
    record: &'a VideoRecord,
    metrics: &'a VideoMetrics,
}

impl Video<'_> {
    fn id(&self) -> &str {
        &self.record.video_id
    }

    fn category(&self) -> Option<&CategoryId> {
        self.record.major_category.as_ref()
    }
}

/// Per-category mean against the rest with one-tailed Welch tests in both
/// directions. Rows without a defined test keep empty statistic cells.
fn category_table(w: &mut Writer, name: &str, metric: &str, values: &BTreeMap<String, f64>, assignment: &BTreeMap<String, CategoryId>) -> String {
    let categories: BTreeSet<&CategoryId> = values.keys().filter_map(|v| assignment.get(v)).collect();
    let mut rows = Vec::new();
    for cat in categories {
        let (inside, rest): (Vec<(&String, &f64)>, Vec<(&String, &f64)>) =
            values.iter().partition(|(v, _)| assignment.get(*v) == Some(cat));
        let mean_m = mean(inside.iter().map(|(_, x)| **x).collect());
        let mean_rest = mean(rest.iter().map(|(_, x)| **x).collect());
        for tail in [Tail::OneGreater, Tail::OneLess] {
            let (t, p) = match category_vs_rest(values, assignment, cat, tail) {
                Ok(r) => (Some(r.t_stat), Some(r.p_value)),
                Err(e) => {
                    if tail == Tail::OneGreater {
                        w.warn(format!("{name}: t-test for {metric} in `{cat}` omitted: {e}"));
                    }
                    (None, None)
                }
            };
            rows.push(vec![
                cat.to_string(),
                inside.len().to_string(),
                opt(mean_m),
                opt(mean_rest),
                opt(t),
                opt(p),
                tail.as_str().to_string(),
            ]);
        }
    }
    csv_text(&["category", "n_videos", "mean_M", "mean_rest", "t_stat", "p_value", "tail"], rows)
}

fn affiliations(videos: &[Video], clusters: &BTreeMap<u32, &PanelistCluster>) -> BTreeMap<String, Vec<String>> {
    videos
        .iter()
        .map(|v| {
            let affs = v
                .metrics
                .analysis
                .panelists
                .iter()
                .filter_map(|id| clusters.get(&id.0).and_then(|c| c.affiliation.clone()))
                .collect();
            (v.id().to_string(), affs)
        })
        .collect()
}

fn load_party_table(cfg: &PipelineConfig) -> Result<PartyTable, PipelineError> {
    match &cfg.network.party_table {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| PipelineError::io(p, e))?;
            PartyTable::parse(&text).map_err(|e| PipelineError::Config(format!("party table: {e}")))
        }
        None => Ok(PartyTable::shipped()),
    }
}

fn load_stopwords(cfg: &PipelineConfig) -> Result<Stopwords, PipelineError> {
    match &cfg.bias.stopwords {
        Some(p) => Ok(Stopwords::parse(&std::fs::read_to_string(p).map_err(|e| PipelineError::io(p, e))?)),
        None => Ok(Stopwords::shipped()),
    }
}

fn attributions(w: &mut Writer, cfg: &PipelineConfig, corpus: &[CorpusSentence], stopwords: &Stopwords) -> Result<(), PipelineError> {
    let (model, sentences): (TextClassifier, Vec<CorpusSentence>) = match &cfg.bias.model {
        Some(p) => {
            let model = TextClassifier::load(p).map_err(|e| PipelineError::Config(format!("bias model: {e}")))?;
            (model, corpus.to_vec())
        }
        None => match train_classifier(corpus, &cfg.bias.train, cfg.seed) {
            Ok((model, report)) => {
                let test: Vec<CorpusSentence> = report.test_indices.iter().map(|&i| corpus[i].clone()).collect();
                w.write_json("bias_training.json", &report)?;
                (model, test)
            }
            Err(e) => {
                w.warn(format!("attributions skipped: {e}"));
                return w.write("attributions.csv", &attribution_csv(&[]));
            }
        },
    };
    let attrs = TokenAttributions::compute_all(&model, &sentences, cfg.bias.ig_steps)
        .map_err(|e| PipelineError::Store(format!("attribution: {e}")))?;
    let tables: Vec<(BiasLabel, Vec<_>)> = [BiasLabel::Bjp, BiasLabel::Opposition]
        .into_iter()
        .map(|label| (label, rank_tokens(&attrs, label, stopwords, cfg.bias.min_freq)))
        .collect();
    w.write("attributions.csv", &attribution_csv(&tables))
}

/// Builds every report table from an analysed store into `out_dir`.
///
/// Only records with status `ok` enter the aggregates; failed videos are
/// listed in `failed.csv`. Output is a pure function of the store contents
/// and the stored configuration (including its seed).
pub fn report(store_dir: &Path, out_dir: &Path) -> Result<ReportSummary, PipelineError> {
    let store = ResultStore::open(store_dir)?;
    let stored = store.videos()?;
    if stored.is_empty() {
        return Err(PipelineError::EmptyStore(store_dir.to_path_buf()));
    }
    let cfg = store.read_config()?;
    let clusters = store.read_clusters()?;
    let cluster_by_id: BTreeMap<u32, &PanelistCluster> = clusters.iter().map(|c| (c.cluster_id.0, c)).collect();
    std::fs::create_dir_all(out_dir).map_err(|e| PipelineError::io(out_dir, e))?;
    let mut w = Writer {
        out: out_dir.to_path_buf(),
        summary: ReportSummary::default(),
    };

    let videos: Vec<Video> = stored
        .values()
        .filter(|s| s.is_ok())
        .filter_map(|s| Some(Video {
            record: s.record.as_ref()?,
            metrics: s.metrics.as_ref()?,
        }))
        .collect();
    let failed: Vec<&StoredVideo> = stored.values().filter(|s| !s.is_ok()).collect();

    let assignment: BTreeMap<String, CategoryId> = videos
        .iter()
        .filter_map(|v| v.category().map(|c| (v.id().to_string(), c.clone())))
        .collect();
    let overlap: BTreeMap<String, f64> = videos.iter().map(|v| (v.id().to_string(), v.metrics.analysis.overlap_fraction)).collect();
    let toxic: BTreeMap<String, f64> = videos
        .iter()
        .map(|v| (v.id().to_string(), v.metrics.analysis.toxic_utterance_fraction))
        .collect();
    let shouting: BTreeMap<String, f64> = videos
        .iter()
        .filter(|v| v.metrics.shouting_evaluated)
        .map(|v| (v.id().to_string(), v.metrics.analysis.shouting_fraction))
        .collect();

    let table = category_table(&mut w, "overlap_by_category.csv", "overlap fraction", &overlap, &assignment);
    w.write("overlap_by_category.csv", &table)?;
    let table = category_table(&mut w, "toxicity_by_category.csv", "toxic utterance fraction", &toxic, &assignment);
    w.write("toxicity_by_category.csv", &table)?;
    let table = category_table(&mut w, "shouting_by_category.csv", "shouting fraction", &shouting, &assignment);
    w.write("shouting_by_category.csv", &table)?;

    let mut by_category: BTreeMap<&CategoryId, Vec<&Video>> = BTreeMap::new();
    for v in &videos {
        if let Some(c) = v.category() {
            by_category.entry(c).or_default().push(v);
        }
    }
    let rows = by_category.iter().map(|(cat, vs)| {
        let shouted: Vec<f64> = vs
            .iter()
            .filter(|v| v.metrics.shouting_evaluated)
            .map(|v| v.metrics.analysis.shouting_fraction)
            .collect();
        let n = vs.len() as f64;
        vec![
            cat.to_string(),
            vs.len().to_string(),
            opt(mean(vs.iter().map(|v| v.metrics.analysis.overlap_fraction).collect())),
            opt(mean(vs.iter().map(|v| v.metrics.analysis.toxic_utterance_fraction).collect())),
            (vs.iter().filter(|v| v.metrics.analysis.has_toxic_speech).count() as f64 / n).to_string(),
            shouted.len().to_string(),
            opt(mean(shouted)),
        ]
    });
    let text = csv_text(
        &[
            "category",
            "n_videos",
            "mean_overlap_fraction",
            "mean_toxic_utterance_fraction",
            "toxic_video_fraction",
            "n_shouting_evaluated",
            "mean_shouting_fraction",
        ],
        rows,
    );
    w.write("category_summary.csv", &text)?;

    let mut months: BTreeMap<String, (u64, u64, u64)> = BTreeMap::new();
    for v in &videos {
        let m = months.entry(v.record.published_at.format("%Y-%m").to_string()).or_default();
        m.0 += v.metrics.sampled_frames;
        m.1 += v.metrics.male_faces;
        m.2 += v.metrics.female_faces;
    }
    let per_frame = |faces: u64, frames: u64| if frames == 0 { String::new() } else { (faces as f64 / frames as f64).to_string() };
    let rows = months.iter().map(|(month, &(frames, male, female))| {
        vec![
            month.clone(),
            frames.to_string(),
            male.to_string(),
            female.to_string(),
            per_frame(male, frames),
            per_frame(female, frames),
        ]
    });
    let text = csv_text(&["month", "frames", "male_faces", "female_faces", "male_per_frame", "female_per_frame"], rows);
    w.write("gender_monthly.csv", &text)?;

    let rows = by_category.iter().map(|(cat, vs)| {
        let male = sorted_sum(vs.iter().map(|v| v.metrics.analysis.male_face_seconds).collect());
        let female = sorted_sum(vs.iter().map(|v| v.metrics.analysis.female_face_seconds).collect());
        let share = (male + female > 0.0).then(|| female / (male + female));
        vec![cat.to_string(), vs.len().to_string(), male.to_string(), female.to_string(), opt(share)]
    });
    let text = csv_text(&["category", "n_videos", "male_face_seconds", "female_face_seconds", "female_share"], rows);
    w.write("gender_by_category.csv", &text)?;

    let pooled_area = |count: fn(&VideoMetrics) -> u64, area: fn(&VideoMetrics) -> Option<f64>| {
        let n: u64 = videos.iter().map(|v| count(v.metrics)).sum();
        let total = sorted_sum(
            videos
                .iter()
                .filter_map(|v| area(v.metrics).map(|a| a * count(v.metrics) as f64))
                .collect(),
        );
        (n, (n > 0).then(|| total / n as f64))
    };
    let (male_n, male_area) = pooled_area(|m| m.male_faces, |m| m.male_mean_face_area);
    let (female_n, female_area) = pooled_area(|m| m.female_faces, |m| m.female_mean_face_area);
    let text = csv_text(
        &["gender", "faces", "mean_area_px"],
        [
            vec!["male".to_string(), male_n.to_string(), opt(male_area)],
            vec!["female".to_string(), female_n.to_string(), opt(female_area)],
        ],
    );
    w.write("face_area_by_gender.csv", &text)?;

    let rows = videos
        .iter()
        .flat_map(|v| v.metrics.hashtags.iter().map(move |h| vec![v.id().to_string(), h.clone()]));
    let text = csv_text(&["video_id", "hashtag"], rows);
    w.write("hashtags.csv", &text)?;

    let rows = videos.iter().map(|v| {
        vec![
            v.id().to_string(),
            v.metrics.shouting_evaluated.to_string(),
            v.metrics.analysis.shouting_fraction.to_string(),
            v.metrics.shouters.to_string(),
        ]
    });
    let text = csv_text(&["video_id", "shouting_evaluated", "shouting_fraction", "shouters"], rows);
    w.write("shouters.csv", &text)?;

    let party_table = load_party_table(&cfg)?;
    let affs = affiliations(&videos, &cluster_by_id);
    let shares = appearance_bias(&affs, &assignment, &party_table);
    let rows = shares.iter().map(|(cat, s)| {
        vec![
            cat.to_string(),
            s.bjp_appearances.to_string(),
            s.opposition_appearances.to_string(),
            s.bjp_fraction.to_string(),
            s.opposition_fraction.to_string(),
        ]
    });
    let text = csv_text(
        &["category", "bjp_appearances", "opposition_appearances", "bjp_fraction", "opposition_fraction"],
        rows,
    );
    w.write("appearance_by_category.csv", &text)?;

    let incivility: BTreeMap<String, f64> = videos
        .iter()
        .map(|v| {
            let a = &v.metrics.analysis;
            (v.id().to_string(), a.overlap_fraction + a.toxic_utterance_fraction)
        })
        .collect();
    let triads = triad_incivility(&affs, &incivility, &party_table, cfg.network.triads);
    let rows = triads.iter().map(|r| {
        vec![
            r.triad.to_string(),
            r.frequency.to_string(),
            r.n_videos.to_string(),
            r.mean_incivility.to_string(),
            opt(r.t_test.as_ref().map(|t| t.t_stat)),
            opt(r.t_test.as_ref().map(|t| t.p_value)),
        ]
    });
    let text = csv_text(&["triad", "frequency", "n_videos", "mean_incivility", "t_stat", "p_value"], rows);
    w.write("triads.csv", &text)?;

    let graph = build_graph(videos.iter().map(|v| &v.metrics.analysis.panelists));
    w.write("network_edges.csv", &graph.to_edge_csv())?;
    let (ids, weighted) = graph.to_weighted();
    let partition = match louvain(&weighted, cfg.seed) {
        Ok(result) => {
            let members: Vec<_> = ids
                .iter()
                .zip(&result.communities)
                .map(|(id, c)| {
                    json!({
                        "cluster_id": id.0,
                        "canonical_name": cluster_by_id.get(&id.0).map(|c| c.canonical_name.as_str()),
                        "community": c,
                    })
                })
                .collect();
            json!({
                "seed": cfg.seed,
                "modularity": result.modularity,
                "n_communities": result.n_communities(),
                "members": members,
            })
        }
        Err(e) => {
            w.warn(format!("community detection skipped: {e}"));
            json!({ "seed": cfg.seed, "modularity": null, "n_communities": 0, "members": [] })
        }
    };
    w.write_json("network_partition.json", &partition)?;

    let corpus: Vec<CorpusSentence> = videos.iter().flat_map(|v| v.metrics.bias_sentences.iter().cloned()).collect();
    let mut text = String::new();
    for s in &corpus {
        text.push_str(&serde_json::to_string(s).map_err(|e| PipelineError::Store(e.to_string()))?);
        text.push('\n');
    }
    w.write("bias_corpus.jsonl", &text)?;
    let stopwords = load_stopwords(&cfg)?;
    attributions(&mut w, &cfg, &corpus, &stopwords)?;

    let rows = failed.iter().map(|s| {
        vec![
            s.video_id.clone(),
            s.stage.clone().unwrap_or_default(),
            s.error.clone().unwrap_or_default(),
        ]
    });
    w.write("failed.csv", &csv_text(&["video_id", "stage", "error"], rows))?;

    let speech = sorted_sum(videos.iter().map(|v| v.metrics.speech_seconds).collect());
    let overlapped = sorted_sum(videos.iter().map(|v| v.metrics.overlapped_seconds).collect());
    let n = videos.len();
    let male_s = sorted_sum(videos.iter().map(|v| v.metrics.analysis.male_face_seconds).collect());
    let female_s = sorted_sum(videos.iter().map(|v| v.metrics.analysis.female_face_seconds).collect());
    let summary = json!({
        "videos_ok": n,
        "videos_failed": failed.len(),
        "mean_overlap_fraction": mean(overlap.values().copied().collect()),
        "pooled_overlap_fraction": (speech > 0.0).then(|| overlapped / speech),
        "mean_toxic_utterance_fraction": mean(toxic.values().copied().collect()),
        "toxic_video_fraction": (n > 0).then(|| videos.iter().filter(|v| v.metrics.analysis.has_toxic_speech).count() as f64 / n as f64),
        "shouting_videos_evaluated": shouting.len(),
        "mean_shouting_fraction": mean(shouting.values().copied().collect()),
        "female_screen_share": (male_s + female_s > 0.0).then(|| female_s / (male_s + female_s)),
        "panelist_clusters": clusters.len(),
        "bias_sentences": corpus.len(),
        "warnings": w.summary.warnings.clone(),
    });
    w.write_json("summary.json", &summary)?;
    Ok(w.summary)
}
