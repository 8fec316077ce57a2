use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{partial_token_sort_ratio, phonetic_key, NameNormalizer};
use crate::ingest::NameCandidates;
use crate::model::{ClusterId, PanelistCluster};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterOptions {
    /// Minimum partial token-sort ratio for joining a cluster.
    pub fuzzy_threshold: u8,
    /// Also join a cluster whose canonical name has the same phonetic key.
    pub use_phonetic: bool,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        Self {
            fuzzy_threshold: 85,
            use_phonetic: true,
        }
    }
}

/// Greedy single-pass clustering of name candidates.
///
/// Names are visited by descending corpus frequency (number of videos that
/// mention them), ties broken lexicographically. Each name joins the first
/// cluster whose canonical name matches it, or founds a new cluster whose
/// canonical name it becomes. Candidates that normalize to nothing are skipped.
pub fn cluster_names(
    candidates: &[NameCandidates],
    normalizer: &NameNormalizer,
    options: ClusterOptions,
) -> Vec<PanelistCluster> {
    let mut videos_by_name: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
    for row in candidates {
        for raw in &row.candidates {
            if let Ok(name) = normalizer.normalize(raw) {
                videos_by_name.entry(name).or_default().insert(row.video_id.as_str());
            }
        }
    }
    let mut order: Vec<(&String, &BTreeSet<&str>)> = videos_by_name.iter().collect();
    order.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(b.0)));

    struct Draft<'a> {
        canonical: &'a str,
        phonetic: String,
        variants: BTreeSet<String>,
        videos: BTreeSet<&'a str>,
    }
    let mut drafts: Vec<Draft> = Vec::new();
    for (name, videos) in order {
        let phonetic = phonetic_key(name);
        let found = drafts.iter_mut().find(|d| {
            partial_token_sort_ratio(name, d.canonical) >= options.fuzzy_threshold
                || (options.use_phonetic && !phonetic.is_empty() && phonetic == d.phonetic)
        });
        match found {
            Some(d) => {
                d.variants.insert(name.clone());
                d.videos.extend(videos.iter().copied());
            }
            None => drafts.push(Draft {
                canonical: name,
                phonetic,
                variants: BTreeSet::from([name.clone()]),
                videos: videos.clone(),
            }),
        }
    }

    drafts
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            let frequency = d.videos.len() as u32;
            PanelistCluster {
                cluster_id: ClusterId(i as u32),
                canonical_name: d.canonical.to_string(),
                variants: d.variants,
                occupation: None,
                affiliation: None,
                frequency,
                low_confidence: frequency <= 1,
            }
        })
        .collect()
}

/// Lookup from normalized variant names to cluster ids.
#[derive(Debug, Clone, Default)]
pub struct NameIndex {
    by_variant: HashMap<String, ClusterId>,
}

impl NameIndex {
    pub fn new(clusters: &[PanelistCluster]) -> Self {
        let mut by_variant = HashMap::new();
        for c in clusters {
            for v in &c.variants {
                by_variant.insert(v.clone(), c.cluster_id);
            }
        }
        Self { by_variant }
    }

    pub fn resolve(&self, raw: &str, normalizer: &NameNormalizer) -> Option<ClusterId> {
        let name = normalizer.normalize(raw).ok()?;
        self.by_variant.get(&name).copied()
    }

    /// Distinct clusters mentioned by a video's candidates.
    pub fn resolve_all<'a>(
        &self,
        raws: impl IntoIterator<Item = &'a String>,
        normalizer: &NameNormalizer,
    ) -> BTreeSet<ClusterId> {
        raws.into_iter().filter_map(|r| self.resolve(r, normalizer)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(videos: &[&[&str]]) -> Vec<NameCandidates> {
        videos
            .iter()
            .enumerate()
            .map(|(i, names)| NameCandidates {
                video_id: format!("v{i}"),
                candidates: names.iter().map(|s| s.to_string()).collect(),
            })
            .collect()
    }

    #[test]
    fn bakshi_variants_form_one_cluster() {
        let input = rows(&[&["general gd bakshi", "g.d. bakshi", "mr bakshi", "general bakshi"]]);
        let clusters = cluster_names(&input, &NameNormalizer::default(), ClusterOptions::default());
        assert_eq!(clusters.len(), 1);
        assert!(clusters[0].variants.contains(&clusters[0].canonical_name));
    }

    #[test]
    fn unrelated_names_stay_apart() {
        let input = rows(&[&["arnab goswami", "navika kumar"]]);
        let clusters = cluster_names(&input, &NameNormalizer::default(), ClusterOptions::default());
        assert_eq!(clusters.len(), 2);
    }

    #[test]
    fn phonetic_match_joins_clusters() {
        let input = rows(&[&["syed asad abbas"], &["syed asad abbas", "sayyed asad abbas"]]);
        let n = NameNormalizer::default();
        let strict = ClusterOptions {
            fuzzy_threshold: 95,
            use_phonetic: true,
        };
        assert!(partial_token_sort_ratio("syed asad abbas", "sayyed asad abbas") < 95);
        let clusters = cluster_names(&input, &n, strict);
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].canonical_name, "syed asad abbas");
        assert_eq!(clusters[0].frequency, 2);
        assert!(!clusters[0].low_confidence);

        let no_phonetic = ClusterOptions {
            use_phonetic: false,
            ..strict
        };
        assert_eq!(cluster_names(&input, &n, no_phonetic).len(), 2);
    }

    #[test]
    fn most_frequent_variant_is_canonical() {
        let input = rows(&[&["bakshi"], &["gd bakshi"], &["gd bakshi"]]);
        let clusters = cluster_names(&input, &NameNormalizer::default(), ClusterOptions::default());
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].canonical_name, "gd bakshi");
        assert_eq!(clusters[0].frequency, 3);
    }

    #[test]
    fn index_resolves_raw_names() {
        let n = NameNormalizer::default();
        let input = rows(&[&["Major General GD Bakshi", "Arnab Goswami"]]);
        let clusters = cluster_names(&input, &n, ClusterOptions::default());
        let index = NameIndex::new(&clusters);
        assert_eq!(index.resolve("gd bakshi", &n), index.resolve("General G.D. Bakshi", &n));
        assert!(index.resolve("someone else", &n).is_none());
    }
}
