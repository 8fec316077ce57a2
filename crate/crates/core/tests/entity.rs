use std::collections::BTreeSet;

use panelscope::entity::{
    cluster_names, levenshtein, normalize_name, partial_token_sort_ratio, phonetic_key, ClusterOptions, NameNormalizer,
};
use panelscope::ingest::NameCandidates;
use proptest::prelude::*;

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
fn four_spellings_share_one_key() {
    for name in ["syed asad abbas", "sayyad asad abbas", "sayyed asad abbas", "syed assad abbas"] {
        assert_eq!(phonetic_key(name), "SYT AST ABS", "{name}");
    }
}

#[test]
fn bakshi_variants_cluster_and_arnab_stays_apart() {
    let input = rows(&[
        &["general gd bakshi", "g.d. bakshi", "arnab goswami"],
        &["mr bakshi", "general bakshi", "arnab goswami"],
        &["major general gd bakshi"],
    ]);
    let clusters = cluster_names(&input, &NameNormalizer::default(), ClusterOptions::default());
    assert_eq!(clusters.len(), 2);
    let bakshi = clusters.iter().find(|c| c.canonical_name.contains("bakshi")).unwrap();
    let arnab = clusters.iter().find(|c| c.canonical_name == "arnab goswami").unwrap();
    assert_eq!(bakshi.frequency, 3);
    assert_eq!(arnab.variants, BTreeSet::from(["arnab goswami".to_string()]));
    assert!(bakshi.variants.iter().all(|v| v.contains("bakshi")));
}

#[test]
fn honorifics_are_stripped() {
    assert_eq!(normalize_name("Major General  G.D. Bakshi").unwrap(), "gd bakshi");
    assert_eq!(normalize_name("Shri Atiq-ur-Rehman Sahab").unwrap(), "atiq ur rehman");
    assert!(normalize_name("Mr.").is_err());
}

/// Raising the threshold can merge names. At 70 "kumar" joins the more
/// frequent "kxmar singh" (ratio 80) and the two longer names, each far
/// from "kxmar singh" and from each other, found clusters of their own. At
/// 85 "kumar" founds a cluster and both longer names contain it.
#[test]
fn raising_the_threshold_can_reduce_the_cluster_count() {
    let input = rows(&[
        &["kxmar singh", "kumar", "kumar ravi", "bose kumar"],
        &["kxmar singh", "kumar", "kumar ravi"],
        &["kxmar singh", "kumar"],
        &["kxmar singh"],
    ]);
    assert_eq!(partial_token_sort_ratio("kxmar singh", "kumar"), 80);
    assert_eq!(partial_token_sort_ratio("kxmar singh", "kumar ravi"), 50);
    assert_eq!(partial_token_sort_ratio("kxmar singh", "bose kumar"), 10);
    assert_eq!(partial_token_sort_ratio("kumar ravi", "bose kumar"), 0);
    let n = NameNormalizer::default();
    let at = |t: u8| {
        cluster_names(
            &input,
            &n,
            ClusterOptions {
                fuzzy_threshold: t,
                use_phonetic: false,
            },
        )
        .len()
    };
    assert_eq!(at(70), 3);
    assert_eq!(at(85), 2);
}

fn lev_oracle(a: &[char], b: &[char]) -> usize {
    let mut table = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in table.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        table[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = table[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            table[i][j] = sub.min(table[i - 1][j] + 1).min(table[i][j - 1] + 1);
        }
    }
    table[a.len()][b.len()]
}

fn name_strategy() -> impl Strategy<Value = String> {
    prop::collection::vec("[a-e]{1,5}", 1..4).prop_map(|t| t.join(" "))
}

proptest! {
    #[test]
    fn levenshtein_matches_table_oracle(a in "[a-d]{0,10}", b in "[a-d]{0,10}") {
        let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        prop_assert_eq!(levenshtein(&a, &b), lev_oracle(&a, &b));
        prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
    }

    #[test]
    fn ratio_is_symmetric_and_order_free(a in name_strategy(), b in name_strategy()) {
        let r = partial_token_sort_ratio(&a, &b);
        prop_assert!(r <= 100);
        prop_assert_eq!(r, partial_token_sort_ratio(&b, &a));
        prop_assert_eq!(partial_token_sort_ratio(&a, &a), 100);
        let reversed: Vec<&str> = a.split(' ').rev().collect();
        prop_assert_eq!(partial_token_sort_ratio(&reversed.join(" "), &b), r);
    }

    /// Whatever the threshold, clusters partition the distinct normalized
    /// names, their count lies between 1 and that number, and the extreme
    /// thresholds give one cluster and one cluster per name.
    #[test]
    fn cluster_count_bounds(
        videos in prop::collection::vec(prop::collection::vec(name_strategy(), 1..4), 1..6),
        threshold in 0u8..=100,
    ) {
        let input: Vec<NameCandidates> = videos
            .iter()
            .enumerate()
            .map(|(i, c)| NameCandidates { video_id: format!("v{i}"), candidates: c.clone() })
            .collect();
        let n = NameNormalizer::default();
        let distinct: BTreeSet<String> = videos.iter().flatten().filter_map(|c| n.normalize(c).ok()).collect();
        prop_assume!(!distinct.is_empty());
        let opts = |t| ClusterOptions { fuzzy_threshold: t, use_phonetic: false };
        let clusters = cluster_names(&input, &n, opts(threshold));
        prop_assert!(!clusters.is_empty() && clusters.len() <= distinct.len());
        let mut seen = BTreeSet::new();
        for c in &clusters {
            prop_assert!(c.variants.contains(&c.canonical_name));
            for v in &c.variants {
                prop_assert!(seen.insert(v.clone()));
            }
        }
        prop_assert_eq!(&seen, &distinct);
        prop_assert_eq!(cluster_names(&input, &n, opts(0)).len(), 1);
        prop_assert_eq!(cluster_names(&input, &n, opts(101)).len(), distinct.len());
    }
}
