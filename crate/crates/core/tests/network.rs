mod common;

use std::collections::{BTreeMap, BTreeSet};

use panelscope::model::ClusterId;
use panelscope::network::{
    build_graph, louvain, modularity, triad_incivility, video_triads, NetworkError, PartyTable, TriadCounting,
    TriadOptions, WeightedGraph,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{best_partition, modularity_oracle, same_partition};

fn random_graph(rng: &mut ChaCha8Rng) -> (usize, Vec<(usize, usize, f64)>) {
    let n = rng.gen_range(2..=50);
    let p = rng.gen_range(0.05..0.5);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v, rng.gen_range(1..=5) as f64));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, 1, 1.0));
    }
    (n, edges)
}

#[test]
fn history_never_decreases_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(20221019);
    for round in 0..20 {
        let (n, edges) = random_graph(&mut rng);
        let graph = WeightedGraph::from_edges(n, &edges).unwrap();
        let result = louvain(&graph, round).unwrap();
        for w in result.history.windows(2) {
            assert!(w[1] >= w[0], "round {round}: history {:?}", result.history);
        }
        let oracle = modularity_oracle(n, &edges, &result.communities);
        assert!((result.modularity - oracle).abs() <= 1e-12, "round {round}");
        assert!((result.history.last().unwrap() - result.modularity).abs() <= 1e-12);
        assert!((result.history[0] - modularity_oracle(n, &edges, &(0..n).collect::<Vec<_>>())).abs() <= 1e-12);
    }
}

#[test]
fn two_disjoint_triangles() {
    let edges = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)];
    let graph = WeightedGraph::from_edges(6, &edges).unwrap();
    for seed in 0..5 {
        let r = louvain(&graph, seed).unwrap();
        assert_eq!(r.communities, vec![0, 0, 0, 1, 1, 1]);
        assert!((r.modularity - 0.5).abs() <= 1e-12);
    }
}

#[test]
fn bridged_cliques_reach_the_optimum() {
    let mut edges = Vec::new();
    for offset in [0, 5] {
        for u in 0..5 {
            for v in u + 1..5 {
                edges.push((offset + u, offset + v, 1.0));
            }
        }
    }
    edges.push((4, 5, 1.0));
    let (best_q, best) = best_partition(10, &edges);
    let graph = WeightedGraph::from_edges(10, &edges).unwrap();
    let r = louvain(&graph, 3).unwrap();
    assert!(same_partition(&r.communities, &best));
    assert!((r.modularity - best_q).abs() <= 1e-12);
    assert_eq!(r.n_communities(), 2);
}

#[test]
fn deterministic_for_a_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (n, edges) = random_graph(&mut rng);
    let graph = WeightedGraph::from_edges(n, &edges).unwrap();
    assert_eq!(louvain(&graph, 11).unwrap(), louvain(&graph, 11).unwrap());
}

#[test]
fn empty_graph_is_an_error() {
    let graph = WeightedGraph::from_edges(3, &[]).unwrap();
    assert_eq!(louvain(&graph, 0), Err(NetworkError::EmptyGraph));
}

fn affs(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// 50 videos carry one triad and 49 another; each video's incivility is the
/// sum of a hand-picked overlap fraction and toxic fraction.
#[test]
fn triad_threshold_and_componentwise_incivility() {
    let table = PartyTable::shipped();
    let mut aff = BTreeMap::new();
    let mut overlap = BTreeMap::new();
    let mut toxic = BTreeMap::new();
    for i in 0..50 {
        let id = format!("x{i:02}");
        aff.insert(id.clone(), affs(&["Congress", "BJP", "BJP"]));
        overlap.insert(id.clone(), [0.25, 0.5][i % 2]);
        toxic.insert(id, [0.125, 0.0, 0.375][i % 3]);
    }
    for i in 0..49 {
        let id = format!("y{i:02}");
        aff.insert(id.clone(), affs(&["AAP", "TMC", "BJP"]));
        overlap.insert(id.clone(), 0.75);
        toxic.insert(id, 0.25);
    }
    let incivility: BTreeMap<String, f64> = overlap.iter().map(|(k, o)| (k.clone(), o + toxic[k])).collect();
    let options = TriadOptions {
        min_freq: 50,
        counting: TriadCounting::OncePerVideo,
    };
    let rows = triad_incivility(&aff, &incivility, &table, options);
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row.triad.to_string(), "Congress-BJP-BJP");
    assert_eq!((row.frequency, row.n_videos), (50, 50));
    // 25 × 0.25 + 25 × 0.5 overlap; 17 × 0.125 + 17 × 0 + 16 × 0.375 toxic.
    let mean_overlap = (25.0 * 0.25 + 25.0 * 0.5) / 50.0;
    let mean_toxic = (17.0 * 0.125 + 16.0 * 0.375) / 50.0;
    assert!((row.mean_incivility - (mean_overlap + mean_toxic)).abs() <= 1e-12);

    let looser = TriadOptions { min_freq: 49, ..options };
    let rows = triad_incivility(&aff, &incivility, &table, looser);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1].frequency, 49);
    assert!((rows[1].mean_incivility - 1.0).abs() <= 1e-12);
}

fn panel() -> impl Strategy<Value = BTreeSet<ClusterId>> {
    prop::collection::btree_set((0u32..12).prop_map(ClusterId), 0..6)
}

const AFFILIATIONS: [&str; 7] = ["BJP", "Congress", "AAP", "TMC", "DMK", "Republic TV", "Unknown Party"];

proptest! {
    #[test]
    fn graph_ignores_video_order(panels in prop::collection::vec(panel(), 0..20), seed in any::<u64>()) {
        let mut shuffled = panels.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.gen_range(0..=i));
        }
        let a = build_graph(panels.iter());
        let b = build_graph(shuffled.iter());
        prop_assert_eq!(&a, &b);
        for (&(u, v), &w) in &a.edges {
            prop_assert!(u < v);
            let together = panels.iter().filter(|p| p.contains(&u) && p.contains(&v)).count() as u32;
            prop_assert_eq!(w, together);
        }
    }

    #[test]
    fn triads_ignore_panel_order(idx in prop::collection::vec(0usize..AFFILIATIONS.len(), 0..7), seed in any::<u64>()) {
        let table = PartyTable::shipped();
        let names: Vec<String> = idx.iter().map(|&i| AFFILIATIONS[i].to_string()).collect();
        let mut shuffled = names.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.gen_range(0..=i));
        }
        for counting in [TriadCounting::OncePerVideo, TriadCounting::PerCombination] {
            let mut a = video_triads(&names, &table, counting);
            let mut b = video_triads(&shuffled, &table, counting);
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn louvain_never_beats_the_exhaustive_optimum(
        n in 2usize..8,
        raw in prop::collection::vec((0usize..8, 0usize..8, 1u8..4), 1..16),
        seed in any::<u64>(),
    ) {
        let edges: Vec<(usize, usize, f64)> = raw
            .into_iter()
            .map(|(u, v, w)| (u % n, v % n, w as f64))
            .filter(|(u, v, _)| u != v)
            .collect();
        prop_assume!(!edges.is_empty());
        let graph = WeightedGraph::from_edges(n, &edges).unwrap();
        let r = louvain(&graph, seed).unwrap();
        let (best, _) = best_partition(n, &edges);
        prop_assert!(r.modularity <= best + 1e-12);
        prop_assert!((modularity(&graph, &r.communities) - modularity_oracle(n, &edges, &r.communities)).abs() <= 1e-12);
    }
}
