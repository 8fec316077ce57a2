use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::graph::WeightedGraph;
use super::NetworkError;

/// Minimum modularity improvement for a node move to be accepted.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LouvainResult {
    /// Community label per node, numbered by first appearance in node order.
    pub communities: Vec<usize>,
    pub modularity: f64,
    /// Modularity of the starting singleton partition followed by the value
    /// after every local-move pass that changed the partition.
    pub history: Vec<f64>,
    /// Number of aggregation levels that moved at least one node.
    pub levels: usize,
}

impl LouvainResult {
    pub fn n_communities(&self) -> usize {
        self.communities.iter().max().map_or(0, |m| m + 1)
    }
}

fn relabel_by_first_appearance(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    let out = labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect();
    (out, map.len())
}

/// Weighted Newman–Girvan modularity of a partition.
pub fn modularity(graph: &WeightedGraph, communities: &[usize]) -> f64 {
    let two_m = graph.total_degree();
    if two_m <= 0.0 {
        return 0.0;
    }
    let k = communities.iter().max().map_or(0, |m| m + 1);
    let mut internal = vec![0.0; k];
    let mut total = vec![0.0; k];
    for i in 0..graph.n_nodes() {
        let c = communities[i];
        total[c] += graph.degree(i);
        internal[c] += graph.self_loop(i);
        for &(j, w) in graph.neighbors(i) {
            if communities[j] == c {
                internal[c] += w;
            }
        }
    }
    internal
        .iter()
        .zip(&total)
        .map(|(inn, tot)| inn / two_m - (tot / two_m) * (tot / two_m))
        .sum()
}

/// Local-move phase on one level. Returns the community of each node in
/// `graph` and whether anything moved.
fn local_moves(
    graph: &WeightedGraph,
    rng: &mut ChaCha8Rng,
    mut on_pass: impl FnMut(&[usize]),
) -> (Vec<usize>, bool) {
    let n = graph.n_nodes();
    let two_m = graph.total_degree();
    let degree: Vec<f64> = (0..n).map(|i| graph.degree(i)).collect();
    let mut community: Vec<usize> = (0..n).collect();
    let mut total = degree.clone();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let threshold = MIN_GAIN * two_m / 2.0;

    let mut moved_any = false;
    loop {
        let mut moved = false;
        for &i in &order {
            let own = community[i];
            let k_i = degree[i];
            let mut links: BTreeMap<usize, f64> = BTreeMap::new();
            for &(j, w) in graph.neighbors(i) {
                *links.entry(community[j]).or_insert(0.0) += w;
            }
            total[own] -= k_i;
            let gain = |c: usize, links: &BTreeMap<usize, f64>| links.get(&c).copied().unwrap_or(0.0) - total[c] * k_i / two_m;
            let mut best = own;
            let mut best_gain = gain(own, &links);
            for &c in links.keys() {
                if c == own {
                    continue;
                }
                let g = gain(c, &links);
                if g > best_gain + threshold {
                    best = c;
                    best_gain = g;
                }
            }
            total[best] += k_i;
            if best != own {
                community[i] = best;
                moved = true;
            }
        }
        if !moved {
            break;
        }
        moved_any = true;
        on_pass(&community);
    }
    (community, moved_any)
}

fn aggregate(graph: &WeightedGraph, community: &[usize], k: usize) -> WeightedGraph {
    let mut dense: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); k];
    let mut self_loops = vec![0.0; k];
    for i in 0..graph.n_nodes() {
        let c = community[i];
        self_loops[c] += graph.self_loop(i);
        for &(j, w) in graph.neighbors(i) {
            let d = community[j];
            if d == c {
                self_loops[c] += w;
            } else {
                *dense[c].entry(d).or_insert(0.0) += w;
            }
        }
    }
    WeightedGraph {
        adjacency: dense.into_iter().map(|m| m.into_iter().collect()).collect(),
        self_loops,
    }
}

/// Two-phase Louvain community detection. Node visiting order on each level
/// is shuffled by `seed`; the result is deterministic for a fixed seed.
pub fn louvain(graph: &WeightedGraph, seed: u64) -> Result<LouvainResult, NetworkError> {
    if graph.n_nodes() == 0 || graph.total_degree() <= 0.0 {
        return Err(NetworkError::EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut node_of: Vec<usize> = (0..graph.n_nodes()).collect();
    let mut history = vec![modularity(graph, &node_of)];
    let mut level_graph = graph.clone();
    let mut levels = 0;

    loop {
        let (community, moved) = local_moves(&level_graph, &mut rng, |c| {
            let projected: Vec<usize> = node_of.iter().map(|&v| c[v]).collect();
            history.push(modularity(graph, &projected));
        });
        if !moved {
            break;
        }
        levels += 1;
        let (community, k) = relabel_by_first_appearance(&community);
        for v in node_of.iter_mut() {
            *v = community[*v];
        }
        level_graph = aggregate(&level_graph, &community, k);
    }

    let (communities, _) = relabel_by_first_appearance(&node_of);
    let q = modularity(graph, &communities);
    Ok(LouvainResult {
        communities,
        modularity: q,
        history,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clique_edges(nodes: &[usize]) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (a, &u) in nodes.iter().enumerate() {
            for &v in &nodes[a + 1..] {
                out.push((u, v, 1.0));
            }
        }
        out
    }

    #[test]
    fn two_triangles() {
        let mut edges = clique_edges(&[0, 1, 2]);
        edges.extend(clique_edges(&[3, 4, 5]));
        let g = WeightedGraph::from_edges(6, &edges).unwrap();
        let r = louvain(&g, 1).unwrap();
        assert_eq!(r.communities, vec![0, 0, 0, 1, 1, 1]);
        assert!((r.modularity - 0.5).abs() < 1e-12);
    }

    #[test]
    fn complete_graph_is_one_community() {
        let g = WeightedGraph::from_edges(4, &clique_edges(&[0, 1, 2, 3])).unwrap();
        for seed in 0..10 {
            let r = louvain(&g, seed).unwrap();
            assert_eq!(r.n_communities(), 1, "seed {seed}");
        }
    }

    #[test]
    fn bridged_cliques() {
        let mut edges = clique_edges(&[0, 1, 2, 3, 4]);
        edges.extend(clique_edges(&[5, 6, 7, 8, 9]));
        edges.push((4, 5, 1.0));
        let g = WeightedGraph::from_edges(10, &edges).unwrap();
        let r = louvain(&g, 7).unwrap();
        assert_eq!(r.communities, vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn aggregation_preserves_modularity() {
        let mut edges = clique_edges(&[0, 1, 2]);
        edges.extend(clique_edges(&[2, 3, 4]));
        edges.push((4, 4, 2.0));
        let g = WeightedGraph::from_edges(5, &edges).unwrap();
        let partition = [0, 0, 1, 1, 1];
        let agg = aggregate(&g, &partition, 2);
        assert!((modularity(&g, &partition) - modularity(&agg, &[0, 1])).abs() < 1e-15);
        assert_eq!(agg.total_degree(), g.total_degree());
    }

    #[test]
    fn empty_graph_errors() {
        assert_eq!(louvain(&WeightedGraph::from_edges(0, &[]).unwrap(), 0), Err(NetworkError::EmptyGraph));
        assert_eq!(louvain(&WeightedGraph::from_edges(3, &[]).unwrap(), 0), Err(NetworkError::EmptyGraph));
    }

    #[test]
    fn seeded_determinism() {
        let edges: Vec<_> = (0..20).map(|i| (i, (i * 7 + 3) % 20, 1.0 + (i % 3) as f64)).filter(|e| e.0 != e.1).collect();
        let g = WeightedGraph::from_edges(20, &edges).unwrap();
        assert_eq!(louvain(&g, 42).unwrap(), louvain(&g, 42).unwrap());
    }
}
