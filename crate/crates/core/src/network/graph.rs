use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::NetworkError;
use crate::model::ClusterId;

/// Undirected co-appearance graph. Edge weight is the number of videos in
/// which both panelists appeared.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoocGraph {
    pub nodes: BTreeSet<ClusterId>,
    /// Keyed by `(u, v)` with `u < v`.
    pub edges: BTreeMap<(ClusterId, ClusterId), u32>,
}

impl CoocGraph {
    pub fn weight(&self, a: ClusterId, b: ClusterId) -> u32 {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edges.get(&key).copied().unwrap_or(0)
    }

    /// Associative, commutative merge of edge counts.
    pub fn merge(mut self, other: CoocGraph) -> CoocGraph {
        self.nodes.extend(other.nodes);
        for (k, w) in other.edges {
            *self.edges.entry(k).or_insert(0) += w;
        }
        self
    }

    /// `u,v,weight` rows with a header.
    pub fn to_edge_csv(&self) -> String {
        let mut out = String::from("u,v,weight\n");
        for ((u, v), w) in &self.edges {
            out.push_str(&format!("{},{},{}\n", u.0, v.0, w));
        }
        out
    }

    /// Dense index form for community detection. Node `i` of the result is
    /// the `i`-th smallest cluster id.
    pub fn to_weighted(&self) -> (Vec<ClusterId>, WeightedGraph) {
        let ids: Vec<ClusterId> = self.nodes.iter().copied().collect();
        let index: BTreeMap<ClusterId, usize> = ids.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let edges: Vec<(usize, usize, f64)> = self
            .edges
            .iter()
            .map(|((u, v), w)| (index[u], index[v], *w as f64))
            .collect();
        let graph = WeightedGraph::from_edges(ids.len(), &edges).expect("edges reference known nodes");
        (ids, graph)
    }
}

/// Builds the co-appearance graph from each video's panelist set.
pub fn build_graph<'a, I>(videos: I) -> CoocGraph
where
    I: IntoIterator<Item = &'a BTreeSet<ClusterId>>,
{
    let mut graph = CoocGraph::default();
    for panel in videos {
        let members: Vec<ClusterId> = panel.iter().copied().collect();
        graph.nodes.extend(members.iter().copied());
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                *graph.edges.entry((u, v)).or_insert(0) += 1;
            }
        }
    }
    graph
}

/// Symmetric weighted adjacency lists. Self-loops are stored separately as
/// the diagonal entry `A_ii`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    pub(super) adjacency: Vec<Vec<(usize, f64)>>,
    pub(super) self_loops: Vec<f64>,
}

impl WeightedGraph {
    /// Undirected edges `(u, v, w)`. Repeated pairs accumulate. For `u == v`
    /// the weight is added to the diagonal entry twice, matching the usual
    /// convention that a self-loop contributes `2w` to the degree.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, NetworkError> {
        let mut dense: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        let mut self_loops = vec![0.0; n];
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(NetworkError::NodeOutOfRange(u, v));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(NetworkError::BadWeight(w));
            }
            if u == v {
                self_loops[u] += 2.0 * w;
            } else {
                *dense[u].entry(v).or_insert(0.0) += w;
                *dense[v].entry(u).or_insert(0.0) += w;
            }
        }
        Ok(Self {
            adjacency: dense.into_iter().map(|m| m.into_iter().collect()).collect(),
            self_loops,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn self_loop(&self, i: usize) -> f64 {
        self.self_loops[i]
    }

    /// Row sum of the adjacency matrix including the diagonal.
    pub fn degree(&self, i: usize) -> f64 {
        self.self_loops[i] + self.adjacency[i].iter().map(|(_, w)| w).sum::<f64>()
    }

    /// Sum of all adjacency entries, i.e. `2m`.
    pub fn total_degree(&self) -> f64 {
        (0..self.n_nodes()).map(|i| self.degree(i)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel(ids: &[u32]) -> BTreeSet<ClusterId> {
        ids.iter().map(|&i| ClusterId(i)).collect()
    }

    #[test]
    fn edge_counts() {
        let g = build_graph(&[panel(&[1, 2]), panel(&[1, 2])]);
        assert_eq!(g.weight(ClusterId(2), ClusterId(1)), 2);

        let g = build_graph(&[panel(&[7])]);
        assert!(g.edges.is_empty());
        assert_eq!(g.nodes.len(), 1);

        let g = build_graph(&[panel(&[1, 2, 3]), panel(&[1, 2])]);
        assert_eq!(g.weight(ClusterId(1), ClusterId(2)), 2);
        assert_eq!(g.weight(ClusterId(1), ClusterId(3)), 1);
        assert_eq!(g.weight(ClusterId(2), ClusterId(3)), 1);
        assert_eq!(g.to_edge_csv(), "u,v,weight\n1,2,2\n1,3,1\n2,3,1\n");
    }

    #[test]
    fn merge_matches_joint_build() {
        let a = [panel(&[1, 2, 3])];
        let b = [panel(&[2, 3]), panel(&[4, 1])];
        let joint: Vec<_> = a.iter().chain(b.iter()).cloned().collect();
        assert_eq!(build_graph(&a).merge(build_graph(&b)), build_graph(&joint));
    }

    #[test]
    fn weighted_degrees() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 2.0), (2, 2, 1.0)]).unwrap();
        assert_eq!(g.degree(1), 3.0);
        assert_eq!(g.degree(2), 4.0);
        assert_eq!(g.total_degree(), 8.0);
        assert!(WeightedGraph::from_edges(2, &[(0, 2, 1.0)]).is_err());
        assert!(WeightedGraph::from_edges(2, &[(0, 1, 0.0)]).is_err());
    }
}
