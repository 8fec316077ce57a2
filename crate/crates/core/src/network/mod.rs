//! Panelist co-appearance networks, Louvain communities, affiliation triads
//! and shouting participants.

mod graph;
mod louvain;
mod shouters;
mod triads;

use thiserror::Error;

pub use graph::{build_graph, CoocGraph, WeightedGraph};
pub use louvain::{louvain, modularity, LouvainResult};
pub use shouters::{shouters_per_video, SHOUTER_MIN_INTERSECTION_S};
pub use triads::{
    triad_incivility, video_triads, PartySide, PartyTable, Triad, TriadCounting, TriadOptions, TriadRow,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("edge ({0}, {1}) references a node outside the graph")]
    NodeOutOfRange(usize, usize),
    #[error("edge weight {0} is not positive and finite")]
    BadWeight(f64),
    #[error("line {0}: malformed party table row")]
    MalformedPartyRow(usize),
    #[error("unknown party side `{0}`")]
    UnknownSide(String),
}
