//! All-pairs greenest paths.
//!
//! The production path is [`floyd_warshall_blocked`]; [`floyd_warshall`] is
//! the plain triple loop it must agree with. [`dijkstra`] and the exhaustive
//! searches in [`brute`] exist to check both.

pub mod brute;
mod dijkstra;
mod floyd;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{transform_weight, EdgeGviLookup, DEFAULT_MAX_NODES};
use crate::gvi::GviBand;
use crate::network::NodeId;

pub use brute::{enumerate_best_path, max_average_gvi_path, BrutePath, MAX_BRUTE_FORCE_NODES};
pub use dijkstra::{dijkstra, Dijkstra, SingleSource};
pub use floyd::{floyd_warshall, floyd_warshall_blocked, solve, ApspOptions, DEFAULT_BLOCK_SIZE};

/// Parent sentinel: no predecessor (unreachable, or the diagonal).
pub const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Error, PartialEq)]
pub enum RoutingError {
    #[error("graph with {n} nodes exceeds the configured cap of {cap}")]
    GraphTooLarge { n: usize, cap: usize },
    #[error("no path from {from} to {to}")]
    NoPath { from: NodeId, to: NodeId },
    #[error("start and destination are the same node {0}")]
    SameNode(NodeId),
    #[error("node {0} is not in the graph")]
    UnknownNode(NodeId),
    #[error("exhaustive search is limited to {max} nodes, graph has {n}")]
    TooLargeForBruteForce { n: usize, max: usize },
    #[error("predecessor walk from {to} back to {from} does not terminate")]
    BrokenPredecessors { from: NodeId, to: NodeId },
    #[error("route step {0} -> {1} is not an edge")]
    MissingEdge(NodeId, NodeId),
    #[error("inconsistent matrices: {0}")]
    Inconsistent(String),
}

/// Distance and predecessor matrices, both row-major `n x n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ApspResult {
    n: usize,
    dist: Vec<f64>,
    parents: Vec<u32>,
}

impl ApspResult {
    pub fn from_parts(n: usize, dist: Vec<f64>, parents: Vec<u32>) -> Result<Self, RoutingError> {
        if dist.len() != n * n || parents.len() != n * n {
            return Err(RoutingError::Inconsistent(format!(
                "n = {n} but {} distances and {} parents",
                dist.len(),
                parents.len()
            )));
        }
        if let Some(p) = parents.iter().find(|&&p| p != NO_PARENT && p as usize >= n) {
            return Err(RoutingError::Inconsistent(format!("parent {p} out of range")));
        }
        Ok(ApspResult { n, dist, parents })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, from: usize, to: usize) -> f64 {
        self.dist[from * self.n + to]
    }

    pub fn parent(&self, from: usize, to: usize) -> Option<NodeId> {
        match self.parents[from * self.n + to] {
            NO_PARENT => None,
            p => Some(NodeId(p)),
        }
    }

    pub fn dist_matrix(&self) -> &[f64] {
        &self.dist
    }

    pub fn parent_matrix(&self) -> &[u32] {
        &self.parents
    }

    pub fn dist_row(&self, from: usize) -> &[f64] {
        &self.dist[from * self.n..(from + 1) * self.n]
    }

    fn check(&self, node: NodeId) -> Result<(), RoutingError> {
        if node.index() >= self.n {
            return Err(RoutingError::UnknownNode(node));
        }
        Ok(())
    }

    /// Walks predecessors back from `dest`. The walk is bounded by `n`
    /// steps so a corrupt matrix cannot loop forever.
    pub fn reconstruct_path(&self, start: NodeId, dest: NodeId) -> Result<Vec<NodeId>, RoutingError> {
        self.check(start)?;
        self.check(dest)?;
        if start == dest {
            return Err(RoutingError::SameNode(start));
        }
        if !self.dist(start.index(), dest.index()).is_finite() {
            return Err(RoutingError::NoPath { from: start, to: dest });
        }
        let mut path = vec![dest];
        let mut cur = dest;
        while cur != start {
            cur = self
                .parent(start.index(), cur.index())
                .ok_or(RoutingError::BrokenPredecessors { from: start, to: dest })?;
            path.push(cur);
            if path.len() > self.n {
                return Err(RoutingError::BrokenPredecessors { from: start, to: dest });
            }
        }
        path.reverse();
        Ok(path)
    }
}

/// A reconstructed route with its greenery summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub nodes: Vec<NodeId>,
    pub edge_gvis: Vec<f64>,
    pub total_weight: f64,
    pub avg_gvi: f64,
    pub band: GviBand,
    pub node_count: usize,
}

impl RoutePlan {
    /// Reads edge GVIs along `nodes`. Needs at least one edge.
    pub fn from_nodes<L: EdgeGviLookup + ?Sized>(nodes: Vec<NodeId>, edges: &L) -> Result<Self, RoutingError> {
        match nodes.as_slice() {
            [] => return Err(RoutingError::Inconsistent("empty route".into())),
            [only] => return Err(RoutingError::SameNode(*only)),
            _ => {}
        }
        let mut edge_gvis = Vec::with_capacity(nodes.len() - 1);
        let mut total_weight = 0.0;
        for pair in nodes.windows(2) {
            let gvi = edges.edge_gvi(pair[0], pair[1]).ok_or(RoutingError::MissingEdge(pair[0], pair[1]))?;
            total_weight += transform_weight(gvi).map_err(|e| RoutingError::Inconsistent(e.to_string()))?;
            edge_gvis.push(gvi);
        }
        let avg_gvi = edge_gvis.iter().sum::<f64>() / edge_gvis.len() as f64;
        let band = GviBand::of(avg_gvi);
        let node_count = nodes.len();
        Ok(RoutePlan { nodes, edge_gvis, total_weight, avg_gvi, band, node_count })
    }

    pub fn edge_count(&self) -> usize {
        self.edge_gvis.len()
    }
}

/// Best route under the `sum(100 - GVI)` objective, read off the
/// precomputed matrices.
pub fn greenest_path<L: EdgeGviLookup + ?Sized>(
    apsp: &ApspResult,
    edges: &L,
    start: NodeId,
    dest: NodeId,
) -> Result<RoutePlan, RoutingError> {
    let nodes = apsp.reconstruct_path(start, dest)?;
    RoutePlan::from_nodes(nodes, edges)
}

pub(crate) fn check_size(n: usize, cap: usize) -> Result<(), RoutingError> {
    // parents are stored as u32 with one sentinel value
    let cap = cap.min(NO_PARENT as usize);
    if n > cap {
        return Err(RoutingError::GraphTooLarge { n, cap });
    }
    Ok(())
}

pub(crate) fn default_cap() -> usize {
    DEFAULT_MAX_NODES
}
