use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{check_size, default_cap, RoutingError};
use crate::graph::WeightedGraph;
use crate::network::NodeId;

/// Single-source result.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleSource {
    pub source: NodeId,
    pub dist: Vec<f64>,
    pub parents: Vec<Option<NodeId>>,
}

impl SingleSource {
    pub fn path_to(&self, dest: NodeId) -> Option<Vec<NodeId>> {
        if !self.dist.get(dest.index())?.is_finite() {
            return None;
        }
        let mut path = vec![dest];
        let mut cur = dest;
        while cur != self.source {
            cur = self.parents[cur.index()]?;
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }
}

#[derive(Copy, Clone, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Adjacency lists extracted once from a dense graph, reusable across
/// sources.
pub struct Dijkstra {
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl Dijkstra {
    pub fn new(graph: &WeightedGraph) -> Result<Self, RoutingError> {
        check_size(graph.n(), default_cap())?;
        let adjacency = (0..graph.n()).map(|u| graph.out_edges(u).collect()).collect();
        Ok(Dijkstra { adjacency })
    }

    pub fn run(&self, source: NodeId) -> Result<SingleSource, RoutingError> {
        let n = self.adjacency.len();
        if source.index() >= n {
            return Err(RoutingError::UnknownNode(source));
        }
        let mut dist = vec![f64::INFINITY; n];
        let mut parents = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[source.index()] = 0.0;
        heap.push(Entry { dist: 0.0, node: source.index() });
        while let Some(Entry { dist: d, node: u }) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adjacency[u] {
                let cand = d + w;
                if cand < dist[v] {
                    dist[v] = cand;
                    parents[v] = Some(NodeId::from(u));
                    heap.push(Entry { dist: cand, node: v });
                }
            }
        }
        Ok(SingleSource { source, dist, parents })
    }
}

pub fn dijkstra(graph: &WeightedGraph, source: NodeId) -> Result<SingleSource, RoutingError> {
    Dijkstra::new(graph)?.run(source)
}
