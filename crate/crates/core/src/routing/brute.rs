//! Exhaustive simple-path search for small graphs.
//!
//! Every simple path from the start is enumerated by depth-first search, so
//! the results depend on nothing but the edge list. Used to validate the
//! matrix kernels and to compare the min-sum objective against a
//! max-average one.

use std::cmp::Ordering;

use super::RoutingError;
use crate::graph::WeightedGraph;
use crate::network::NodeId;

/// Exhaustive search gets factorially slow past this.
pub const MAX_BRUTE_FORCE_NODES: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct BrutePath {
    pub nodes: Vec<NodeId>,
    pub total_weight: f64,
    pub gvi_sum: f64,
}

impl BrutePath {
    pub fn edge_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn avg_gvi(&self) -> f64 {
        self.gvi_sum / self.edge_count() as f64
    }
}

fn check(graph: &WeightedGraph, start: NodeId, dest: NodeId) -> Result<(), RoutingError> {
    let n = graph.n();
    if n > MAX_BRUTE_FORCE_NODES {
        return Err(RoutingError::TooLargeForBruteForce { n, max: MAX_BRUTE_FORCE_NODES });
    }
    for node in [start, dest] {
        if node.index() >= n {
            return Err(RoutingError::UnknownNode(node));
        }
    }
    if start == dest {
        return Err(RoutingError::SameNode(start));
    }
    Ok(())
}

/// Visits every simple `start -> dest` path.
fn for_each_path(graph: &WeightedGraph, start: usize, dest: usize, mut visit: impl FnMut(&[usize], f64, f64)) {
    fn dfs(
        graph: &WeightedGraph,
        dest: usize,
        path: &mut Vec<usize>,
        visited: u32,
        weight: f64,
        gvi: f64,
        visit: &mut dyn FnMut(&[usize], f64, f64),
    ) {
        let u = *path.last().unwrap();
        if u == dest {
            visit(path, weight, gvi);
            return;
        }
        for v in 0..graph.n() {
            if visited & (1 << v) != 0 || !graph.has_edge(u, v) {
                continue;
            }
            let g = graph.gvi(u, v).unwrap();
            path.push(v);
            dfs(graph, dest, path, visited | (1 << v), weight + (100.0 - g), gvi + g, visit);
            path.pop();
        }
    }
    let mut path = vec![start];
    dfs(graph, dest, &mut path, 1 << start, 0.0, 0.0, &mut visit);
}

fn to_ids(path: &[usize]) -> Vec<NodeId> {
    path.iter().map(|&i| NodeId::from(i)).collect()
}

/// Simple path minimizing `sum(100 - GVI)`; ties go to fewer edges, then
/// to the lexicographically smaller node sequence.
pub fn enumerate_best_path(graph: &WeightedGraph, start: NodeId, dest: NodeId) -> Result<BrutePath, RoutingError> {
    check(graph, start, dest)?;
    let mut best: Option<(Vec<usize>, f64, f64)> = None;
    for_each_path(graph, start.index(), dest.index(), |path, weight, gvi| {
        let better = match &best {
            None => true,
            Some((bp, bw, _)) => weight
                .total_cmp(bw)
                .then(path.len().cmp(&bp.len()))
                .then_with(|| path.cmp(bp.as_slice()))
                == Ordering::Less,
        };
        if better {
            best = Some((path.to_vec(), weight, gvi));
        }
    });
    let (path, total_weight, gvi_sum) = best.ok_or(RoutingError::NoPath { from: start, to: dest })?;
    Ok(BrutePath { nodes: to_ids(&path), total_weight, gvi_sum })
}

/// Simple path maximizing mean edge GVI; ties go to fewer edges, then to
/// the lexicographically smaller node sequence.
pub fn max_average_gvi_path(graph: &WeightedGraph, start: NodeId, dest: NodeId) -> Result<BrutePath, RoutingError> {
    check(graph, start, dest)?;
    let mut best: Option<(Vec<usize>, f64, f64)> = None;
    for_each_path(graph, start.index(), dest.index(), |path, weight, gvi| {
        let edges = (path.len() - 1) as f64;
        let better = match &best {
            None => true,
            Some((bp, _, bg)) => {
                // compare gvi / edges against bg / bedges without dividing
                let bedges = (bp.len() - 1) as f64;
                (bg * edges)
                    .total_cmp(&(gvi * bedges))
                    .then(path.len().cmp(&bp.len()))
                    .then_with(|| path.cmp(bp.as_slice()))
                    == Ordering::Less
            }
        };
        if better {
            best = Some((path.to_vec(), weight, gvi));
        }
    });
    let (path, total_weight, gvi_sum) = best.ok_or(RoutingError::NoPath { from: start, to: dest })?;
    Ok(BrutePath { nodes: to_ids(&path), total_weight, gvi_sum })
}
