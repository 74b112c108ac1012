//! Edge GVI assignment and the dense weight matrix.
//!
//! Routing minimizes the sum of `100 - GVI` over a path's edges, so every
//! edge carries its GVI and the transformed weight side by side.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gvi::NodeGvi;
use crate::network::{edge_bearing, NodeId, StreetNetwork};

/// Largest node count a dense build accepts unless configured otherwise.
pub const DEFAULT_MAX_NODES: usize = 20_000;

pub const DEFAULT_HEADING_TOLERANCE_DEG: f64 = 30.0;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("GVI {0} is outside [0, 100]")]
    OutOfRange(f64),
    #[error("edge ({u}, {v}) is out of bounds for {n} nodes")]
    IndexOutOfBounds { u: usize, v: usize, n: usize },
    #[error("edge ({u}, {v}) given twice with GVI {first} and {second}")]
    DuplicateEdgeConflict { u: usize, v: usize, first: f64, second: f64 },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("graph with {n} nodes exceeds the configured cap of {cap}")]
    GraphTooLarge { n: usize, cap: usize },
    #[error("heading tolerance {0} must be in (0, 90]")]
    InvalidTolerance(f64),
    #[error("adjacency table row {row}: {message}")]
    MalformedRow { row: usize, message: String },
}

/// `100 - gvi`.
pub fn transform_weight(gvi_percent: f64) -> Result<f64, GraphError> {
    if !(0.0..=100.0).contains(&gvi_percent) {
        return Err(GraphError::OutOfRange(gvi_percent));
    }
    Ok(100.0 - gvi_percent)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AssignmentMode {
    /// Edge GVI is the mean of its endpoints' node GVIs; one undirected edge.
    UndirectedAverage,
    /// Each direction takes the origin's view facing along the edge.
    DirectionalHeading,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeGviAssignment {
    pub mode: AssignmentMode,
    pub heading_tolerance_deg: f64,
}

impl Default for EdgeGviAssignment {
    fn default() -> Self {
        EdgeGviAssignment {
            mode: AssignmentMode::UndirectedAverage,
            heading_tolerance_deg: DEFAULT_HEADING_TOLERANCE_DEG,
        }
    }
}

impl EdgeGviAssignment {
    pub fn directional(heading_tolerance_deg: f64) -> Self {
        EdgeGviAssignment { mode: AssignmentMode::DirectionalHeading, heading_tolerance_deg }
    }

    pub fn assign(
        &self,
        network: &StreetNetwork,
        node_gvis: &BTreeMap<NodeId, NodeGvi>,
    ) -> Result<(EdgeGviTable, AssignmentReport), GraphError> {
        match self.mode {
            AssignmentMode::UndirectedAverage => Ok(assign_edge_gvi_undirected(network, node_gvis)),
            AssignmentMode::DirectionalHeading => {
                assign_edge_gvi_directional(network, node_gvis, self.heading_tolerance_deg)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeGvi {
    pub u: NodeId,
    pub v: NodeId,
    pub gvi: f64,
}

/// `(u, v, gvi)` rows. Undirected tables list each street once.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EdgeGviTable {
    pub directed: bool,
    pub entries: Vec<EdgeGvi>,
}

impl EdgeGviTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Edges the assignment could not treat normally.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AssignmentReport {
    /// Edges (directed pairs in directional mode) dropped for lack of node
    /// GVI data.
    pub missing: Vec<(NodeId, NodeId)>,
    /// Directed edges whose bearing matched no heading within tolerance and
    /// fell back to the origin's mean GVI.
    pub fallbacks: Vec<(NodeId, NodeId)>,
}

pub fn assign_edge_gvi_undirected(
    network: &StreetNetwork,
    node_gvis: &BTreeMap<NodeId, NodeGvi>,
) -> (EdgeGviTable, AssignmentReport) {
    let mut table = EdgeGviTable { directed: false, entries: Vec::with_capacity(network.edges().len()) };
    let mut report = AssignmentReport::default();
    for e in network.edges() {
        match (node_gvis.get(&e.u), node_gvis.get(&e.v)) {
            (Some(a), Some(b)) => table.entries.push(EdgeGvi {
                u: e.u,
                v: e.v,
                gvi: (a.gvi_avg + b.gvi_avg) / 2.0,
            }),
            _ => report.missing.push((e.u, e.v)),
        }
    }
    if !report.missing.is_empty() {
        log::warn!("dropped {} edges with an endpoint lacking GVI", report.missing.len());
    }
    (table, report)
}

fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Picks the heading nearest to `bearing` within `tolerance`; the lower
/// heading wins an exact tie.
fn nearest_heading(per_heading: &[(f64, f64)], bearing: f64, tolerance: f64) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for &(heading, gvi) in per_heading {
        let d = angular_distance(heading, bearing);
        if d <= tolerance && best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, gvi));
        }
    }
    best.map(|(_, gvi)| gvi)
}

pub fn assign_edge_gvi_directional(
    network: &StreetNetwork,
    node_gvis: &BTreeMap<NodeId, NodeGvi>,
    tolerance_deg: f64,
) -> Result<(EdgeGviTable, AssignmentReport), GraphError> {
    if !(tolerance_deg > 0.0 && tolerance_deg <= 90.0) {
        return Err(GraphError::InvalidTolerance(tolerance_deg));
    }
    let mut table = EdgeGviTable { directed: true, entries: Vec::with_capacity(2 * network.edges().len()) };
    let mut report = AssignmentReport::default();
    for e in network.edges() {
        for (from, to) in [(e.u, e.v), (e.v, e.u)] {
            let Some(origin) = node_gvis.get(&from) else {
                report.missing.push((from, to));
                continue;
            };
            let matched = edge_bearing(network.node(from), network.node(to))
                .ok()
                .and_then(|b| nearest_heading(&origin.per_heading, b, tolerance_deg));
            let gvi = match matched {
                Some(g) => g,
                None => {
                    report.fallbacks.push((from, to));
                    origin.gvi_avg
                }
            };
            table.entries.push(EdgeGvi { u: from, v: to, gvi });
        }
    }
    if !report.missing.is_empty() {
        log::warn!("dropped {} directed edges whose origin lacks observations", report.missing.len());
    }
    if !report.fallbacks.is_empty() {
        log::info!("{} directed edges fell back to the origin's mean GVI", report.fallbacks.len());
    }
    Ok((table, report))
}

/// Access to the GVI of an edge, from a dense matrix or a sparse index.
pub trait EdgeGviLookup {
    fn edge_gvi(&self, u: NodeId, v: NodeId) -> Option<f64>;
}

/// Dense `n x n` weights with a parallel GVI matrix.
///
/// `weight[i][j]` is `100 - gvi[i][j]` for edges, `+inf` for absent pairs
/// and `0` on the diagonal. `gvi` holds NaN where there is no edge.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    directed: bool,
    weight: Vec<f64>,
    gvi: Vec<f64>,
}

impl WeightedGraph {
    /// Diagonal 0, everything else unreachable.
    pub fn empty(n: usize, directed: bool) -> Self {
        let mut weight = vec![f64::INFINITY; n * n];
        for i in 0..n {
            weight[i * n + i] = 0.0;
        }
        WeightedGraph { n, directed, weight, gvi: vec![f64::NAN; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    #[inline]
    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.weight[u * self.n + v]
    }

    pub fn gvi(&self, u: usize, v: usize) -> Option<f64> {
        let g = self.gvi[u * self.n + v];
        (!g.is_nan()).then_some(g)
    }

    /// Row-major weight matrix.
    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.weight(u, v).is_finite()
    }

    /// Out-neighbours of `u` with their weights.
    pub fn out_edges(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let row = &self.weight[u * self.n..(u + 1) * self.n];
        row.iter()
            .enumerate()
            .filter(move |&(v, w)| v != u && w.is_finite())
            .map(|(v, &w)| (v, w))
    }

    /// Lists edges back out, once per street when undirected.
    pub fn edge_table(&self) -> EdgeGviTable {
        let mut entries = Vec::new();
        for u in 0..self.n {
            let start = if self.directed { 0 } else { u + 1 };
            for v in start..self.n {
                if let Some(gvi) = self.gvi(u, v).filter(|_| u != v) {
                    entries.push(EdgeGvi { u: NodeId::from(u), v: NodeId::from(v), gvi });
                }
            }
        }
        EdgeGviTable { directed: self.directed, entries }
    }

    fn set(&mut self, u: usize, v: usize, gvi: f64) -> Result<(), GraphError> {
        let idx = u * self.n + v;
        let existing = self.gvi[idx];
        if !existing.is_nan() && existing != gvi {
            return Err(GraphError::DuplicateEdgeConflict { u, v, first: existing, second: gvi });
        }
        self.gvi[idx] = gvi;
        self.weight[idx] = transform_weight(gvi)?;
        Ok(())
    }
}

impl EdgeGviLookup for WeightedGraph {
    fn edge_gvi(&self, u: NodeId, v: NodeId) -> Option<f64> {
        if u == v || u.index() >= self.n || v.index() >= self.n {
            return None;
        }
        self.gvi(u.index(), v.index())
    }
}

/// Hash-indexed edge GVIs, for when the dense matrix is not kept around.
#[derive(Clone, Debug, Default)]
pub struct EdgeIndex {
    directed: bool,
    map: HashMap<(NodeId, NodeId), f64>,
}

impl EdgeIndex {
    pub fn new(table: &EdgeGviTable) -> Self {
        let map = table.entries.iter().map(|e| ((e.u, e.v), e.gvi)).collect();
        EdgeIndex { directed: table.directed, map }
    }
}

impl EdgeGviLookup for EdgeIndex {
    fn edge_gvi(&self, u: NodeId, v: NodeId) -> Option<f64> {
        self.map
            .get(&(u, v))
            .or_else(|| if self.directed { None } else { self.map.get(&(v, u)) })
            .copied()
    }
}

/// Fills the dense matrix from an edge table. Undirected tables set both
/// `[u][v]` and `[v][u]`.
pub fn build_adjacency_matrix(n: usize, table: &EdgeGviTable, max_nodes: usize) -> Result<WeightedGraph, GraphError> {
    if n > max_nodes {
        return Err(GraphError::GraphTooLarge { n, cap: max_nodes });
    }
    let mut graph = WeightedGraph::empty(n, table.directed);
    for e in &table.entries {
        let (u, v) = (e.u.index(), e.v.index());
        if u >= n || v >= n {
            return Err(GraphError::IndexOutOfBounds { u, v, n });
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        graph.set(u, v, e.gvi)?;
        if !table.directed {
            graph.set(v, u, e.gvi)?;
        }
    }
    Ok(graph)
}

/// Parses a `u,v,gvi_percent` table with dense integer node indices. The
/// header row is required; direction is the caller's choice.
pub fn parse_adjacency_table(input: &str, directed: bool) -> Result<EdgeGviTable, GraphError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| GraphError::MalformedRow { row: 0, message: e.to_string() })?
        .clone();
    if header.iter().collect::<Vec<_>>() != ["u", "v", "gvi_percent"] {
        return Err(GraphError::MalformedRow {
            row: 0,
            message: format!("expected header u,v,gvi_percent, got {:?}", header.as_slice()),
        });
    }
    let mut entries = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let bad = |message: String| GraphError::MalformedRow { row, message };
        let record = record.map_err(|e| bad(e.to_string()))?;
        let u: usize = record[0].parse().map_err(|e| bad(format!("u {:?}: {e}", &record[0])))?;
        let v: usize = record[1].parse().map_err(|e| bad(format!("v {:?}: {e}", &record[1])))?;
        let gvi: f64 = record[2].parse().map_err(|e| bad(format!("gvi {:?}: {e}", &record[2])))?;
        if !(0.0..=100.0).contains(&gvi) {
            return Err(GraphError::OutOfRange(gvi));
        }
        entries.push(EdgeGvi { u: NodeId::from(u), v: NodeId::from(v), gvi });
    }
    Ok(EdgeGviTable { directed, entries })
}

pub fn write_adjacency_table(table: &EdgeGviTable) -> String {
    let mut out = String::from("u,v,gvi_percent\n");
    for e in &table.entries {
        out.push_str(&format!("{},{},{}\n", e.u.0, e.v.0, e.gvi));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gvi::{node_gvi, ViewObservation};
    use crate::network::{GeoNode, StreetEdge};
    use proptest::prelude::*;

    fn edge(u: u32, v: u32, gvi: f64) -> EdgeGvi {
        EdgeGvi { u: NodeId(u), v: NodeId(v), gvi }
    }

    fn two_node_network(lat2: f64, lon2: f64) -> StreetNetwork {
        StreetNetwork::from_parts(
            vec![
                GeoNode { id: NodeId(0), lat: 34.6, lon: 135.5, valid: true },
                GeoNode { id: NodeId(1), lat: lat2, lon: lon2, valid: true },
            ],
            vec![StreetEdge { u: NodeId(0), v: NodeId(1), length_m: None }],
            vec!["u".into(), "v".into()],
        )
        .unwrap()
    }

    fn gvis(entries: &[(u32, &[(f64, f64)])]) -> BTreeMap<NodeId, NodeGvi> {
        entries
            .iter()
            .map(|&(node, views)| {
                let obs: Vec<_> = views
                    .iter()
                    .map(|&(h, g)| ViewObservation::from_percent(NodeId(node), h, g).unwrap())
                    .collect();
                (NodeId(node), node_gvi(&obs).unwrap())
            })
            .collect()
    }

    const COMPASS: &[(f64, f64)] = &[(0.0, 10.0), (90.0, 20.0), (180.0, 30.0), (270.0, 40.0)];

    #[test]
    fn transform_fixtures() {
        assert_eq!(transform_weight(0.0).unwrap(), 100.0);
        assert_eq!(transform_weight(100.0).unwrap(), 0.0);
        assert!((transform_weight(7.47).unwrap() - 92.53).abs() < 1e-12);
        assert!(matches!(transform_weight(100.5), Err(GraphError::OutOfRange(_))));
        assert!(transform_weight(f64::NAN).is_err());
    }

    #[test]
    fn undirected_assignment_is_midpoint() {
        let net = two_node_network(34.601, 135.5);
        for (a, b, want) in [(10.0, 30.0, 20.0), (0.0, 0.0, 0.0), (7.47, 7.47, 7.47)] {
            let g = gvis(&[(0, &[(0.0, a)]), (1, &[(0.0, b)])]);
            let (table, report) = assign_edge_gvi_undirected(&net, &g);
            assert_eq!(table.entries, vec![edge(0, 1, want)]);
            assert!(report.missing.is_empty());
        }
    }

    #[test]
    fn undirected_assignment_drops_missing() {
        let net = two_node_network(34.601, 135.5);
        let (table, report) = assign_edge_gvi_undirected(&net, &gvis(&[(0, &[(0.0, 5.0)])]));
        assert!(table.is_empty());
        assert_eq!(report.missing, vec![(NodeId(0), NodeId(1))]);
    }

    #[test]
    fn directional_picks_nearest_heading() {
        // bearing ~92 degrees: slightly south of due east
        let net = two_node_network(34.59997, 135.501);
        let g = gvis(&[(0, COMPASS), (1, COMPASS)]);
        let (table, report) = assign_edge_gvi_directional(&net, &g, 30.0).unwrap();
        let fwd = table.entries.iter().find(|e| e.u == NodeId(0)).unwrap();
        assert_eq!(fwd.gvi, 20.0);
        // reverse direction faces ~272 degrees
        let back = table.entries.iter().find(|e| e.u == NodeId(1)).unwrap();
        assert_eq!(back.gvi, 40.0);
        assert!(report.fallbacks.is_empty());
    }

    #[test]
    fn directional_exact_north() {
        let net = two_node_network(34.601, 135.5);
        let g = gvis(&[(0, COMPASS), (1, COMPASS)]);
        let (table, _) = assign_edge_gvi_directional(&net, &g, 30.0).unwrap();
        assert_eq!(table.entries[0], edge(0, 1, 10.0));
        assert_eq!(table.entries[1], edge(1, 0, 30.0));
    }

    #[test]
    fn directional_falls_back_outside_tolerance() {
        // a true 45 degree forward azimuth
        let lat2 = 34.6 + 0.001;
        let dlon = 0.001 / (34.6f64.to_radians().cos());
        let net = two_node_network(lat2, 135.5 + dlon);
        let b = edge_bearing(net.node(NodeId(0)), net.node(NodeId(1))).unwrap();
        assert!((b - 45.0).abs() < 0.05, "{b}");
        let g = gvis(&[(0, COMPASS), (1, COMPASS)]);
        let (table, report) = assign_edge_gvi_directional(&net, &g, 30.0).unwrap();
        assert_eq!(table.entries[0].gvi, 25.0);
        assert!(report.fallbacks.contains(&(NodeId(0), NodeId(1))));
        assert!(matches!(
            assign_edge_gvi_directional(&net, &g, 0.0),
            Err(GraphError::InvalidTolerance(_))
        ));
    }

    #[test]
    fn adjacency_fixtures() {
        let undirected = EdgeGviTable { directed: false, entries: vec![edge(0, 1, 40.0)] };
        let g = build_adjacency_matrix(2, &undirected, DEFAULT_MAX_NODES).unwrap();
        assert_eq!(g.weights(), &[0.0, 60.0, 60.0, 0.0]);

        let g = build_adjacency_matrix(3, &EdgeGviTable::default(), DEFAULT_MAX_NODES).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(g.weight(i, j), if i == j { 0.0 } else { f64::INFINITY });
            }
        }

        let directed = EdgeGviTable { directed: true, entries: vec![edge(0, 1, 80.0), edge(1, 0, 20.0)] };
        let g = build_adjacency_matrix(2, &directed, DEFAULT_MAX_NODES).unwrap();
        assert_eq!(g.weight(0, 1), 20.0);
        assert_eq!(g.weight(1, 0), 80.0);
        assert_eq!(g.edge_gvi(NodeId(1), NodeId(0)), Some(20.0));
    }

    #[test]
    fn adjacency_errors() {
        let t = EdgeGviTable { directed: false, entries: vec![edge(0, 5, 40.0)] };
        assert!(matches!(build_adjacency_matrix(2, &t, 100), Err(GraphError::IndexOutOfBounds { .. })));
        let t = EdgeGviTable { directed: true, entries: vec![edge(0, 1, 40.0), edge(0, 1, 41.0)] };
        assert!(matches!(build_adjacency_matrix(2, &t, 100), Err(GraphError::DuplicateEdgeConflict { .. })));
        let t = EdgeGviTable { directed: false, entries: vec![edge(0, 1, 40.0), edge(1, 0, 40.0)] };
        assert!(build_adjacency_matrix(2, &t, 100).is_ok());
        assert!(matches!(
            build_adjacency_matrix(101, &EdgeGviTable::default(), 100),
            Err(GraphError::GraphTooLarge { n: 101, cap: 100 })
        ));
        let t = EdgeGviTable { directed: false, entries: vec![edge(1, 1, 40.0)] };
        assert!(matches!(build_adjacency_matrix(2, &t, 100), Err(GraphError::SelfLoop(1))));
    }

    #[test]
    fn adjacency_table_text() {
        let t = parse_adjacency_table("u,v,gvi_percent\n0,1,40\n1,2,7.47\n", false).unwrap();
        assert_eq!(t.entries, vec![edge(0, 1, 40.0), edge(1, 2, 7.47)]);
        assert_eq!(parse_adjacency_table(&write_adjacency_table(&t), false).unwrap(), t);
        assert!(parse_adjacency_table("0,1,40\n", false).is_err());
        assert!(parse_adjacency_table("u,v,gvi_percent\n0,1,140\n", false).is_err());
    }

    #[test]
    fn edge_index_matches_matrix() {
        let t = EdgeGviTable { directed: false, entries: vec![edge(0, 1, 40.0), edge(1, 2, 3.0)] };
        let g = build_adjacency_matrix(3, &t, 100).unwrap();
        let idx = EdgeIndex::new(&g.edge_table());
        for u in 0..3u32 {
            for v in 0..3u32 {
                assert_eq!(idx.edge_gvi(NodeId(u), NodeId(v)), g.edge_gvi(NodeId(u), NodeId(v)));
            }
        }
    }

    fn arb_table() -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
        (2usize..9).prop_flat_map(|n| {
            let edges = proptest::collection::vec((0..n, 0..n, 0.0f64..=100.0), 0..20);
            (Just(n), edges)
        })
    }

    fn dedup(edges: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
        let mut seen = std::collections::HashSet::new();
        edges
            .into_iter()
            .filter(|&(u, v, _)| u != v && seen.insert((u.min(v), u.max(v))))
            .collect()
    }

    proptest! {
        #[test]
        fn weight_plus_gvi_is_100((n, edges) in arb_table()) {
            let entries = dedup(edges).into_iter().map(|(u, v, g)| edge(u as u32, v as u32, g)).collect();
            let g = build_adjacency_matrix(n, &EdgeGviTable { directed: false, entries }, 100).unwrap();
            for i in 0..n {
                prop_assert_eq!(g.weight(i, i), 0.0);
                for j in 0..n {
                    prop_assert_eq!(g.weight(i, j).to_bits(), g.weight(j, i).to_bits());
                    let w = g.weight(i, j);
                    prop_assert!(w == f64::INFINITY || (0.0..=100.0).contains(&w));
                    if i != j && w.is_finite() {
                        prop_assert_eq!(w + g.gvi(i, j).unwrap(), 100.0);
                    }
                }
            }
        }

        #[test]
        fn orientation_does_not_matter((n, edges) in arb_table(), flips in any::<u64>()) {
            let edges = dedup(edges);
            let straight = edges.iter().map(|&(u, v, g)| edge(u as u32, v as u32, g)).collect();
            let flipped = edges.iter().enumerate().map(|(k, &(u, v, g))| {
                if flips >> (k % 64) & 1 == 1 { edge(v as u32, u as u32, g) } else { edge(u as u32, v as u32, g) }
            }).collect();
            let a = build_adjacency_matrix(n, &EdgeGviTable { directed: false, entries: straight }, 100).unwrap();
            let b = build_adjacency_matrix(n, &EdgeGviTable { directed: false, entries: flipped }, 100).unwrap();
            let bits = |g: &WeightedGraph| g.weights().iter().map(|w| w.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&a), bits(&b));
        }

        #[test]
        fn transform_strictly_decreasing(a in 0.0f64..=100.0, b in 0.0f64..=100.0) {
            prop_assume!(a < b);
            prop_assert!(transform_weight(b).unwrap() < transform_weight(a).unwrap());
        }

        #[test]
        fn directional_reproduces_matched_headings(
            gvi_fwd in 0.0f64..=100.0, gvi_back in 0.0f64..=100.0,
            dn in -0.005f64..0.005, de in -0.005f64..0.005,
        ) {
            prop_assume!(dn.abs() > 1e-4 || de.abs() > 1e-4);
            let net = two_node_network(34.6 + dn, 135.5 + de);
            let fwd = edge_bearing(net.node(NodeId(0)), net.node(NodeId(1))).unwrap();
            let back = edge_bearing(net.node(NodeId(1)), net.node(NodeId(0))).unwrap();
            let g = gvis(&[(0, &[(fwd, gvi_fwd)]), (1, &[(back, gvi_back)])]);
            let (table, report) = assign_edge_gvi_directional(&net, &g, 30.0).unwrap();
            prop_assert!(report.fallbacks.is_empty());
            prop_assert_eq!(table.entries[0].gvi, gvi_fwd);
            prop_assert_eq!(table.entries[1].gvi, gvi_back);
        }
    }
}
