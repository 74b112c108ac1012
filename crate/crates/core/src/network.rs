//! Street network ingestion.
//!
//! Network documents carry arbitrary external node ids (strings or
//! integers). Ingestion re-indexes nodes densely to `0..N` in input order and
//! keeps the external ids in a side table so exports and queries can speak
//! the caller's ids.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("malformed network document: {0}")]
    MalformedDocument(String),
    #[error("edge references unknown node {0:?}")]
    DanglingEndpoint(String),
    #[error("self-loop on node {0:?}")]
    SelfLoop(String),
    #[error("node {id:?} has coordinates out of range (lat {lat}, lon {lon})")]
    CoordinateOutOfRange { id: String, lat: f64, lon: f64 },
    #[error("duplicate node id {0:?}")]
    DuplicateNodeId(String),
    #[error("edge ({u:?}, {v:?}) has invalid length {length}")]
    InvalidLength { u: String, v: String, length: f64 },
    #[error("nodes at identical coordinates have no bearing")]
    CoincidentNodes,
}

/// Dense node index, `0..N` after ingestion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(u32::try_from(i).expect("node index exceeds u32"))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeoNode {
    pub id: NodeId,
    pub lat: f64,
    pub lon: f64,
    /// False for nodes whose imagery was discarded. Such nodes stay in the
    /// network for provenance but never join the routing graph.
    pub valid: bool,
}

/// Undirected street segment, stored with `u < v`.
#[derive(Clone, Debug, PartialEq)]
pub struct StreetEdge {
    pub u: NodeId,
    pub v: NodeId,
    pub length_m: Option<f64>,
}

/// What ingestion did besides parsing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub nodes: usize,
    pub invalid_nodes: usize,
    pub edges: usize,
    /// Repeated unordered pairs collapsed into their first occurrence.
    pub duplicate_edges: usize,
    /// Edges dropped because an endpoint is marked invalid.
    pub dropped_edges: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StreetNetwork {
    nodes: Vec<GeoNode>,
    edges: Vec<StreetEdge>,
    external_ids: Vec<String>,
    lookup: HashMap<String, NodeId>,
}

impl StreetNetwork {
    /// Builds a network from already-dense parts. Edges are normalized to
    /// `u < v` and validated; duplicates are an error here, unlike
    /// [`parse_network`] which collapses them.
    pub fn from_parts(
        nodes: Vec<GeoNode>,
        edges: Vec<StreetEdge>,
        external_ids: Vec<String>,
    ) -> Result<Self, NetworkError> {
        if external_ids.len() != nodes.len() {
            return Err(NetworkError::MalformedDocument(format!(
                "{} external ids for {} nodes",
                external_ids.len(),
                nodes.len()
            )));
        }
        let mut lookup = HashMap::with_capacity(nodes.len());
        for (i, (node, ext)) in nodes.iter().zip(&external_ids).enumerate() {
            if node.id.index() != i {
                return Err(NetworkError::MalformedDocument(format!(
                    "node at position {i} has id {}",
                    node.id.0
                )));
            }
            check_coordinates(ext, node.lat, node.lon)?;
            if lookup.insert(ext.clone(), node.id).is_some() {
                return Err(NetworkError::DuplicateNodeId(ext.clone()));
            }
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut normalized = Vec::with_capacity(edges.len());
        for e in edges {
            let (a, b) = (e.u.index(), e.v.index());
            if a >= nodes.len() || b >= nodes.len() {
                return Err(NetworkError::DanglingEndpoint(format!("{}", e.u.0.max(e.v.0))));
            }
            if a == b {
                return Err(NetworkError::SelfLoop(external_ids[a].clone()));
            }
            let (u, v) = if a < b { (e.u, e.v) } else { (e.v, e.u) };
            if !seen.insert((u, v)) {
                return Err(NetworkError::MalformedDocument(format!(
                    "duplicate edge ({}, {})",
                    external_ids[u.index()],
                    external_ids[v.index()]
                )));
            }
            normalized.push(StreetEdge { u, v, length_m: e.length_m });
        }
        Ok(StreetNetwork { nodes, edges: normalized, external_ids, lookup })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[GeoNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[StreetEdge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> &GeoNode {
        &self.nodes[id.index()]
    }

    pub fn external_id(&self, id: NodeId) -> &str {
        &self.external_ids[id.index()]
    }

    pub fn external_ids(&self) -> &[String] {
        &self.external_ids
    }

    /// Resolves an external id to its dense index.
    pub fn resolve(&self, external: &str) -> Option<NodeId> {
        self.lookup.get(external).copied()
    }

    /// Serializes back into the network document format. Parsing the output
    /// reproduces this network exactly.
    pub fn to_document(&self) -> NetworkDocument {
        NetworkDocument {
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeRecord {
                    id: ExternalId::Str(self.external_ids[n.id.index()].clone()),
                    lat: n.lat,
                    lon: n.lon,
                    valid: n.valid,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    u: ExternalId::Str(self.external_ids[e.u.index()].clone()),
                    v: ExternalId::Str(self.external_ids[e.v.index()].clone()),
                    length_m: e.length_m,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("network document serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExternalId {
    Int(i64),
    Str(String),
}

impl ExternalId {
    fn into_key(self) -> String {
        match self {
            ExternalId::Int(i) => i.to_string(),
            ExternalId::Str(s) => s,
        }
    }
}

fn default_valid() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: ExternalId,
    pub lat: f64,
    pub lon: f64,
    #[serde(default = "default_valid")]
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: ExternalId,
    pub v: ExternalId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_m: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkDocument {
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
}

fn check_coordinates(id: &str, lat: f64, lon: f64) -> Result<(), NetworkError> {
    if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
        return Err(NetworkError::CoordinateOutOfRange { id: id.to_owned(), lat, lon });
    }
    Ok(())
}

/// Parses and validates a network document.
///
/// Repeated unordered pairs collapse into the first occurrence, and edges
/// touching an invalid node are dropped; both are counted in the report.
pub fn parse_network(input: &str) -> Result<(StreetNetwork, IngestReport), NetworkError> {
    let doc: NetworkDocument =
        serde_json::from_str(input).map_err(|e| NetworkError::MalformedDocument(e.to_string()))?;
    from_document(doc)
}

pub fn from_document(doc: NetworkDocument) -> Result<(StreetNetwork, IngestReport), NetworkError> {
    let mut report = IngestReport::default();
    let mut nodes = Vec::with_capacity(doc.nodes.len());
    let mut external_ids = Vec::with_capacity(doc.nodes.len());
    let mut lookup = HashMap::with_capacity(doc.nodes.len());

    for (i, rec) in doc.nodes.into_iter().enumerate() {
        let key = rec.id.into_key();
        check_coordinates(&key, rec.lat, rec.lon)?;
        let id = NodeId::from(i);
        if lookup.insert(key.clone(), id).is_some() {
            return Err(NetworkError::DuplicateNodeId(key));
        }
        if !rec.valid {
            report.invalid_nodes += 1;
        }
        nodes.push(GeoNode { id, lat: rec.lat, lon: rec.lon, valid: rec.valid });
        external_ids.push(key);
    }

    let mut seen = HashSet::with_capacity(doc.edges.len());
    let mut edges = Vec::with_capacity(doc.edges.len());
    for rec in doc.edges {
        let u_key = rec.u.into_key();
        let v_key = rec.v.into_key();
        let u = *lookup.get(&u_key).ok_or_else(|| NetworkError::DanglingEndpoint(u_key.clone()))?;
        let v = *lookup.get(&v_key).ok_or_else(|| NetworkError::DanglingEndpoint(v_key.clone()))?;
        if u == v {
            return Err(NetworkError::SelfLoop(u_key));
        }
        if let Some(length) = rec.length_m {
            if !(length >= 0.0 && length.is_finite()) {
                return Err(NetworkError::InvalidLength { u: u_key, v: v_key, length });
            }
        }
        let pair = if u < v { (u, v) } else { (v, u) };
        if !seen.insert(pair) {
            report.duplicate_edges += 1;
            continue;
        }
        if !nodes[u.index()].valid || !nodes[v.index()].valid {
            report.dropped_edges += 1;
            continue;
        }
        edges.push(StreetEdge { u: pair.0, v: pair.1, length_m: rec.length_m });
    }
    if report.duplicate_edges > 0 {
        log::warn!("collapsed {} duplicate edges", report.duplicate_edges);
    }
    if report.dropped_edges > 0 {
        log::warn!("dropped {} edges touching invalid nodes", report.dropped_edges);
    }

    report.nodes = nodes.len();
    report.edges = edges.len();
    Ok((StreetNetwork { nodes, edges, external_ids, lookup }, report))
}

/// Compass bearing from `from` to `to` in degrees, 0 = north, clockwise,
/// in `[0, 360)`. Forward azimuth on a sphere.
pub fn edge_bearing(from: &GeoNode, to: &GeoNode) -> Result<f64, NetworkError> {
    if from.lat == to.lat && from.lon == to.lon {
        return Err(NetworkError::CoincidentNodes);
    }
    let phi1 = from.lat.to_radians();
    let phi2 = to.lat.to_radians();
    let dlambda = (to.lon - from.lon).to_radians();
    let y = dlambda.sin() * phi2.cos();
    let x = phi1.cos() * phi2.sin() - phi1.sin() * phi2.cos() * dlambda.cos();
    let deg = y.atan2(x).to_degrees().rem_euclid(360.0);
    // rem_euclid can round up to exactly 360.0 for tiny negative inputs
    Ok(if deg >= 360.0 { 0.0 } else { deg })
}
