//! The `.gvip` archive: everything needed to answer route queries without
//! rerunning the all-pairs build.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! header (56 bytes)
//!   0  magic        8 bytes  "GVIPATH\0"
//!   8  version      u32      1
//!  12  flags        u32      bit 0 = directed
//!  16  n            u64
//!  24  edge_count   u64
//!  32  built_at     i64      unix seconds
//!  40  payload_len  u64
//!  48  checksum     u64      first 8 bytes of SHA-256(payload), read LE
//! payload
//!   dist           n*n  f64   row-major, unreachable = +inf
//!   parents        n*n  i32   row-major, -1 = none
//!   node_gvi       n    f64   NaN = no data
//!   node_coords    n    (lat f64, lon f64)
//!   node_valid     n    u8
//!   edges          edge_count x (u u32, v u32, gvi f64)
//!   external_ids   n    (len u32, UTF-8 bytes)
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{EdgeGvi, EdgeGviTable, EdgeIndex, WeightedGraph};
use crate::gvi::NodeGvi;
use crate::network::{GeoNode, NetworkError, NodeId, StreetEdge, StreetNetwork};
use crate::routing::{greenest_path, ApspResult, RoutePlan, RoutingError, NO_PARENT};

pub const MAGIC: [u8; 8] = *b"GVIPATH\0";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 56;
pub const FILE_EXTENSION: &str = "gvip";

const FLAG_DIRECTED: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("archive I/O: {0}")]
    Io(#[from] io::Error),
    #[error("archive checksum mismatch (truncated or corrupted)")]
    ChecksumMismatch,
    #[error("unsupported archive: {0}")]
    VersionUnsupported(String),
    #[error("archive layout does not match its header: {0}")]
    LayoutMismatch(String),
    #[error("inconsistent archive inputs: {0}")]
    Inconsistent(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArchivedNode {
    pub external_id: String,
    pub lat: f64,
    pub lon: f64,
    pub valid: bool,
    pub gvi_avg: Option<f64>,
}

/// A loaded or freshly built archive.
#[derive(Clone, Debug)]
pub struct ApspArchive {
    directed: bool,
    built_at: i64,
    apsp: ApspResult,
    nodes: Vec<ArchivedNode>,
    edges: EdgeGviTable,
    edge_index: EdgeIndex,
    lookup: HashMap<String, NodeId>,
}

impl PartialEq for ApspArchive {
    fn eq(&self, other: &Self) -> bool {
        self.directed == other.directed
            && self.built_at == other.built_at
            && self.nodes == other.nodes
            && self.edges == other.edges
            && same_bits(self.apsp.dist_matrix(), other.apsp.dist_matrix())
            && self.apsp.parent_matrix() == other.apsp.parent_matrix()
    }
}

fn same_bits(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

impl ApspArchive {
    pub fn new(
        apsp: ApspResult,
        graph: &WeightedGraph,
        network: &StreetNetwork,
        node_gvis: &BTreeMap<NodeId, NodeGvi>,
        built_at: i64,
    ) -> Result<Self, StoreError> {
        let n = apsp.n();
        if graph.n() != n || network.len() != n {
            return Err(StoreError::Inconsistent(format!(
                "apsp has {n} nodes, graph {}, network {}",
                graph.n(),
                network.len()
            )));
        }
        let nodes = network
            .nodes()
            .iter()
            .map(|node| ArchivedNode {
                external_id: network.external_id(node.id).to_string(),
                lat: node.lat,
                lon: node.lon,
                valid: node.valid,
                gvi_avg: node_gvis.get(&node.id).map(|g| g.gvi_avg),
            })
            .collect();
        Ok(Self::assemble(graph.is_directed(), built_at, apsp, nodes, graph.edge_table()))
    }

    fn assemble(
        directed: bool,
        built_at: i64,
        apsp: ApspResult,
        nodes: Vec<ArchivedNode>,
        edges: EdgeGviTable,
    ) -> Self {
        let edge_index = EdgeIndex::new(&edges);
        let lookup = nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.valid)
            .map(|(i, n)| (n.external_id.clone(), NodeId::from(i)))
            .collect();
        ApspArchive { directed, built_at, apsp, nodes, edges, edge_index, lookup }
    }

    pub fn n(&self) -> usize {
        self.apsp.n()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn built_at(&self) -> i64 {
        self.built_at
    }

    pub fn apsp(&self) -> &ApspResult {
        &self.apsp
    }

    pub fn nodes(&self) -> &[ArchivedNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &EdgeGviTable {
        &self.edges
    }

    /// External id to node, for valid nodes only.
    pub fn resolve(&self, external: &str) -> Option<NodeId> {
        self.lookup.get(external).copied()
    }

    pub fn external_id(&self, id: NodeId) -> &str {
        &self.nodes[id.index()].external_id
    }

    /// Node GVI means indexed by node; `None` where there was no data.
    pub fn node_gvi_avgs(&self) -> Vec<Option<f64>> {
        self.nodes.iter().map(|n| n.gvi_avg).collect()
    }

    /// GVI means of valid nodes that have one.
    pub fn valid_node_gvis(&self) -> Vec<f64> {
        self.nodes.iter().filter(|n| n.valid).filter_map(|n| n.gvi_avg).collect()
    }

    /// The street network as far as the archive knows it: all nodes, and one
    /// street per routed edge.
    pub fn network(&self) -> StreetNetwork {
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| GeoNode { id: NodeId::from(i), lat: n.lat, lon: n.lon, valid: n.valid })
            .collect();
        let mut seen = std::collections::HashSet::new();
        let edges = self
            .edges
            .entries
            .iter()
            .filter(|e| seen.insert((e.u.min(e.v), e.u.max(e.v))))
            .map(|e| StreetEdge { u: e.u, v: e.v, length_m: None })
            .collect();
        let ids = self.nodes.iter().map(|n| n.external_id.clone()).collect();
        StreetNetwork::from_parts(nodes, edges, ids).unwrap_or_else(|e: NetworkError| {
            unreachable!("archive validated on load: {e}")
        })
    }

    pub fn route(&self, from: NodeId, to: NodeId) -> Result<RoutePlan, RoutingError> {
        greenest_path(&self.apsp, &self.edge_index, from, to)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.n();
        let mut payload = Vec::with_capacity(n * n * 12 + n * 40 + self.edges.len() * 16);
        for &d in self.apsp.dist_matrix() {
            payload.extend_from_slice(&d.to_le_bytes());
        }
        for &p in self.apsp.parent_matrix() {
            let p = if p == NO_PARENT { -1i32 } else { p as i32 };
            payload.extend_from_slice(&p.to_le_bytes());
        }
        for node in &self.nodes {
            payload.extend_from_slice(&node.gvi_avg.unwrap_or(f64::NAN).to_le_bytes());
        }
        for node in &self.nodes {
            payload.extend_from_slice(&node.lat.to_le_bytes());
            payload.extend_from_slice(&node.lon.to_le_bytes());
        }
        payload.extend(self.nodes.iter().map(|node| node.valid as u8));
        for e in &self.edges.entries {
            payload.extend_from_slice(&e.u.0.to_le_bytes());
            payload.extend_from_slice(&e.v.0.to_le_bytes());
            payload.extend_from_slice(&e.gvi.to_le_bytes());
        }
        for node in &self.nodes {
            payload.extend_from_slice(&(node.external_id.len() as u32).to_le_bytes());
            payload.extend_from_slice(node.external_id.as_bytes());
        }

        let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(if self.directed { FLAG_DIRECTED } else { 0 }).to_le_bytes());
        out.extend_from_slice(&(n as u64).to_le_bytes());
        out.extend_from_slice(&(self.edges.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.built_at.to_le_bytes());
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&checksum(&payload).to_le_bytes());
        out.extend_from_slice(&payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, StoreError> {
        if bytes.len() < MAGIC.len() {
            return Err(StoreError::ChecksumMismatch);
        }
        if bytes[..8] != MAGIC {
            return Err(StoreError::VersionUnsupported("not a GVI path archive".into()));
        }
        if bytes.len() < HEADER_LEN {
            return Err(StoreError::ChecksumMismatch);
        }
        let mut header = Reader { bytes: &bytes[8..HEADER_LEN] };
        let version = header.u32()?;
        if version != FORMAT_VERSION {
            return Err(StoreError::VersionUnsupported(format!("format version {version}")));
        }
        let flags = header.u32()?;
        let n = header.u64()? as usize;
        let edge_count = header.u64()? as usize;
        let built_at = header.u64()? as i64;
        let payload_len = header.u64()?;
        let expected = header.u64()?;
        let payload = &bytes[HEADER_LEN..];
        if payload.len() as u64 != payload_len || checksum(payload) != expected {
            return Err(StoreError::ChecksumMismatch);
        }
        if flags & !FLAG_DIRECTED != 0 {
            return Err(StoreError::VersionUnsupported(format!("unknown flags {flags:#x}")));
        }

        let cells = n
            .checked_mul(n)
            .filter(|&c| c.saturating_mul(12) <= payload.len())
            .ok_or_else(|| StoreError::LayoutMismatch(format!("n = {n} does not fit the payload")))?;
        let mut r = Reader { bytes: payload };
        let dist = r.take(cells * 8)?.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let parents = r
            .take(cells * 4)?
            .chunks_exact(4)
            .map(|c| match i32::from_le_bytes(c.try_into().unwrap()) {
                -1 => NO_PARENT,
                p => p as u32,
            })
            .collect();
        let apsp = ApspResult::from_parts(n, dist, parents).map_err(|e| StoreError::LayoutMismatch(e.to_string()))?;

        let mut gvis = Vec::with_capacity(n);
        for _ in 0..n {
            let g = r.f64()?;
            gvis.push((!g.is_nan()).then_some(g));
        }
        let mut coords = Vec::with_capacity(n);
        for _ in 0..n {
            coords.push((r.f64()?, r.f64()?));
        }
        let valid = r.take(n)?.to_vec();
        let mut entries = Vec::with_capacity(edge_count.min(payload.len() / 16));
        for _ in 0..edge_count {
            let (u, v, gvi) = (r.u32()?, r.u32()?, r.f64()?);
            if u as usize >= n || v as usize >= n || u == v {
                return Err(StoreError::LayoutMismatch(format!("edge ({u}, {v}) with n = {n}")));
            }
            entries.push(EdgeGvi { u: NodeId(u), v: NodeId(v), gvi });
        }
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            let len = r.u32()? as usize;
            let external_id = String::from_utf8(r.take(len)?.to_vec())
                .map_err(|_| StoreError::LayoutMismatch(format!("external id {i} is not UTF-8")))?;
            nodes.push(ArchivedNode {
                external_id,
                lat: coords[i].0,
                lon: coords[i].1,
                valid: valid[i] != 0,
                gvi_avg: gvis[i],
            });
        }
        if !r.bytes.is_empty() {
            return Err(StoreError::LayoutMismatch(format!("{} trailing bytes", r.bytes.len())));
        }
        let archive = Self::assemble(
            flags & FLAG_DIRECTED != 0,
            built_at,
            apsp,
            nodes,
            EdgeGviTable { directed: flags & FLAG_DIRECTED != 0, entries },
        );
        if archive.lookup.len() != archive.nodes.iter().filter(|n| n.valid).count() {
            return Err(StoreError::LayoutMismatch("duplicate external ids".into()));
        }
        Ok(archive)
    }
}

fn checksum(payload: &[u8]) -> u64 {
    let digest = Sha256::digest(payload);
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], StoreError> {
        if self.bytes.len() < len {
            return Err(StoreError::LayoutMismatch("payload shorter than the header implies".into()));
        }
        let (head, tail) = self.bytes.split_at(len);
        self.bytes = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32, StoreError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, StoreError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, StoreError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Writes the archive through a temporary file and renames it into place.
pub fn save_apsp(archive: &ApspArchive, path: &Path) -> Result<(), StoreError> {
    let tmp = path.with_extension("gvip.tmp");
    {
        let mut file = io::BufWriter::new(fs::File::create(&tmp)?);
        file.write_all(&archive.to_bytes())?;
        file.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_apsp(path: &Path) -> Result<ApspArchive, StoreError> {
    ApspArchive::from_bytes(&fs::read(path)?)
}
