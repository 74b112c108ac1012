//! GeoJSON output for node maps, line maps and routes.
//!
//! Percent-scale properties are rounded to two decimals on the way out;
//! coordinates are written at full precision so they re-import exactly.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::graph::EdgeGviTable;
use crate::gvi::GviBand;
use crate::network::{NodeId, StreetNetwork};
use crate::routing::RoutePlan;
use crate::store::ApspArchive;

pub const GEOJSON_MEDIA_TYPE: &str = "application/geo+json";

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("node {0} is not in the network")]
    UnknownNode(NodeId),
    #[error("{0} node GVI values for {1} nodes")]
    LengthMismatch(usize, usize),
    #[error("writing GeoJSON: {0}")]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type")]
pub enum Geometry {
    Point { coordinates: [f64; 2] },
    LineString { coordinates: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Properties {
    Node {
        id: String,
        gvi_avg: Option<f64>,
        band: Option<GviBand>,
        color: Option<&'static str>,
    },
    Edge {
        u: String,
        v: String,
        gvi: f64,
        band: GviBand,
        color: &'static str,
    },
    Route {
        from: String,
        to: String,
        avg_gvi: f64,
        total_weight: f64,
        node_count: usize,
        band: GviBand,
        color: &'static str,
    },
    Start {
        id: String,
    },
    Destination {
        id: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Feature {
    #[serde(rename = "type")]
    kind: &'static str,
    pub geometry: Geometry,
    pub properties: Properties,
}

impl Feature {
    fn new(geometry: Geometry, properties: Properties) -> Self {
        Feature { kind: "Feature", geometry, properties }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeatureCollection {
    #[serde(rename = "type")]
    kind: &'static str,
    pub features: Vec<Feature>,
}

impl FeatureCollection {
    fn new(features: Vec<Feature>) -> Self {
        FeatureCollection { kind: "FeatureCollection", features }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("GeoJSON serializes");
        s.push('\n');
        s
    }

    pub fn write_to(&self, path: &Path) -> Result<(), ExportError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Rounds the exact binary value, so `11.235` (stored just below) gives
/// `11.23`, the same digits `{:.2}` prints.
fn round2(x: f64) -> f64 {
    format!("{x:.2}").parse().expect("formatted float parses")
}

fn position(network: &StreetNetwork, id: NodeId) -> Result<[f64; 2], ExportError> {
    let node = network.nodes().get(id.index()).ok_or(ExportError::UnknownNode(id))?;
    Ok([node.lon, node.lat])
}

/// One point per valid node and one line per edge table entry.
pub fn export_network_geojson(
    network: &StreetNetwork,
    node_gvi_avgs: &[Option<f64>],
    edges: &EdgeGviTable,
) -> Result<FeatureCollection, ExportError> {
    if node_gvi_avgs.len() != network.len() {
        return Err(ExportError::LengthMismatch(node_gvi_avgs.len(), network.len()));
    }
    let mut features = Vec::with_capacity(network.len() + edges.len());
    for node in network.nodes().iter().filter(|n| n.valid) {
        let gvi = node_gvi_avgs[node.id.index()];
        let band = gvi.map(GviBand::of);
        features.push(Feature::new(
            Geometry::Point { coordinates: [node.lon, node.lat] },
            Properties::Node {
                id: network.external_id(node.id).to_string(),
                gvi_avg: gvi.map(round2),
                band,
                color: band.map(GviBand::color),
            },
        ));
    }
    for e in &edges.entries {
        let band = GviBand::of(e.gvi);
        features.push(Feature::new(
            Geometry::LineString { coordinates: vec![position(network, e.u)?, position(network, e.v)?] },
            Properties::Edge {
                u: network.external_id(e.u).to_string(),
                v: network.external_id(e.v).to_string(),
                gvi: round2(e.gvi),
                band,
                color: band.color(),
            },
        ));
    }
    Ok(FeatureCollection::new(features))
}

/// The route as one line, plus start and destination points.
pub fn export_route_geojson(route: &RoutePlan, network: &StreetNetwork) -> Result<FeatureCollection, ExportError> {
    let coordinates = route
        .nodes
        .iter()
        .map(|&id| position(network, id))
        .collect::<Result<Vec<_>, _>>()?;
    let (first, last) = (route.nodes[0], route.nodes[route.nodes.len() - 1]);
    let features = vec![
        Feature::new(
            Geometry::LineString { coordinates: coordinates.clone() },
            Properties::Route {
                from: network.external_id(first).to_string(),
                to: network.external_id(last).to_string(),
                avg_gvi: round2(route.avg_gvi),
                total_weight: round2(route.total_weight),
                node_count: route.node_count,
                band: route.band,
                color: route.band.color(),
            },
        ),
        Feature::new(
            Geometry::Point { coordinates: coordinates[0] },
            Properties::Start { id: network.external_id(first).to_string() },
        ),
        Feature::new(
            Geometry::Point { coordinates: coordinates[coordinates.len() - 1] },
            Properties::Destination { id: network.external_id(last).to_string() },
        ),
    ];
    Ok(FeatureCollection::new(features))
}

/// Network export straight from a loaded archive; the same bytes whether
/// produced by the CLI or the query service.
pub fn export_archive_geojson(archive: &ApspArchive) -> FeatureCollection {
    export_network_geojson(&archive.network(), &archive.node_gvi_avgs(), archive.edges())
        .expect("archive node and edge tables are consistent")
}
