//! Greenest-route engine.
//!
//! Street networks and street-level greenery observations go in; Green View
//! Index (GVI) values per node and per edge, a dense `(100 - GVI)` weight
//! matrix, and all-pairs shortest paths with predecessor matrices come out.
//! Once the all-pairs build is done (and persisted with [`store`]), every
//! start/destination query is a predecessor walk.
//!
//! Module map:
//!
//! * [`network`]: street network ingestion, validation and edge bearings.
//! * [`gvi`]: per-view and per-node GVI, satisfaction bands, IoU metrics.
//! * [`graph`]: edge GVI assignment and adjacency matrix construction.
//! * [`routing`]: Floyd-Warshall (naive and blocked), Dijkstra and
//!   brute-force oracles, route plans.
//! * [`store`]: the `.gvip` binary archive.
//! * [`export`]: GeoJSON feature collections.

pub mod export;
pub mod graph;
pub mod gvi;
pub mod network;
pub mod routing;
pub mod store;

pub use graph::{EdgeGvi, EdgeGviLookup, EdgeGviTable, WeightedGraph};
pub use gvi::{GviBand, NodeGvi, ViewObservation};
pub use network::{GeoNode, NodeId, StreetEdge, StreetNetwork};
pub use routing::{ApspResult, RoutePlan};
pub use store::ApspArchive;
