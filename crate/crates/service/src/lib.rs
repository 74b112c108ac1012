//! Read-only HTTP queries over one loaded archive.
//!
//! The archive is loaded once before the router is built and is shared
//! behind an `Arc`; handlers only read, so there is no lock on the query
//! path. Responses that never change (node list, statistics, network
//! export) are rendered once up front.

use std::collections::HashMap;
use std::future::Future;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;
use tokio::net::TcpListener;
use tower_http::cors::CorsLayer;

use greenroute::export::{export_archive_geojson, export_route_geojson, FeatureCollection, GEOJSON_MEDIA_TYPE};
use greenroute::gvi::{band_distribution, BandDistribution, GviBand};
use greenroute::routing::RoutingError;
use greenroute::{ApspArchive, StreetNetwork};

struct Loaded {
    archive: ApspArchive,
    network: StreetNetwork,
    nodes_body: String,
    stats: Option<StatsDocument>,
    network_body: String,
}

#[derive(Clone, Default)]
pub struct AppState {
    loaded: Option<Arc<Loaded>>,
}

impl AppState {
    pub fn empty() -> Self {
        AppState::default()
    }

    pub fn new(archive: ApspArchive) -> Self {
        let network = archive.network();
        let nodes: Vec<NodeEntry> = archive
            .nodes()
            .iter()
            .filter(|n| n.valid)
            .map(|n| NodeEntry {
                id: n.external_id.clone(),
                lat: n.lat,
                lon: n.lon,
                gvi_avg: n.gvi_avg,
                band: n.gvi_avg.map(GviBand::of),
            })
            .collect();
        let nodes_body = serde_json::to_string(&nodes).expect("node list serializes");
        let stats = band_distribution(archive.valid_node_gvis()).ok().map(StatsDocument::from);
        let network_body = export_archive_geojson(&archive).to_json();
        AppState { loaded: Some(Arc::new(Loaded { archive, network, nodes_body, stats, network_body })) }
    }
}

#[derive(Serialize)]
struct NodeEntry {
    id: String,
    lat: f64,
    lon: f64,
    gvi_avg: Option<f64>,
    band: Option<GviBand>,
}

#[derive(Clone, Serialize)]
pub struct BandRow {
    pub band: GviBand,
    pub range: &'static str,
    pub color: &'static str,
    pub count: usize,
    pub percent: f64,
}

#[derive(Clone, Serialize)]
pub struct StatsDocument {
    pub total: usize,
    pub bands: Vec<BandRow>,
}

impl From<BandDistribution> for StatsDocument {
    fn from(d: BandDistribution) -> Self {
        let bands = GviBand::ALL
            .iter()
            .map(|&band| BandRow {
                band,
                range: band.range_label(),
                color: band.color(),
                count: d.counts[band.index()],
                percent: d.percentages[band.index()],
            })
            .collect();
        StatsDocument { total: d.total, bands }
    }
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    directed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    built_at: Option<i64>,
}

#[derive(Serialize)]
pub struct RouteSummary {
    pub from: String,
    pub to: String,
    pub nodes: Vec<String>,
    pub edge_gvis: Vec<f64>,
    pub avg_gvi: f64,
    pub total_weight: f64,
    pub node_count: usize,
    pub band: GviBand,
    pub color: &'static str,
}

#[derive(Serialize)]
struct RouteDocument {
    summary: RouteSummary,
    geojson: FeatureCollection,
}

#[derive(Serialize)]
struct ErrorBody {
    code: &'static str,
    message: String,
}

fn error(status: StatusCode, code: &'static str, message: impl Into<String>) -> Response {
    (status, Json(ErrorBody { code, message: message.into() })).into_response()
}

fn not_loaded() -> Response {
    error(StatusCode::SERVICE_UNAVAILABLE, "empty", "no archive loaded")
}

fn json_body(body: String, content_type: &'static str) -> Response {
    ([(header::CONTENT_TYPE, HeaderValue::from_static(content_type))], body).into_response()
}

async fn health(State(state): State<AppState>) -> Json<Health> {
    Json(match &state.loaded {
        Some(l) => Health {
            status: "ok",
            n: Some(l.archive.n()),
            directed: Some(l.archive.is_directed()),
            built_at: Some(l.archive.built_at()),
        },
        None => Health { status: "empty", n: None, directed: None, built_at: None },
    })
}

async fn nodes(State(state): State<AppState>) -> Response {
    match &state.loaded {
        Some(l) => json_body(l.nodes_body.clone(), "application/json"),
        None => not_loaded(),
    }
}

async fn stats(State(state): State<AppState>) -> Response {
    match &state.loaded {
        Some(l) => match &l.stats {
            Some(doc) => Json(doc.clone()).into_response(),
            None => error(StatusCode::UNPROCESSABLE_ENTITY, "empty_input", "no node GVI values in archive"),
        },
        None => not_loaded(),
    }
}

async fn network_geojson(State(state): State<AppState>) -> Response {
    match &state.loaded {
        Some(l) => json_body(l.network_body.clone(), GEOJSON_MEDIA_TYPE),
        None => not_loaded(),
    }
}

async fn route(State(state): State<AppState>, Query(params): Query<HashMap<String, String>>) -> Response {
    let Some(l) = &state.loaded else {
        return not_loaded();
    };
    let (Some(from), Some(to)) = (params.get("from"), params.get("to")) else {
        return error(StatusCode::BAD_REQUEST, "missing_param", "both from and to are required");
    };
    let resolve = |id: &str| l.archive.resolve(id);
    let (Some(s), Some(t)) = (resolve(from), resolve(to)) else {
        let unknown = if resolve(from).is_none() { from } else { to };
        return error(StatusCode::NOT_FOUND, "unknown_node", format!("unknown node {unknown:?}"));
    };
    let plan = match l.archive.route(s, t) {
        Ok(plan) => plan,
        Err(RoutingError::SameNode(_)) => {
            return error(StatusCode::BAD_REQUEST, "same_node", "start and destination are the same node")
        }
        Err(RoutingError::NoPath { .. }) => {
            return error(StatusCode::CONFLICT, "no_path", format!("no path from {from:?} to {to:?}"))
        }
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()),
    };
    let geojson = match export_route_geojson(&plan, &l.network) {
        Ok(fc) => fc,
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()),
    };
    let summary = RouteSummary {
        from: from.clone(),
        to: to.clone(),
        nodes: plan.nodes.iter().map(|&id| l.archive.external_id(id).to_string()).collect(),
        edge_gvis: plan.edge_gvis.clone(),
        avg_gvi: plan.avg_gvi,
        total_weight: plan.total_weight,
        node_count: plan.node_count,
        band: plan.band,
        color: plan.band.color(),
    };
    Json(RouteDocument { summary, geojson }).into_response()
}

/// Builds the router. `cors` adds permissive cross-origin headers for a
/// browser client served from elsewhere.
pub fn router(state: AppState, cors: bool) -> Router {
    let app = Router::new()
        .route("/health", get(health))
        .route("/nodes", get(nodes))
        .route("/route", get(route))
        .route("/stats", get(stats))
        .route("/network.geojson", get(network_geojson))
        .with_state(state);
    if cors {
        app.layer(CorsLayer::permissive())
    } else {
        app
    }
}

/// Serves on an already bound listener until `shutdown` resolves.
pub async fn serve_on<F>(listener: TcpListener, state: AppState, cors: bool, shutdown: F) -> std::io::Result<()>
where
    F: Future<Output = ()> + Send + 'static,
{
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state, cors)).with_graceful_shutdown(shutdown).await
}

/// Binds `addr` and serves until ctrl-c.
pub async fn serve(state: AppState, addr: SocketAddr, cors: bool) -> std::io::Result<()> {
    let listener = TcpListener::bind(addr).await?;
    serve_on(listener, state, cors, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}
