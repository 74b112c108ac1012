//! The ingest workspace: a directory of normalized inputs that `build` and
//! `stats` read without touching the raw files again.
//!
//! ```text
//! network.json        the network re-serialized after validation
//! observations.csv    one row per view, node ids resolved and checked
//! ingest-report.json  counts from the ingest run
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use greenroute::gvi::{
    node_gvis, parse_observation_table, write_observation_table, ClassRaster, ClassTable, GreeneryClassSet,
    ViewObservation,
};
use greenroute::network::{parse_network, IngestReport};
use greenroute::{NodeGvi, NodeId, StreetNetwork};

use crate::error::{gvi_error, network_error, CliError};

pub const NETWORK_FILE: &str = "network.json";
pub const OBSERVATIONS_FILE: &str = "observations.csv";
pub const REPORT_FILE: &str = "ingest-report.json";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceReport {
    pub network: IngestReport,
    /// Observation rows kept, from the table and from rasters.
    pub observations: usize,
    pub raster_observations: usize,
    /// Rows naming a node that is not in the network.
    pub skipped_observations: usize,
    pub nodes_with_gvi: usize,
    pub nodes_without_gvi: usize,
}

impl WorkspaceReport {
    pub fn summary(&self) -> String {
        format!(
            "nodes: {}, edges: {}, dropped: {}\ninvalid nodes: {}, duplicate edges: {}\n\
             observations: {}, skipped: {}, nodes without GVI: {}\n",
            self.network.nodes,
            self.network.edges,
            self.network.dropped_edges,
            self.network.invalid_nodes,
            self.network.duplicate_edges,
            self.observations,
            self.skipped_observations,
            self.nodes_without_gvi,
        )
    }
}

pub struct Workspace {
    pub network: StreetNetwork,
    pub observations: Vec<ViewObservation>,
}

impl Workspace {
    pub fn node_gvis(&self) -> Result<BTreeMap<NodeId, NodeGvi>, CliError> {
        node_gvis(&self.observations).map_err(|e| gvi_error("observations", e))
    }

    pub fn load(dir: &Path) -> Result<Workspace, CliError> {
        let network_path = dir.join(NETWORK_FILE);
        let (network, _) = parse_network(&read(&network_path)?).map_err(|e| network_error(&network_path, e))?;
        let obs_path = dir.join(OBSERVATIONS_FILE);
        let (observations, skipped) = resolve_rows(&network, &read(&obs_path)?, &obs_path)?;
        if !skipped.is_empty() {
            return Err(CliError::data(
                obs_path.display().to_string(),
                format!("names unknown node {:?}; re-run ingest", skipped[0]),
            ));
        }
        Ok(Workspace { network, observations })
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Resolves table rows against the network. Rows naming unknown nodes are
/// returned separately rather than failing the whole table.
fn resolve_rows(
    network: &StreetNetwork,
    table: &str,
    path: &Path,
) -> Result<(Vec<ViewObservation>, Vec<String>), CliError> {
    let rows = parse_observation_table(table).map_err(|e| gvi_error(path.display().to_string(), e))?;
    let mut kept = Vec::with_capacity(rows.len());
    let mut skipped = Vec::new();
    for row in rows {
        match network.resolve(&row.node) {
            Some(node) => kept.push(ViewObservation { node, heading_deg: row.heading_deg, measurement: row.measurement }),
            None => skipped.push(row.node),
        }
    }
    Ok((kept, skipped))
}

/// Raster files are named `<node>_<heading>.txt`.
fn raster_observations(
    network: &StreetNetwork,
    dir: &Path,
    classes: Option<&Path>,
) -> Result<(Vec<ViewObservation>, Vec<String>), CliError> {
    let table = match classes {
        Some(path) => ClassTable::parse(&read(path)?).map_err(|e| gvi_error(path.display().to_string(), e))?,
        None => ClassTable::default(),
    };
    let greenery = GreeneryClassSet::default_for(&table).map_err(|e| gvi_error("class table", e))?;
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .map(|entry| entry.map(|e| e.path()).map_err(|e| CliError::io(dir, e)))
        .collect::<Result<_, _>>()?;
    paths.retain(|p| p.extension().is_some_and(|x| x == "txt"));
    paths.sort();

    let mut kept = Vec::with_capacity(paths.len());
    let mut skipped = Vec::new();
    for path in paths {
        let context = path.display().to_string();
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let (node, heading) = stem
            .rsplit_once('_')
            .ok_or_else(|| CliError::data(&context, "raster file name must be <node>_<heading>.txt"))?;
        let heading_deg: f64 = heading.parse().map_err(|e| CliError::data(&context, format!("heading: {e}")))?;
        let Some(id) = network.resolve(node) else {
            skipped.push(node.to_string());
            continue;
        };
        let raster = ClassRaster::parse(&read(&path)?).map_err(|e| gvi_error(&context, e))?;
        if raster.class_count() != table.class_count() {
            return Err(CliError::data(
                &context,
                format!("raster has {} classes, class table {}", raster.class_count(), table.class_count()),
            ));
        }
        let obs = ViewObservation::from_pixels(id, heading_deg, greenery.count_in(&raster), raster.total_pixels())
            .map_err(|e| gvi_error(&context, e))?;
        kept.push(obs);
    }
    Ok((kept, skipped))
}

pub struct IngestInputs<'a> {
    pub network: &'a Path,
    pub observations: &'a Path,
    pub rasters: Option<&'a Path>,
    pub classes: Option<&'a Path>,
}

/// Validates the raw inputs and writes the workspace.
pub fn ingest(inputs: &IngestInputs<'_>, dir: &Path) -> Result<WorkspaceReport, CliError> {
    let (network, network_report) =
        parse_network(&read(inputs.network)?).map_err(|e| network_error(inputs.network, e))?;
    let (mut observations, mut skipped) = resolve_rows(&network, &read(inputs.observations)?, inputs.observations)?;
    let mut raster_count = 0;
    if let Some(rasters) = inputs.rasters {
        let (more, more_skipped) = raster_observations(&network, rasters, inputs.classes)?;
        raster_count = more.len();
        observations.extend(more);
        skipped.extend(more_skipped);
    }
    for node in &skipped {
        log::warn!("skipping observation for unknown node {node:?}");
    }

    let gvis = node_gvis(&observations).map_err(|e| gvi_error("observations", e))?;
    let report = WorkspaceReport {
        network: network_report,
        observations: observations.len(),
        raster_observations: raster_count,
        skipped_observations: skipped.len(),
        nodes_with_gvi: gvis.len(),
        nodes_without_gvi: network.len() - gvis.len(),
    };

    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write(&dir.join(NETWORK_FILE), &network.to_json())?;
    write(
        &dir.join(OBSERVATIONS_FILE),
        &write_observation_table(&observations, |id| network.external_id(id)),
    )?;
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    write(&dir.join(REPORT_FILE), &json)?;
    Ok(report)
}
