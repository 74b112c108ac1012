//! `greenroute`: ingest street-view observations, build an all-pairs
//! greenest-route archive, and query it.

mod config;
mod error;
mod workspace;

use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use greenroute::export::{export_archive_geojson, export_route_geojson};
use greenroute::graph::{build_adjacency_matrix, EdgeGviAssignment, DEFAULT_HEADING_TOLERANCE_DEG, DEFAULT_MAX_NODES};
use greenroute::gvi::{band_distribution, GviError};
use greenroute::routing::{solve, ApspOptions, RoutingError, DEFAULT_BLOCK_SIZE};
use greenroute::store::{load_apsp, save_apsp};
use greenroute::ApspArchive;
use greenroute_service::AppState;

use crate::config::Config;
use crate::error::{gvi_error, store_error, CliError, EXIT_USAGE};
use crate::workspace::{ingest, IngestInputs, Workspace};

const THREADS_ENV: &str = "GREENROUTE_THREADS";

#[derive(Parser)]
#[command(name = "greenroute", version, about = "Greenest-route archives from street-level greenery")]
struct Cli {
    /// TOML file with defaults for build and serve flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Undirected,
    Directional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Geojson,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a network and its observations into a workspace directory
    Ingest {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        obs: PathBuf,
        /// Segmented rasters named <node>_<heading>.txt
        #[arg(long)]
        rasters: Option<PathBuf>,
        /// Class table for the rasters (default: the 19 Cityscapes classes)
        #[arg(long, requires = "rasters")]
        classes: Option<PathBuf>,
        #[arg(long)]
        workspace: PathBuf,
    },
    /// Assign edge GVIs, solve all pairs and write an archive
    Build {
        #[arg(long)]
        workspace: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Heading match tolerance in degrees (directional mode)
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Tile size for the blocked kernel; 0 runs the plain triple loop
        #[arg(long)]
        block_size: Option<usize>,
        #[arg(long)]
        max_nodes: Option<usize>,
        /// Build time recorded in the archive, unix seconds. Defaults to
        /// SOURCE_DATE_EPOCH, else 0, so rebuilds are byte-identical.
        #[arg(long)]
        timestamp: Option<i64>,
    },
    /// Greenest route between two nodes of an archive
    Route {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Write to a file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Band distribution of node GVIs
    Stats {
        #[arg(long, conflicts_with = "workspace", required_unless_present = "workspace")]
        archive: Option<PathBuf>,
        #[arg(long)]
        workspace: Option<PathBuf>,
    },
    /// Node and edge GeoJSON for an archive
    Export {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve read-only queries over HTTP
    Serve {
        /// Archive to load; without one every data endpoint answers 503
        #[arg(long)]
        archive: Option<PathBuf>,
        #[arg(long)]
        listen: Option<SocketAddr>,
        /// Send permissive cross-origin headers
        #[arg(long)]
        cors: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("greenroute: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest { network, obs, rasters, classes, workspace } => {
            let inputs = IngestInputs {
                network: &network,
                observations: &obs,
                rasters: rasters.as_deref(),
                classes: classes.as_deref(),
            };
            let report = ingest(&inputs, &workspace)?;
            print!("{}", report.summary());
            Ok(())
        }
        Command::Build { workspace, mode, tolerance, out, block_size, max_nodes, timestamp } => {
            let mode = match (mode, config.build.mode.as_deref()) {
                (Some(m), _) => m,
                (None, Some(s)) => Mode::from_str(s, true).map_err(|_| CliError::Usage(format!("config: unknown mode {s:?}")))?,
                (None, None) => Mode::Undirected,
            };
            let settings = BuildSettings {
                mode,
                tolerance: tolerance.or(config.build.tolerance).unwrap_or(DEFAULT_HEADING_TOLERANCE_DEG),
                block_size: block_size.or(config.build.block_size).unwrap_or(DEFAULT_BLOCK_SIZE),
                max_nodes: max_nodes.or(config.build.max_nodes).unwrap_or(DEFAULT_MAX_NODES),
                timestamp: match timestamp {
                    Some(t) => t,
                    None => source_date_epoch()?,
                },
            };
            build(&workspace, &out, &settings)
        }
        Command::Route { archive, from, to, format, out } => route(&archive, &from, &to, format, out.as_deref()),
        Command::Stats { archive, workspace } => {
            let values = match (archive, workspace) {
                (Some(path), _) => load(&path)?.valid_node_gvis(),
                (None, Some(dir)) => {
                    let ws = Workspace::load(&dir)?;
                    let gvis = ws.node_gvis()?;
                    gvis.values().filter(|g| ws.network.node(g.node).valid).map(|g| g.gvi_avg).collect()
                }
                (None, None) => unreachable!("clap requires one of --archive, --workspace"),
            };
            let dist = band_distribution(values).map_err(|e| match e {
                GviError::EmptyInput => CliError::data("stats", "no node GVI values"),
                other => gvi_error("stats", other),
            })?;
            emit(None, &dist.table())
        }
        Command::Export { archive, out } => emit(out.as_deref(), &export_archive_geojson(&load(&archive)?).to_json()),
        Command::Serve { archive, listen, cors } => {
            let state = match archive {
                Some(path) => AppState::new(load(&path)?),
                None => AppState::empty(),
            };
            let addr = match (listen, config.serve.listen.as_deref()) {
                (Some(a), _) => a,
                (None, Some(s)) => s.parse().map_err(|e| CliError::Usage(format!("config: listen {s:?}: {e}")))?,
                (None, None) => SocketAddr::from(([127, 0, 0, 1], 8080)),
            };
            let cors = cors || config.serve.cors.unwrap_or(false);
            let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Resource(e.to_string()))?;
            runtime
                .block_on(greenroute_service::serve(state, addr, cors))
                .map_err(|e| CliError::Resource(format!("{addr}: {e}")))
        }
    }
}

fn source_date_epoch() -> Result<i64, CliError> {
    match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(s) => s.trim().parse().map_err(|e| CliError::Usage(format!("SOURCE_DATE_EPOCH {s:?}: {e}"))),
        Err(_) => Ok(0),
    }
}

fn load(path: &Path) -> Result<ApspArchive, CliError> {
    load_apsp(path).map_err(|e| store_error(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

struct BuildSettings {
    mode: Mode,
    tolerance: f64,
    block_size: usize,
    max_nodes: usize,
    timestamp: i64,
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(s) = std::env::var(THREADS_ENV) {
        let threads: usize = s
            .trim()
            .parse()
            .map_err(|e| CliError::Usage(format!("{THREADS_ENV} {s:?}: {e}")))?;
        builder = builder.num_threads(threads);
    }
    builder.build().map_err(|e| CliError::Resource(e.to_string()))
}

fn build(dir: &Path, out: &Path, settings: &BuildSettings) -> Result<(), CliError> {
    let ws = Workspace::load(dir)?;
    let gvis = ws.node_gvis()?;
    let assignment = match settings.mode {
        Mode::Undirected => EdgeGviAssignment::default(),
        Mode::Directional => EdgeGviAssignment::directional(settings.tolerance),
    };
    let (table, report) = assignment.assign(&ws.network, &gvis)?;
    if !report.missing.is_empty() {
        eprintln!("warning: {} edges dropped for missing node GVI", report.missing.len());
        for (u, v) in report.missing.iter().take(10) {
            eprintln!("  {} - {}", ws.network.external_id(*u), ws.network.external_id(*v));
        }
    }
    if !report.fallbacks.is_empty() {
        eprintln!("note: {} directed edges matched no heading and use the node mean", report.fallbacks.len());
    }
    let graph = build_adjacency_matrix(ws.network.len(), &table, settings.max_nodes)?;
    let options = ApspOptions { block_size: settings.block_size, max_nodes: settings.max_nodes };

    let pool = thread_pool()?;
    let started = Instant::now();
    let apsp = pool.install(|| solve(&graph, &options))?;
    let elapsed = started.elapsed();

    let archive = ApspArchive::new(apsp, &graph, &ws.network, &gvis, settings.timestamp)
        .map_err(|e| store_error(out, e))?;
    save_apsp(&archive, out).map_err(|e| store_error(out, e))?;
    println!(
        "n {}, edges {}, mode {}, solved in {:.3}s, wrote {}",
        graph.n(),
        table.len(),
        match settings.mode {
            Mode::Undirected => "undirected",
            Mode::Directional => "directional",
        },
        elapsed.as_secs_f64(),
        out.display()
    );
    Ok(())
}

fn route(path: &Path, from: &str, to: &str, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let archive = load(path)?;
    let s = archive.resolve(from).ok_or_else(|| CliError::UnknownNode(from.to_string()))?;
    let t = archive.resolve(to).ok_or_else(|| CliError::UnknownNode(to.to_string()))?;
    let plan = archive.route(s, t).map_err(|e| match e {
        RoutingError::NoPath { .. } => CliError::NoPath { from: from.to_string(), to: to.to_string() },
        RoutingError::SameNode(_) => CliError::Usage("--from and --to name the same node".into()),
        other => other.into(),
    })?;
    let text = match format {
        Format::Text => {
            let ids: Vec<&str> = plan.nodes.iter().map(|&id| archive.external_id(id)).collect();
            format!(
                "{}, avg {:.2}%, nodes {}, band {}\n",
                ids.join(" "),
                plan.avg_gvi,
                plan.node_count,
                plan.band.label()
            )
        }
        Format::Geojson => export_route_geojson(&plan, &archive.network())?.to_json(),
    };
    emit(out, &text)
}
