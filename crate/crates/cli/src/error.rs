use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use greenroute::export::ExportError;
use greenroute::graph::GraphError;
use greenroute::gvi::GviError;
use greenroute::network::NetworkError;
use greenroute::routing::RoutingError;
use greenroute::store::StoreError;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NO_PATH: i32 = 4;
pub const EXIT_RESOURCE: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {message}")]
    Data { context: String, message: String },
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("no path from {from:?} to {to:?}")]
    NoPath { from: String, to: String },
    #[error("{0}")]
    Resource(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Data { .. } | CliError::UnknownNode(_) => EXIT_DATA,
            CliError::NoPath { .. } => EXIT_NO_PATH,
            CliError::Resource(_) => EXIT_RESOURCE,
        }
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn data(context: impl Into<String>, err: impl ToString) -> Self {
        CliError::Data { context: context.into(), message: err.to_string() }
    }
}

pub fn network_error(path: &Path, err: NetworkError) -> CliError {
    CliError::data(path.display().to_string(), err)
}

pub fn gvi_error(context: impl Into<String>, err: GviError) -> CliError {
    CliError::data(context, err)
}

impl From<GraphError> for CliError {
    fn from(err: GraphError) -> Self {
        match err {
            GraphError::GraphTooLarge { .. } => CliError::Resource(err.to_string()),
            other => CliError::data("graph", other),
        }
    }
}

impl From<RoutingError> for CliError {
    fn from(err: RoutingError) -> Self {
        match err {
            RoutingError::GraphTooLarge { .. } => CliError::Resource(err.to_string()),
            other => CliError::data("routing", other),
        }
    }
}

pub fn store_error(path: &Path, err: StoreError) -> CliError {
    match err {
        StoreError::Io(source) => CliError::io(path, source),
        other => CliError::data(path.display().to_string(), other),
    }
}

impl From<ExportError> for CliError {
    fn from(err: ExportError) -> Self {
        CliError::data("export", err)
    }
}
