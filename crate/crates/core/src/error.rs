//! Error type shared by every module of the crate.

use crate::graph::Side;
use thiserror::Error;

/// Errors produced by graph ingestion, estimation, selection and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A line of an input file could not be parsed. Line numbers are 1-based.
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// An edge-list file contained no edges (and therefore no nodes).
    #[error("empty graph: {0} contains no edge lines")]
    EmptyGraph(String),

    /// A candidate pool is empty where at least one candidate is required.
    #[error("empty candidate pool: {0}")]
    EmptyPool(String),

    /// A partition file did not cover every node of the graph.
    #[error("incomplete partition: {} node(s) missing a label, e.g. {:?}", missing.len(), missing.iter().take(5).collect::<Vec<_>>())]
    IncompletePartition { missing: Vec<String> },

    /// A node identifier was referenced but does not exist in the graph.
    #[error("unknown node: {0}")]
    UnknownNode(String),

    /// A node was added that already exists in the graph.
    #[error("duplicate node: {0} is already present in the graph")]
    DuplicateNode(String),

    /// One side of the partition has no members, so side-conditional
    /// probabilities are undefined.
    #[error("degenerate partition: side {0} has no members")]
    DegeneratePartition(Side),

    /// Every walk started from one side was discarded, so the conditional
    /// termination probabilities for that side cannot be estimated.
    #[error("estimation failed: all walks starting in side {0} were discarded")]
    EstimationFailed(Side),

    /// The exact solver refuses graphs above its dense-linear-algebra guard.
    #[error("graph too large for the exact solver: {nodes} nodes > guard of {guard}")]
    GraphTooLarge { nodes: usize, guard: usize },

    /// A configuration or argument value is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An internal invariant was violated; indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by bad configuration or input files, as opposed
    /// to failures that arise while estimating on valid inputs. Drives the
    /// CLI's exit-code split.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::EstimationFailed(_) | Error::Internal(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
