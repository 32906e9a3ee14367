// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cycle detected through back edge {src} -> {dst}")]
    Cycle { src: VertexId, dst: VertexId },

    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),

    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),

    #[error("invalid label {0:?}: labels must be non-empty and contain no whitespace")]
    InvalidLabel(String),

    #[error("merge group {index} is empty")]
    EmptyGroup { index: usize },

    #[error("vertex {0} appears in more than one merge group")]
    OverlappingGroups(VertexId),

    #[error("merge group containing {vertex} mixes labels {first:?} and {second:?}")]
    MixedLabels {
        vertex: VertexId,
        first: String,
        second: String,
    },

    #[error("merge group contains the edge {src} -> {dst}")]
    IntraGroupEdge { src: VertexId, dst: VertexId },

    #[error("graph has {size} vertices, above the exact-matching limit of {limit}")]
    SizeGuard { size: usize, limit: usize },

    #[error("graph has no edges")]
    NoEdges,

    #[error("event {event} references origin {origin}, which is not an earlier event")]
    OriginNotEarlier { event: u64, origin: u64 },

    #[error("stack underflow at event {index} ({opcode} pops {pops}, stack holds {depth})")]
    StackUnderflow {
        index: usize,
        opcode: String,
        pops: usize,
        depth: usize,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported format version {found:?} (expected {expected:?})")]
    Version { found: String, expected: String },

    #[error("checksum mismatch: file says {expected:08x}, content hashes to {actual:08x}")]
    Checksum { expected: u32, actual: u32 },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("G_{0} cannot be materialized (layer sizes explode beyond 3)")]
    Infeasible(usize),

    #[error("fingerprint database: {0}")]
    Database(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
