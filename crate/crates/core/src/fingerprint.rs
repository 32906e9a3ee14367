// SPDX-License-Identifier: Apache-2.0

//! Fingerprint files.
//!
//! ```text
//! #dfgprint-fingerprint v1
//! #name cn
//! #source synth miner-mixrounds
//! #direction consumer-to-operand
//! #params mode=exact bandwidth=auto fixpoint=false
//! #created 0
//! #counts 3 2
//! V 0 other
//! V 1 xor
//! V 3 and
//! E 0 1
//! E 1 3
//! #crc32 1a2b3c4d
//! ```
//!
//! The checksum is CRC-32 over every byte before the `#crc32` line. Header
//! values are single-line; backslash, CR and LF are escaped.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DataFlowGraph, Label, VertexId};
use crate::trace::Direction;

pub const FINGERPRINT_MAGIC: &str = "#dfgprint-fingerprint";
pub const FINGERPRINT_VERSION: &str = "v1";

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FingerprintMeta {
    pub name: String,
    pub source: String,
    pub direction: Direction,
    /// Simplification parameters, or `unsimplified` for raw graphs.
    pub params: String,
    /// Seconds since the Unix epoch.
    pub created: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FingerprintRecord {
    pub graph: DataFlowGraph,
    pub meta: FingerprintMeta,
}

/// Creation time honoring `SOURCE_DATE_EPOCH` for reproducible output.
pub fn creation_time() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
    {
        return t;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

impl FingerprintRecord {
    pub fn new(graph: DataFlowGraph, meta: FingerprintMeta) -> Self {
        FingerprintRecord { graph, meta }
    }

    pub fn to_text(&self) -> String {
        let mut body = String::new();
        let m = &self.meta;
        body.push_str(&format!("{FINGERPRINT_MAGIC} {FINGERPRINT_VERSION}\n"));
        body.push_str(&format!("#name {}\n", escape(&m.name)));
        body.push_str(&format!("#source {}\n", escape(&m.source)));
        body.push_str(&format!("#direction {}\n", m.direction));
        body.push_str(&format!("#params {}\n", escape(&m.params)));
        body.push_str(&format!("#created {}\n", m.created));
        body.push_str(&format!(
            "#counts {} {}\n",
            self.graph.vertex_count(),
            self.graph.edge_count()
        ));
        for (v, l) in self.graph.vertices() {
            body.push_str(&format!("V {v} {l}\n"));
        }
        for (s, d) in self.graph.edges() {
            body.push_str(&format!("E {s} {d}\n"));
        }
        let crc = crc32fast::hash(body.as_bytes());
        body.push_str(&format!("#crc32 {crc:08x}\n"));
        body
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let Some(crc_at) = text.rfind("#crc32 ") else {
            return Err(Error::parse(0, "missing #crc32 trailer"));
        };
        let (body, trailer) = text.split_at(crc_at);
        let expected = u32::from_str_radix(trailer["#crc32 ".len()..].trim(), 16)
            .map_err(|_| Error::parse(0, "malformed #crc32 trailer"))?;

        let mut lines = body.lines().enumerate();
        let header = lines.next().map(|(_, l)| l).unwrap_or("");
        let mut hf = header.split_whitespace();
        if hf.next() != Some(FINGERPRINT_MAGIC) {
            return Err(Error::parse(1, format!("expected {FINGERPRINT_MAGIC} header")));
        }
        let version = hf.next().unwrap_or("");
        if version != FINGERPRINT_VERSION {
            return Err(Error::Version {
                found: version.to_string(),
                expected: FINGERPRINT_VERSION.to_string(),
            });
        }
        let actual = crc32fast::hash(body.as_bytes());
        if actual != expected {
            return Err(Error::Checksum { expected, actual });
        }

        let mut meta = FingerprintMeta::default();
        let mut counts = None;
        let mut graph = DataFlowGraph::new();
        for (i, line) in lines {
            let n = i + 1;
            if let Some(rest) = line.strip_prefix('#') {
                let (key, value) = rest.split_once(' ').unwrap_or((rest, ""));
                match key {
                    "name" => meta.name = unescape(value),
                    "source" => meta.source = unescape(value),
                    "direction" => meta.direction = value.parse()?,
                    "params" => meta.params = unescape(value),
                    "created" => {
                        meta.created = value
                            .parse()
                            .map_err(|_| Error::parse(n, "bad #created value"))?
                    }
                    "counts" => {
                        let mut it = value.split_whitespace().map(str::parse::<usize>);
                        match (it.next(), it.next()) {
                            (Some(Ok(v)), Some(Ok(e))) => counts = Some((v, e)),
                            _ => return Err(Error::parse(n, "bad #counts value")),
                        }
                    }
                    _ => {}
                }
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            match f.as_slice() {
                ["V", id, label] => {
                    let id = parse_id(id, n)?;
                    let label = Label::new(label).map_err(|e| Error::parse(n, e.to_string()))?;
                    if graph.add_vertex(id, label).is_some() {
                        return Err(Error::parse(n, format!("duplicate vertex {id}")));
                    }
                }
                ["E", s, d] => {
                    if !graph.add_edge(parse_id(s, n)?, parse_id(d, n)?) {
                        return Err(Error::parse(n, "duplicate edge"));
                    }
                }
                [] => {}
                _ => return Err(Error::parse(n, format!("unrecognized record {line:?}"))),
            }
        }
        if let Some((v, e)) = counts {
            if v != graph.vertex_count() || e != graph.edge_count() {
                return Err(Error::InvalidGraph(format!(
                    "header declares {v} vertices and {e} edges, file holds {} and {}",
                    graph.vertex_count(),
                    graph.edge_count()
                )));
            }
        }
        graph.check()?;
        Ok(FingerprintRecord { graph, meta })
    }
}

fn parse_id(s: &str, n: usize) -> Result<VertexId> {
    s.parse()
        .map(VertexId)
        .map_err(|_| Error::parse(n, format!("bad vertex id {s:?}")))
}

pub fn write_fingerprint(rec: &FingerprintRecord, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    rec.graph.check()?;
    let mut f = fs::File::create(path).map_err(|e| Error::file(path, e))?;
    f.write_all(rec.to_text().as_bytes())
        .map_err(|e| Error::file(path, e))?;
    Ok(())
}

pub fn read_fingerprint(path: impl AsRef<Path>) -> Result<FingerprintRecord> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    FingerprintRecord::from_text(&text)
}
