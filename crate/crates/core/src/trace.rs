// SPDX-License-Identifier: Apache-2.0

//! Execution traces and their conversion into data-flow graphs.
//!
//! Two line-oriented formats are accepted. A resolved trace names the
//! operand origins of every event directly:
//!
//! ```text
//! #dfgtrace v1 resolved dir=consumer-to-operand
//! EVENT 1 i32.const
//! EVENT 2 xor 1 1
//! ```
//!
//! A raw trace only records stack effects, and origins are recovered with a
//! shadow stack plus per-slot generations:
//!
//! ```text
//! #dfgtrace v1 raw
//! OP i32.const pops=0 pushes=1
//! OP local.set pops=1 pushes=0 local 0 write
//! ```
//!
//! Vertex ids are event ids (resolved) or zero-based event positions (raw).

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DataFlowGraph, Label, VertexId};

pub const TRACE_MAGIC: &str = "#dfgtrace";
pub const TRACE_VERSION: &str = "v1";

/// Which way edges point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Consumer execution -> operand origin.
    #[default]
    #[serde(rename = "consumer-to-operand")]
    ConsumerToOperand,
    #[serde(rename = "operand-to-consumer")]
    OperandToConsumer,
}

impl Direction {
    pub fn tag(self) -> &'static str {
        match self {
            Direction::ConsumerToOperand => "consumer-to-operand",
            Direction::OperandToConsumer => "operand-to-consumer",
        }
    }

    fn edge(self, consumer: u64, origin: u64) -> (VertexId, VertexId) {
        match self {
            Direction::ConsumerToOperand => (VertexId(consumer), VertexId(origin)),
            Direction::OperandToConsumer => (VertexId(origin), VertexId(consumer)),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "consumer-to-operand" => Ok(Direction::ConsumerToOperand),
            "operand-to-consumer" => Ok(Direction::OperandToConsumer),
            other => Err(Error::InvalidParam(format!("unknown edge direction {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvedEvent {
    pub id: u64,
    pub opcode: Label,
    pub origins: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlotKind {
    Local,
    Global,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Access {
    Read,
    Write,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SlotEffect {
    pub kind: SlotKind,
    pub index: u32,
    pub access: Access,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawStackEvent {
    pub opcode: Label,
    pub pops: u32,
    pub pushes: u32,
    pub slot: Option<SlotEffect>,
}

impl RawStackEvent {
    pub fn op(opcode: &str, pops: u32, pushes: u32) -> Result<Self> {
        Ok(RawStackEvent {
            opcode: Label::new(opcode)?,
            pops,
            pushes,
            slot: None,
        })
    }

    pub fn local_get(index: u32) -> Self {
        Self::slot_op("local.get", SlotKind::Local, index, Access::Read)
    }

    pub fn local_set(index: u32) -> Self {
        Self::slot_op("local.set", SlotKind::Local, index, Access::Write)
    }

    pub fn local_tee(index: u32) -> Self {
        let mut e = Self::slot_op("local.tee", SlotKind::Local, index, Access::Write);
        e.pushes = 1;
        e
    }

    pub fn global_get(index: u32) -> Self {
        Self::slot_op("global.get", SlotKind::Global, index, Access::Read)
    }

    pub fn global_set(index: u32) -> Self {
        Self::slot_op("global.set", SlotKind::Global, index, Access::Write)
    }

    fn slot_op(name: &str, kind: SlotKind, index: u32, access: Access) -> Self {
        let (pops, pushes) = match access {
            Access::Read => (0, 1),
            Access::Write => (1, 0),
        };
        RawStackEvent {
            opcode: Label::new(name).expect("static opcode"),
            pops,
            pushes,
            slot: Some(SlotEffect {
                kind,
                index,
                access,
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub instrumented: BTreeSet<Label>,
    pub max_edges: usize,
    pub direction: Direction,
}

pub const DEFAULT_MAX_EDGES: usize = 2002;
pub const DEFAULT_INSTRUMENTED: [&str; 3] = ["and", "xor", "shr"];

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            instrumented: DEFAULT_INSTRUMENTED
                .iter()
                .map(|s| Label::new(s).unwrap())
                .collect(),
            max_edges: DEFAULT_MAX_EDGES,
            direction: Direction::ConsumerToOperand,
        }
    }
}

impl IngestConfig {
    pub fn unbounded() -> Self {
        IngestConfig {
            max_edges: usize::MAX,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_edges == 0 {
            return Err(Error::InvalidParam("max_edges must be at least 1".into()));
        }
        if self.instrumented.is_empty() {
            return Err(Error::InvalidParam(
                "at least one instrumented label is required".into(),
            ));
        }
        Ok(())
    }
}

/// Accumulates edges from consumers to origins, honoring the edge cap.
struct Builder<'a> {
    cfg: &'a IngestConfig,
    graph: DataFlowGraph,
}

impl<'a> Builder<'a> {
    fn new(cfg: &'a IngestConfig) -> Self {
        Builder {
            cfg,
            graph: DataFlowGraph::new(),
        }
    }

    fn full(&self) -> bool {
        self.graph.edge_count() >= self.cfg.max_edges
    }

    /// Records one instrumented execution. Returns false once the cap is hit.
    fn record(
        &mut self,
        consumer: u64,
        label: &Label,
        origins: impl IntoIterator<Item = (u64, Label)>,
    ) -> bool {
        if self.full() {
            return false;
        }
        if !self.graph.contains_vertex(VertexId(consumer)) {
            self.graph.add_vertex(VertexId(consumer), label.clone());
        }
        for (o, l) in origins {
            if self.full() {
                return false;
            }
            if !self.graph.contains_vertex(VertexId(o)) {
                self.graph.add_vertex(VertexId(o), l);
            }
            let (s, d) = self.cfg.direction.edge(consumer, o);
            self.graph.add_edge(s, d);
        }
        !self.full()
    }
}

/// Builds the graph of a resolved trace: one vertex per instrumented event
/// and per origin it references, one edge per distinct (consumer, origin).
pub fn ingest_resolved(
    events: impl IntoIterator<Item = ResolvedEvent>,
    cfg: &IngestConfig,
) -> Result<DataFlowGraph> {
    cfg.validate()?;
    let mut seen: HashMap<u64, Label> = HashMap::new();
    let mut last: Option<u64> = None;
    let mut b = Builder::new(cfg);
    for ev in events {
        if let Some(prev) = last {
            if ev.id <= prev {
                return Err(Error::InvalidGraph(format!(
                    "event ids must increase: {} follows {}",
                    ev.id, prev
                )));
            }
        }
        last = Some(ev.id);
        if let Some(&o) = ev.origins.iter().find(|&&o| o >= ev.id) {
            return Err(Error::OriginNotEarlier {
                event: ev.id,
                origin: o,
            });
        }
        if cfg.instrumented.contains(&ev.opcode) {
            let origins = ev.origins.iter().map(|o| {
                let l = seen.get(o).cloned().unwrap_or_else(Label::other);
                (*o, l)
            });
            if !b.record(ev.id, &ev.opcode, origins) {
                break;
            }
        }
        seen.insert(ev.id, ev.opcode);
    }
    Ok(b.graph)
}

/// Builds the graph of a raw stack trace.
///
/// A shadow stack holds the origin of every operand. Writing a slot starts
/// a new generation holding the written value's origin, so later reads see
/// exactly that origin. Reading a slot that was never written starts a
/// generation whose origin is a fresh `other` vertex (the reading event).
/// Memory is not tracked: loads are ordinary producers.
pub fn ingest_raw(
    events: impl IntoIterator<Item = RawStackEvent>,
    cfg: &IngestConfig,
) -> Result<DataFlowGraph> {
    cfg.validate()?;
    let mut stack: Vec<u64> = Vec::new();
    let mut slots: HashMap<(SlotKind, u32), u64> = HashMap::new();
    let mut origin_label: HashMap<u64, Label> = HashMap::new();
    let mut b = Builder::new(cfg);
    for (k, ev) in events.into_iter().enumerate() {
        let k64 = k as u64;
        let pops = ev.pops as usize;
        if pops > stack.len() {
            return Err(Error::StackUnderflow {
                index: k,
                opcode: ev.opcode.to_string(),
                pops,
                depth: stack.len(),
            });
        }
        let popped = stack.split_off(stack.len() - pops);
        match ev.slot {
            Some(SlotEffect {
                kind,
                index,
                access: Access::Write,
            }) => {
                let Some(&value) = popped.last() else {
                    return Err(Error::InvalidGraph(format!(
                        "event {k}: slot write {} pops nothing",
                        ev.opcode
                    )));
                };
                slots.insert((kind, index), value);
                stack.extend(std::iter::repeat_n(value, ev.pushes as usize));
            }
            Some(SlotEffect {
                kind,
                index,
                access: Access::Read,
            }) => {
                let value = *slots.entry((kind, index)).or_insert_with(|| {
                    origin_label.insert(k64, Label::other());
                    k64
                });
                stack.extend(std::iter::repeat_n(value, ev.pushes as usize));
            }
            None => {
                if cfg.instrumented.contains(&ev.opcode) {
                    let origins = popped.iter().map(|o| {
                        let l = origin_label.get(o).cloned().unwrap_or_else(Label::other);
                        (*o, l)
                    });
                    if !b.record(k64, &ev.opcode, origins) {
                        break;
                    }
                }
                if ev.pushes > 0 {
                    origin_label.insert(k64, ev.opcode.clone());
                    stack.extend(std::iter::repeat_n(k64, ev.pushes as usize));
                }
            }
        }
    }
    Ok(b.graph)
}

/// A parsed trace file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Trace {
    Resolved {
        direction: Direction,
        events: Vec<ResolvedEvent>,
    },
    Raw(Vec<RawStackEvent>),
}

impl Trace {
    /// Ingests with the file's own direction tag for resolved traces.
    pub fn ingest(self, cfg: &IngestConfig) -> Result<DataFlowGraph> {
        match self {
            Trace::Resolved { direction, events } => {
                let cfg = IngestConfig {
                    direction,
                    ..cfg.clone()
                };
                ingest_resolved(events, &cfg)
            }
            Trace::Raw(events) => ingest_raw(events, cfg),
        }
    }
}

pub fn read_trace(reader: impl BufRead) -> Result<Trace> {
    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return Err(Error::parse(0, "empty trace: missing header")),
            Some((_, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
        }
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&TRACE_MAGIC) {
        return Err(Error::parse(1, format!("expected {TRACE_MAGIC} header")));
    }
    let version = fields.get(1).copied().unwrap_or("");
    if version != TRACE_VERSION {
        return Err(Error::Version {
            found: version.to_string(),
            expected: TRACE_VERSION.to_string(),
        });
    }
    match fields.get(2).copied() {
        Some("resolved") => {
            let mut direction = Direction::ConsumerToOperand;
            for f in &fields[3..] {
                if let Some(tag) = f.strip_prefix("dir=") {
                    direction = tag.parse()?;
                }
            }
            let mut events = Vec::new();
            for (n, line) in lines {
                let line = line?;
                if let Some(ev) = parse_resolved_line(&line, n + 1)? {
                    events.push(ev);
                }
            }
            Ok(Trace::Resolved { direction, events })
        }
        Some("raw") => {
            let mut events = Vec::new();
            for (n, line) in lines {
                let line = line?;
                if let Some(ev) = parse_raw_line(&line, n + 1)? {
                    events.push(ev);
                }
            }
            Ok(Trace::Raw(events))
        }
        other => Err(Error::parse(
            1,
            format!("unknown trace kind {:?}", other.unwrap_or("")),
        )),
    }
}

fn skip(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

fn parse_resolved_line(line: &str, n: usize) -> Result<Option<ResolvedEvent>> {
    if skip(line) {
        return Ok(None);
    }
    let mut it = line.split_whitespace();
    if it.next() != Some("EVENT") {
        return Err(Error::parse(n, "expected EVENT record"));
    }
    let id = parse_u64(it.next(), n, "event id")?;
    let opcode = it
        .next()
        .ok_or_else(|| Error::parse(n, "missing opcode"))
        .and_then(|s| Label::new(s).map_err(|e| Error::parse(n, e.to_string())))?;
    let origins = it
        .map(|s| parse_u64(Some(s), n, "origin id"))
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(ResolvedEvent { id, opcode, origins }))
}

fn parse_raw_line(line: &str, n: usize) -> Result<Option<RawStackEvent>> {
    if skip(line) {
        return Ok(None);
    }
    let f: Vec<&str> = line.split_whitespace().collect();
    if f.first() != Some(&"OP") {
        return Err(Error::parse(n, "expected OP record"));
    }
    let opcode = f
        .get(1)
        .ok_or_else(|| Error::parse(n, "missing opcode"))
        .and_then(|s| Label::new(s).map_err(|e| Error::parse(n, e.to_string())))?;
    let count = |i: usize, key: &str| -> Result<u32> {
        f.get(i)
            .and_then(|s| s.strip_prefix(key))
            .and_then(|s| s.strip_prefix('='))
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(n, format!("expected {key}=<count>")))
    };
    let pops = count(2, "pops")?;
    let pushes = count(3, "pushes")?;
    let slot = match f.len() {
        4 => None,
        7 => {
            let kind = match f[4] {
                "local" => SlotKind::Local,
                "global" => SlotKind::Global,
                other => return Err(Error::parse(n, format!("unknown slot kind {other:?}"))),
            };
            let index = f[5]
                .parse()
                .map_err(|_| Error::parse(n, format!("bad slot index {:?}", f[5])))?;
            let access = match f[6] {
                "read" => Access::Read,
                "write" => Access::Write,
                other => return Err(Error::parse(n, format!("unknown slot access {other:?}"))),
            };
            Some(SlotEffect {
                kind,
                index,
                access,
            })
        }
        _ => return Err(Error::parse(n, "wrong number of fields")),
    };
    Ok(Some(RawStackEvent {
        opcode,
        pops,
        pushes,
        slot,
    }))
}

fn parse_u64(s: Option<&str>, n: usize, what: &str) -> Result<u64> {
    s.ok_or_else(|| Error::parse(n, format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::parse(n, format!("bad {what}")))
}

pub fn write_resolved(
    mut w: impl Write,
    events: &[ResolvedEvent],
    direction: Direction,
) -> Result<()> {
    writeln!(w, "{TRACE_MAGIC} {TRACE_VERSION} resolved dir={direction}")?;
    for ev in events {
        write!(w, "EVENT {} {}", ev.id, ev.opcode)?;
        for o in &ev.origins {
            write!(w, " {o}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_raw(mut w: impl Write, events: &[RawStackEvent]) -> Result<()> {
    writeln!(w, "{TRACE_MAGIC} {TRACE_VERSION} raw")?;
    for ev in events {
        write!(w, "OP {} pops={} pushes={}", ev.opcode, ev.pops, ev.pushes)?;
        if let Some(s) = ev.slot {
            let kind = match s.kind {
                SlotKind::Local => "local",
                SlotKind::Global => "global",
            };
            let access = match s.access {
                Access::Read => "read",
                Access::Write => "write",
            };
            write!(w, " {kind} {} {access}", s.index)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lab(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn ev(id: u64, op: &str, origins: &[u64]) -> ResolvedEvent {
        ResolvedEvent {
            id,
            opcode: lab(op),
            origins: origins.to_vec(),
        }
    }

    fn edges(g: &DataFlowGraph) -> Vec<(u64, u64)> {
        g.edges().map(|(s, d)| (s.0, d.0)).collect()
    }

    #[test]
    fn duplicate_origins_are_deduplicated() {
        let g = ingest_resolved(
            vec![ev(1, "other", &[]), ev(2, "xor", &[1, 1])],
            &IngestConfig::default(),
        )
        .unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(edges(&g), vec![(2, 1)]);
        assert_eq!(g.label(VertexId(1)).unwrap().as_str(), "other");
    }

    #[test]
    fn instrumented_chain_forms_path() {
        let g = ingest_resolved(
            vec![ev(1, "i32.const", &[]), ev(2, "xor", &[1]), ev(3, "and", &[2])],
            &IngestConfig::default(),
        )
        .unwrap();
        assert_eq!(edges(&g), vec![(2, 1), (3, 2)]);
        assert_eq!(g.label(VertexId(1)).unwrap().as_str(), "i32.const");
    }

    #[test]
    fn unseen_origin_is_labeled_other() {
        let g = ingest_resolved(vec![ev(5, "shr", &[2])], &IngestConfig::default()).unwrap();
        assert_eq!(g.label(VertexId(2)).unwrap().as_str(), "other");
    }

    #[test]
    fn edge_cap_stops_ingestion() {
        let events: Vec<_> = (1..50).map(|i| ev(i, "xor", &[i - 1])).collect();
        let cfg = IngestConfig {
            max_edges: 1,
            ..IngestConfig::default()
        };
        let g = ingest_resolved(events, &cfg).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn origin_must_precede_consumer() {
        let err = ingest_resolved(vec![ev(3, "xor", &[3])], &IngestConfig::default());
        assert!(matches!(err, Err(Error::OriginNotEarlier { event: 3, origin: 3 })));
    }

    #[test]
    fn reversed_direction() {
        let cfg = IngestConfig {
            direction: Direction::OperandToConsumer,
            ..IngestConfig::default()
        };
        let g = ingest_resolved(vec![ev(1, "a", &[]), ev(2, "xor", &[1])], &cfg).unwrap();
        assert_eq!(edges(&g), vec![(1, 2)]);
    }

    fn konst() -> RawStackEvent {
        RawStackEvent::op("i32.const", 0, 1).unwrap()
    }

    fn binop(op: &str) -> RawStackEvent {
        RawStackEvent::op(op, 2, 1).unwrap()
    }

    #[test]
    fn shadow_stack_const_const_xor() {
        let g = ingest_raw(vec![konst(), konst(), binop("xor")], &IngestConfig::default()).unwrap();
        assert_eq!(edges(&g), vec![(2, 0), (2, 1)]);
        assert_eq!(g.label(VertexId(0)).unwrap().as_str(), "i32.const");
    }

    #[test]
    fn one_generation_read_twice() {
        let trace = vec![
            konst(),
            RawStackEvent::local_set(0),
            RawStackEvent::local_get(0),
            RawStackEvent::local_get(0),
            binop("and"),
        ];
        let g = ingest_raw(trace, &IngestConfig::default()).unwrap();
        assert_eq!(edges(&g), vec![(4, 0)]);
    }

    #[test]
    fn two_generations_split() {
        let trace = vec![
            konst(),
            RawStackEvent::local_set(0),
            RawStackEvent::local_get(0),
            konst(),
            RawStackEvent::local_set(0),
            RawStackEvent::local_get(0),
            binop("xor"),
        ];
        let g = ingest_raw(trace, &IngestConfig::default()).unwrap();
        assert_eq!(edges(&g), vec![(6, 0), (6, 3)]);
    }

    #[test]
    fn unwritten_slot_yields_fresh_other_origin() {
        let trace = vec![
            RawStackEvent::global_get(3),
            RawStackEvent::global_get(3),
            binop("xor"),
        ];
        let g = ingest_raw(trace, &IngestConfig::default()).unwrap();
        assert_eq!(edges(&g), vec![(2, 0)]);
        assert_eq!(g.label(VertexId(0)).unwrap().as_str(), "other");
    }

    #[test]
    fn tee_pushes_written_value() {
        let trace = vec![
            konst(),
            RawStackEvent::local_tee(1),
            RawStackEvent::local_get(1),
            binop("and"),
        ];
        let g = ingest_raw(trace, &IngestConfig::default()).unwrap();
        assert_eq!(edges(&g), vec![(3, 0)]);
    }

    #[test]
    fn underflow_reports_index() {
        let err = ingest_raw(vec![konst(), binop("xor")], &IngestConfig::default()).unwrap_err();
        assert!(matches!(err, Error::StackUnderflow { index: 1, .. }));
    }

    #[test]
    fn uninstrumented_ops_cut_flow() {
        // const const add, const, xor: xor sees the add as a leaf origin.
        let trace = vec![konst(), konst(), binop("i32.add"), konst(), binop("xor")];
        let g = ingest_raw(trace, &IngestConfig::default()).unwrap();
        assert_eq!(edges(&g), vec![(4, 2), (4, 3)]);
        assert_eq!(g.label(VertexId(2)).unwrap().as_str(), "i32.add");
    }

    #[test]
    fn text_formats_round_trip() {
        let events = vec![ev(1, "i32.const", &[]), ev(2, "xor", &[1, 1])];
        let mut buf = Vec::new();
        write_resolved(&mut buf, &events, Direction::ConsumerToOperand).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("#dfgtrace v1 resolved dir=consumer-to-operand\n"));
        assert_eq!(
            read_trace(&buf[..]).unwrap(),
            Trace::Resolved {
                direction: Direction::ConsumerToOperand,
                events
            }
        );

        let raw = vec![konst(), RawStackEvent::local_tee(2), binop("and")];
        let mut buf = Vec::new();
        write_raw(&mut buf, &raw).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("OP local.tee pops=1 pushes=1 local 2 write\n"));
        assert_eq!(read_trace(&buf[..]).unwrap(), Trace::Raw(raw));
    }

    #[test]
    fn bad_headers_and_lines() {
        assert!(matches!(
            read_trace(&b"#dfgtrace v2 raw\n"[..]),
            Err(Error::Version { .. })
        ));
        assert!(matches!(
            read_trace(&b"hello\n"[..]),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_trace(&b"#dfgtrace v1 raw\nOP xor pops=two pushes=1\n"[..]),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_trace(&b"#dfgtrace v1 resolved\nEVENT x xor\n"[..]),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
