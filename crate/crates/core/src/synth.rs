// SPDX-License-Identifier: Apache-2.0

//! Synthetic raw traces and trace-level obfuscation.
//!
//! Workloads are written as straight-line statements over locals, globals
//! and memory. Every statement leaves the operand stack empty. The generator
//! tracks value provenance itself (from the expression trees and its own
//! slot map, without a shadow stack), so the graph it returns can be used to
//! check [`crate::trace::ingest_raw`].
//!
//! Miner kinds run `rounds` independent copies of a fixed and/xor/shr mixing
//! block over shared block words and a per-round nonce. Benign kinds are a
//! small image convolution (mostly multiply/add), a bitwise CRC (one long
//! dependency chain) and random arithmetic without instrumented opcodes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DataFlowGraph, Label, VertexId};
use crate::rng::{substream, StreamRng};
use crate::trace::{Access, RawStackEvent, SlotEffect, SlotKind, DEFAULT_INSTRUMENTED};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WorkloadKind {
    MinerSha2like,
    MinerMixrounds,
    BenignConvolution,
    BenignChecksum,
    BenignRandom,
}

impl WorkloadKind {
    pub const ALL: [WorkloadKind; 5] = [
        WorkloadKind::MinerSha2like,
        WorkloadKind::MinerMixrounds,
        WorkloadKind::BenignConvolution,
        WorkloadKind::BenignChecksum,
        WorkloadKind::BenignRandom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WorkloadKind::MinerSha2like => "miner-sha2like",
            WorkloadKind::MinerMixrounds => "miner-mixrounds",
            WorkloadKind::BenignConvolution => "benign-convolution",
            WorkloadKind::BenignChecksum => "benign-checksum",
            WorkloadKind::BenignRandom => "benign-random",
        }
    }

    pub fn is_miner(self) -> bool {
        matches!(self, WorkloadKind::MinerSha2like | WorkloadKind::MinerMixrounds)
    }
}

impl fmt::Display for WorkloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WorkloadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WorkloadKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = WorkloadKind::ALL.iter().map(|k| k.name()).collect();
                Error::InvalidParam(format!(
                    "unknown workload kind {s:?} (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub kind: WorkloadKind,
    pub rounds: u32,
    pub seed: u64,
    /// Probability of a spurious instrumented statement after each statement.
    pub noise_rate: f64,
}

impl WorkloadSpec {
    pub fn new(kind: WorkloadKind, rounds: u32, seed: u64) -> Self {
        WorkloadSpec {
            kind,
            rounds,
            seed,
            noise_rate: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::InvalidParam("rounds must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.noise_rate) {
            return Err(Error::InvalidParam(format!(
                "noise_rate must lie in [0, 1), got {}",
                self.noise_rate
            )));
        }
        Ok(())
    }
}

/// A generated trace and the data-flow graph its values actually have.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedTrace {
    pub events: Vec<RawStackEvent>,
    pub truth: DataFlowGraph,
}

// Immediates are kept for readability only; raw traces do not record them.
#[allow(dead_code)]
#[derive(Clone, Debug)]
enum Expr {
    Const(i32),
    Local(u32),
    Global(u32),
    /// Load from a constant address.
    Load(&'static str, i32),
    Bin(&'static str, Box<Expr>, Box<Expr>),
}

use Expr::{Const, Global, Local};

fn bin(op: &'static str, a: Expr, b: Expr) -> Expr {
    Expr::Bin(op, Box::new(a), Box::new(b))
}
fn x(a: Expr, b: Expr) -> Expr {
    bin("xor", a, b)
}
fn and(a: Expr, b: Expr) -> Expr {
    bin("and", a, b)
}
fn shr(a: Expr, k: i32) -> Expr {
    bin("shr", a, Const(k))
}
fn add(a: Expr, b: Expr) -> Expr {
    bin("i32.add", a, b)
}
fn mul(a: Expr, b: Expr) -> Expr {
    bin("i32.mul", a, b)
}
fn load(addr: i32) -> Expr {
    Expr::Load("i32.load", addr)
}

fn ev(opcode: &str, pops: u32, pushes: u32) -> RawStackEvent {
    RawStackEvent::op(opcode, pops, pushes).expect("static opcode is a valid label")
}

struct Emitter {
    events: Vec<RawStackEvent>,
    truth: DataFlowGraph,
    instrumented: BTreeSet<&'static str>,
    opcode_of: HashMap<u64, Label>,
    slots: BTreeMap<(SlotKind, u32), u64>,
    rng: StreamRng,
    noise_rate: f64,
}

impl Emitter {
    fn new(spec: &WorkloadSpec) -> Self {
        Emitter {
            events: Vec::new(),
            truth: DataFlowGraph::new(),
            instrumented: DEFAULT_INSTRUMENTED.into_iter().collect(),
            opcode_of: HashMap::new(),
            slots: BTreeMap::new(),
            rng: substream(spec.seed, 0),
            noise_rate: spec.noise_rate,
        }
    }

    fn push(&mut self, e: RawStackEvent) -> u64 {
        let at = self.events.len() as u64;
        self.opcode_of.insert(at, e.opcode.clone());
        self.events.push(e);
        at
    }

    fn slot(&self, kind: SlotKind, index: u32) -> u64 {
        *self
            .slots
            .get(&(kind, index))
            .unwrap_or_else(|| panic!("generator reads {kind:?} {index} before writing it"))
    }

    /// Emits `e` and returns the origin of its value.
    fn eval(&mut self, e: &Expr) -> u64 {
        match e {
            Const(_) => self.push(ev("i32.const", 0, 1)),
            Local(i) => {
                self.push(RawStackEvent::local_get(*i));
                self.slot(SlotKind::Local, *i)
            }
            Global(i) => {
                self.push(RawStackEvent::global_get(*i));
                self.slot(SlotKind::Global, *i)
            }
            Expr::Load(op, _) => {
                self.push(ev("i32.const", 0, 1));
                self.push(ev(op, 1, 1))
            }
            Expr::Bin(op, a, b) => {
                let oa = self.eval(a);
                let ob = self.eval(b);
                let at = self.push(ev(op, 2, 1));
                if self.instrumented.contains(op) {
                    self.truth.add_vertex(VertexId(at), Label::new(op).unwrap());
                    for o in [oa, ob] {
                        let l = self.opcode_of[&o].clone();
                        self.truth.add_vertex(VertexId(o), l);
                        self.truth.add_edge(VertexId(at), VertexId(o));
                    }
                }
                at
            }
        }
    }

    fn set_local(&mut self, i: u32, e: Expr) {
        let o = self.eval(&e);
        self.push(RawStackEvent::local_set(i));
        self.slots.insert((SlotKind::Local, i), o);
        self.end_statement();
    }

    /// `local.tee` followed by `drop`.
    fn tee_local(&mut self, i: u32, e: Expr) {
        let o = self.eval(&e);
        self.push(RawStackEvent::local_tee(i));
        self.push(ev("drop", 1, 0));
        self.slots.insert((SlotKind::Local, i), o);
        self.end_statement();
    }

    fn set_global(&mut self, i: u32, e: Expr) {
        let o = self.eval(&e);
        self.push(RawStackEvent::global_set(i));
        self.slots.insert((SlotKind::Global, i), o);
        self.end_statement();
    }

    fn store(&mut self, addr: i32, e: Expr) {
        self.eval(&Const(addr));
        self.eval(&e);
        self.push(ev("i32.store", 2, 0));
        self.end_statement();
    }

    /// Compares against `target` and discards the flag.
    fn check(&mut self, e: Expr, target: Expr) {
        self.eval(&bin("i32.lt_u", e, target));
        self.push(ev("drop", 1, 0));
        self.end_statement();
    }

    fn end_statement(&mut self) {
        if self.noise_rate > 0.0 && self.rng.random_bool(self.noise_rate) {
            self.noise();
        }
    }

    /// An instrumented operation on two written locals whose result is dropped.
    fn noise(&mut self) {
        let written: Vec<u32> = self
            .slots
            .keys()
            .filter(|k| k.0 == SlotKind::Local)
            .map(|k| k.1)
            .collect();
        let pick = |rng: &mut StreamRng| {
            if written.is_empty() {
                Const(rng.random_range(0..256))
            } else {
                Local(written[rng.random_range(0..written.len())])
            }
        };
        let a = pick(&mut self.rng);
        let b = pick(&mut self.rng);
        let op = DEFAULT_INSTRUMENTED[self.rng.random_range(0..DEFAULT_INSTRUMENTED.len())];
        self.eval(&bin(op, a, b));
        self.push(ev("drop", 1, 0));
    }
}

/// Block words live in locals `0..8`, scratch values in `8..16`, the nonce
/// in global 0.
fn miner_prologue(em: &mut Emitter) {
    for w in 0..8 {
        em.set_local(w, load(4 * w as i32));
    }
    em.set_global(0, Const(0));
}

fn next_nonce(em: &mut Emitter) {
    em.set_global(0, add(Global(0), Const(1)));
}

fn mixrounds_round(em: &mut Emitter) {
    next_nonce(em);
    em.set_local(8, x(Local(0), Global(0)));
    em.set_local(9, x(Local(1), shr(Local(8), 5)));
    em.set_local(10, x(and(Local(2), Local(9)), shr(Local(8), 3)));
    em.set_local(11, and(x(Local(10), Local(3)), x(Local(9), shr(Local(10), 11))));
    em.tee_local(8, x(shr(Local(11), 7), and(Local(8), Local(4))));
    em.set_local(9, and(x(Local(8), Local(9)), x(Local(5), shr(Local(11), 2))));
    em.check(x(x(Local(9), Local(8)), and(Local(10), Local(6))), Local(7));
}

fn sha2like_round(em: &mut Emitter) {
    next_nonce(em);
    let sigma = |v: u32, r: [i32; 3]| x(x(shr(Local(v), r[0]), shr(Local(v), r[1])), shr(Local(v), r[2]));
    em.set_local(8, x(Local(4), Global(0)));
    em.set_local(9, sigma(8, [6, 11, 25]));
    em.set_local(
        10,
        x(and(Local(8), Local(5)), and(x(Local(8), Const(-1)), Local(6))),
    );
    em.set_local(11, x(x(Local(7), Local(9)), Local(10)));
    em.set_local(12, sigma(0, [2, 13, 22]));
    em.set_local(
        13,
        x(x(and(Local(0), Local(1)), and(Local(0), Local(2))), and(Local(1), Local(2))),
    );
    em.check(x(Local(11), x(Local(12), Local(13))), Local(3));
}

fn convolution(em: &mut Emitter, rounds: u32) {
    let kernel = [3, 5, 3];
    for p in 0..rounds as i32 {
        let taps: Vec<Expr> = (0..3)
            .map(|t| mul(load(1024 + 4 * (p + t)), Const(kernel[t as usize])))
            .collect();
        let [a, b, c]: [Expr; 3] = taps.try_into().unwrap();
        em.set_local(0, add(add(a, b), c));
        // Edge pixels are clamped without normalization.
        let v = if p == 0 || em.rng.random_bool(0.1) {
            and(Local(0), Const(255))
        } else {
            and(shr(Local(0), 4), Const(255))
        };
        em.store(8192 + 4 * p, v);
    }
}

fn checksum(em: &mut Emitter, rounds: u32) {
    const POLY: i32 = 0xEDB8_8320_u32 as i32;
    em.set_local(0, Const(-1));
    for i in 0..rounds as i32 {
        em.set_local(0, x(Local(0), Expr::Load("i32.load8_u", 2048 + i)));
        for _ in 0..8 {
            em.set_local(1, bin("i32.sub", Const(0), and(Local(0), Const(1))));
            em.set_local(0, x(shr(Local(0), 1), and(Const(POLY), Local(1))));
        }
    }
    em.store(4096, x(Local(0), Const(-1)));
}

fn random_arith(em: &mut Emitter, rounds: u32) {
    const OPS: [&str; 5] = ["i32.add", "i32.sub", "i32.mul", "i32.or", "i32.rotl"];
    for i in 0..8 {
        let c = em.rng.random_range(0..1 << 16);
        em.set_local(i, Const(c));
    }
    fn tree(rng: &mut StreamRng, depth: u32) -> Expr {
        if depth == 0 || rng.random_bool(0.3) {
            return if rng.random_bool(0.7) {
                Local(rng.random_range(0..8))
            } else {
                Const(rng.random_range(0..1 << 16))
            };
        }
        let op = OPS[rng.random_range(0..OPS.len())];
        bin(op, tree(rng, depth - 1), tree(rng, depth - 1))
    }
    for _ in 0..rounds {
        let e = tree(&mut em.rng, 3);
        let dst = em.rng.random_range(0..8);
        em.set_local(dst, e);
    }
}

/// Generates the raw event stream of `spec` and its ground-truth graph.
pub fn gen_trace(spec: &WorkloadSpec) -> Result<GeneratedTrace> {
    spec.validate()?;
    let mut em = Emitter::new(spec);
    match spec.kind {
        WorkloadKind::MinerSha2like | WorkloadKind::MinerMixrounds => {
            miner_prologue(&mut em);
            for _ in 0..spec.rounds {
                if spec.kind == WorkloadKind::MinerSha2like {
                    sha2like_round(&mut em);
                } else {
                    mixrounds_round(&mut em);
                }
            }
        }
        WorkloadKind::BenignConvolution => convolution(&mut em, spec.rounds),
        WorkloadKind::BenignChecksum => checksum(&mut em, spec.rounds),
        WorkloadKind::BenignRandom => random_arith(&mut em, spec.rounds),
    }
    Ok(GeneratedTrace {
        events: em.events,
        truth: em.truth,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Substitute,
    Split,
    FlattenNoise,
    Interleave,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Substitute,
        Strategy::Split,
        Strategy::FlattenNoise,
        Strategy::Interleave,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Substitute => "substitute",
            Strategy::Split => "split",
            Strategy::FlattenNoise => "flatten-noise",
            Strategy::Interleave => "interleave",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParam(format!("unknown obfuscation strategy {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObfuscationSpec {
    pub strategy: Strategy,
    pub seed: u64,
    /// Per-site probability for `split` and `flatten-noise`; unused otherwise.
    pub rate: f64,
}

impl ObfuscationSpec {
    pub fn new(strategy: Strategy, seed: u64) -> Self {
        ObfuscationSpec {
            strategy,
            seed,
            rate: 0.2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rate) {
            return Err(Error::InvalidParam(format!(
                "obfuscation rate must lie in [0, 1], got {}",
                self.rate
            )));
        }
        Ok(())
    }
}

/// An obfuscated trace; `origin[i]` is the input position event `i` was
/// copied from, or `None` for inserted events.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obfuscated {
    pub events: Vec<RawStackEvent>,
    pub origin: Vec<Option<usize>>,
}

/// Scratch locals used by `substitute`; far above anything the generator uses.
pub const SCRATCH_LOCALS: [u32; 2] = [u32::MAX - 1, u32::MAX];

/// Checks that no event pops more operands than the stack holds.
pub fn check_stack(events: &[RawStackEvent]) -> Result<()> {
    let mut depth = 0usize;
    for (i, e) in events.iter().enumerate() {
        if e.pops as usize > depth {
            return Err(Error::StackUnderflow {
                index: i,
                opcode: e.opcode.to_string(),
                pops: e.pops as usize,
                depth,
            });
        }
        depth = depth - e.pops as usize + e.pushes as usize;
    }
    Ok(())
}

fn is_plain(e: &RawStackEvent) -> bool {
    e.slot.is_none()
}

struct Out {
    events: Vec<RawStackEvent>,
    origin: Vec<Option<usize>>,
}

impl Out {
    fn keep(&mut self, i: usize, e: &RawStackEvent) {
        self.events.push(e.clone());
        self.origin.push(Some(i));
    }
    fn insert(&mut self, e: RawStackEvent) {
        self.events.push(e);
        self.origin.push(None);
    }
}

/// Applies one trace-level obfuscation. The input must be stack-consistent;
/// so is the output.
pub fn obfuscate_trace(events: &[RawStackEvent], spec: &ObfuscationSpec) -> Result<Obfuscated> {
    spec.validate()?;
    check_stack(events)?;
    let mut rng = substream(spec.seed, 1);
    let mut out = Out {
        events: Vec::with_capacity(events.len()),
        origin: Vec::with_capacity(events.len()),
    };
    let instrumented: BTreeSet<&str> = DEFAULT_INSTRUMENTED.into_iter().collect();
    match spec.strategy {
        Strategy::Substitute => {
            // a ^ b == (a | b) & (-1 - (a & b))
            let [ta, tb] = SCRATCH_LOCALS;
            for (i, e) in events.iter().enumerate() {
                if e.opcode.as_str() == "xor" && e.pops == 2 && e.pushes == 1 && is_plain(e) {
                    out.insert(RawStackEvent::local_set(tb));
                    out.insert(RawStackEvent::local_set(ta));
                    out.insert(RawStackEvent::local_get(ta));
                    out.insert(RawStackEvent::local_get(tb));
                    out.insert(ev("i32.or", 2, 1));
                    out.insert(ev("i32.const", 0, 1));
                    out.insert(RawStackEvent::local_get(ta));
                    out.insert(RawStackEvent::local_get(tb));
                    out.insert(ev("and", 2, 1));
                    out.insert(ev("i32.sub", 2, 1));
                    out.events.push(ev("and", 2, 1));
                    out.origin.push(Some(i));
                } else {
                    out.keep(i, e);
                }
            }
        }
        Strategy::Split => {
            for (i, e) in events.iter().enumerate() {
                if instrumented.contains(e.opcode.as_str())
                    && e.pops >= 1
                    && is_plain(e)
                    && rng.random_bool(spec.rate)
                {
                    out.insert(ev("i32.const", 0, 1));
                    out.insert(ev("and", 2, 1));
                }
                out.keep(i, e);
            }
        }
        Strategy::FlattenNoise => {
            let mut depth = 0usize;
            let mut written: BTreeSet<u32> = BTreeSet::new();
            for (i, e) in events.iter().enumerate() {
                out.keep(i, e);
                depth = depth - e.pops as usize + e.pushes as usize;
                if let Some(SlotEffect {
                    kind: SlotKind::Local,
                    index,
                    access: Access::Write,
                }) = e.slot
                {
                    written.insert(index);
                }
                if depth == 0 && spec.rate > 0.0 && rng.random_bool(spec.rate) {
                    let pool: Vec<u32> = written.iter().copied().collect();
                    for _ in 0..2 {
                        if pool.is_empty() {
                            out.insert(ev("i32.const", 0, 1));
                        } else {
                            out.insert(RawStackEvent::local_get(
                                pool[rng.random_range(0..pool.len())],
                            ));
                        }
                    }
                    let op = DEFAULT_INSTRUMENTED[rng.random_range(0..DEFAULT_INSTRUMENTED.len())];
                    out.insert(ev(op, 2, 1));
                    out.insert(ev("drop", 1, 0));
                }
            }
        }
        Strategy::Interleave => {
            for i in interleave_order(events, &mut rng)? {
                out.keep(i, &events[i]);
            }
        }
    }
    check_stack(&out.events)?;
    Ok(Obfuscated {
        events: out.events,
        origin: out.origin,
    })
}

/// Resources a statement touches; memory is one shared resource.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Resource {
    Slot(SlotKind, u32),
    Memory,
}

fn is_memory(op: &str) -> bool {
    op.contains(".load") || op.contains(".store")
}

/// A random order of the input positions that keeps every statement
/// (maximal stack-balanced run) contiguous and respects read/write hazards
/// on slots and memory.
fn interleave_order(events: &[RawStackEvent], rng: &mut StreamRng) -> Result<Vec<usize>> {
    let mut statements: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    let mut depth = 0usize;
    for (i, e) in events.iter().enumerate() {
        depth = depth - e.pops as usize + e.pushes as usize;
        if depth == 0 {
            statements.push((start, i + 1));
            start = i + 1;
        }
    }
    if start < events.len() {
        statements.push((start, events.len()));
    }

    let n = statements.len();
    let mut preds: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut last_write: BTreeMap<Resource, usize> = BTreeMap::new();
    let mut reads_since: BTreeMap<Resource, Vec<usize>> = BTreeMap::new();
    for (s, &(a, b)) in statements.iter().enumerate() {
        let mut reads = BTreeSet::new();
        let mut writes = BTreeSet::new();
        for e in &events[a..b] {
            match e.slot {
                Some(SlotEffect { kind, index, access }) => {
                    let r = Resource::Slot(kind, index);
                    match access {
                        Access::Read => reads.insert(r),
                        Access::Write => writes.insert(r),
                    };
                }
                None if is_memory(e.opcode.as_str()) => {
                    if e.opcode.as_str().contains(".store") {
                        writes.insert(Resource::Memory);
                    } else {
                        reads.insert(Resource::Memory);
                    }
                }
                None => {}
            }
        }
        for r in &reads {
            if let Some(&w) = last_write.get(r) {
                preds[s].insert(w);
            }
        }
        for r in &writes {
            if let Some(&w) = last_write.get(r) {
                preds[s].insert(w);
            }
            for &q in reads_since.get(r).into_iter().flatten() {
                if q != s {
                    preds[s].insert(q);
                }
            }
        }
        for r in reads {
            reads_since.entry(r).or_default().push(s);
        }
        for r in writes {
            last_write.insert(r, s);
            reads_since.remove(&r);
        }
    }
    // A trailing unbalanced run stays last.
    let tail = (depth != 0).then_some(n - 1);
    if let Some(t) = tail {
        preds[t] = (0..t).collect();
    }

    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut missing: Vec<usize> = vec![0; n];
    for (s, p) in preds.iter().enumerate() {
        missing[s] = p.len();
        for &q in p {
            succs[q].push(s);
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&s| missing[s] == 0).collect();
    let mut order = Vec::with_capacity(events.len());
    let mut placed = 0;
    while !ready.is_empty() {
        let s = ready.swap_remove(rng.random_range(0..ready.len()));
        placed += 1;
        order.extend(statements[s].0..statements[s].1);
        for &t in &succs[s] {
            missing[t] -= 1;
            if missing[t] == 0 {
                ready.push(t);
            }
        }
    }
    if placed != n {
        return Err(Error::InvalidGraph(
            "interleave: statement dependencies are cyclic".into(),
        ));
    }
    Ok(order)
}
