// SPDX-License-Identifier: Apache-2.0

//! C interface to `dfgprint`.
//!
//! Graphs are opaque `DfgGraph` handles created by the library and released
//! with [`dfg_graph_free`]. Every fallible call returns a [`DfgStatus`]; on
//! failure [`dfg_last_error`] describes what went wrong on the calling
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dfgprint::fingerprint::{creation_time, read_fingerprint, write_fingerprint, FingerprintMeta, FingerprintRecord};
use dfgprint::fis::{nfis, FisParams};
use dfgprint::simplify::{approx_simplify, exact_simplify, SimplifyParams};
use dfgprint::trace::{read_trace, IngestConfig};
use dfgprint::{DataFlowGraph, Error, Label, VertexId};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DfgStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    InvalidGraph = 3,
    Parse = 4,
    Io = 5,
    SizeGuard = 6,
    NoEdges = 7,
    Panic = 8,
}

/// Opaque graph handle.
pub struct DfgGraph {
    inner: DataFlowGraph,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DfgStatus {
    match e {
        Error::Cycle { .. }
        | Error::SelfLoop(_)
        | Error::UnknownVertex(_)
        | Error::InvalidGraph(_)
        | Error::InvalidLabel(_) => DfgStatus::InvalidGraph,
        Error::Parse { .. } | Error::Version { .. } | Error::Checksum { .. } | Error::Json(_) => {
            DfgStatus::Parse
        }
        Error::Io(_) | Error::File { .. } => DfgStatus::Io,
        Error::SizeGuard { .. } => DfgStatus::SizeGuard,
        Error::NoEdges => DfgStatus::NoEdges,
        _ => DfgStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (DfgStatus, String)>) -> DfgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            DfgStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            DfgStatus::Panic
        }
    }
}

fn lib(e: Error) -> (DfgStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (DfgStatus, String) {
    (DfgStatus::NullArgument, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (DfgStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (DfgStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn graph_arg<'a>(g: *const DfgGraph, what: &str) -> Result<&'a DataFlowGraph, (DfgStatus, String)> {
    g.as_ref().map(|g| &g.inner).ok_or_else(|| null(what))
}

unsafe fn emit(out: *mut *mut DfgGraph, g: DataFlowGraph) {
    *out = Box::into_raw(Box::new(DfgGraph { inner: g }));
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn dfg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates an empty graph.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dfg_graph_new(out: *mut *mut DfgGraph) -> DfgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        emit(out, DataFlowGraph::new());
        Ok(())
    })
}

/// Releases a graph. Null is ignored.
///
/// # Safety
/// `g` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dfg_graph_free(g: *mut DfgGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Adds or relabels a vertex.
///
/// # Safety
/// `g` must be a live handle and `label` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dfg_graph_add_vertex(g: *mut DfgGraph, id: u64, label: *const c_char) -> DfgStatus {
    guard(|| {
        let g = g.as_mut().ok_or_else(|| null("graph"))?;
        let label = Label::new(str_arg(label, "label")?).map_err(lib)?;
        g.inner.add_vertex(VertexId(id), label);
        Ok(())
    })
}

/// Adds the edge `src -> dst`; both vertices must exist. Cycles are reported
/// by the operations that need a DAG.
///
/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dfg_graph_add_edge(g: *mut DfgGraph, src: u64, dst: u64) -> DfgStatus {
    guard(|| {
        let g = g.as_mut().ok_or_else(|| null("graph"))?;
        for v in [src, dst] {
            if !g.inner.contains_vertex(VertexId(v)) {
                return Err(lib(Error::UnknownVertex(VertexId(v))));
            }
        }
        if src == dst {
            return Err(lib(Error::SelfLoop(VertexId(src))));
        }
        g.inner.add_edge(VertexId(src), VertexId(dst));
        Ok(())
    })
}

/// Number of vertices; 0 for null.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dfg_graph_vertex_count(g: *const DfgGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.vertex_count())
}

/// Number of edges; 0 for null.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dfg_graph_edge_count(g: *const DfgGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.edge_count())
}

/// Checks the graph invariants (acyclic, no self-loops, no dangling edges).
///
/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dfg_graph_check(g: *const DfgGraph) -> DfgStatus {
    guard(|| graph_arg(g, "graph")?.check().map_err(lib))
}

/// Reads a fingerprint file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dfg_graph_read(path: *const c_char, out: *mut *mut DfgGraph) -> DfgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let rec = read_fingerprint(str_arg(path, "path")?).map_err(lib)?;
        emit(out, rec.graph);
        Ok(())
    })
}

/// Writes a graph as a fingerprint file named `name`.
///
/// # Safety
/// `g` must be a live handle; `path` and `name` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn dfg_graph_write(g: *const DfgGraph, path: *const c_char, name: *const c_char) -> DfgStatus {
    guard(|| {
        let g = graph_arg(g, "graph")?;
        let rec = FingerprintRecord::new(
            g.clone(),
            FingerprintMeta {
                name: str_arg(name, "name")?.to_string(),
                source: "ffi".into(),
                params: "unspecified".into(),
                created: creation_time(),
                ..FingerprintMeta::default()
            },
        );
        write_fingerprint(&rec, str_arg(path, "path")?).map_err(lib)
    })
}

/// Ingests a trace file with the default instrumented set. `max_edges` of 0
/// means unbounded.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dfg_ingest_trace(path: *const c_char, max_edges: usize, out: *mut *mut DfgGraph) -> DfgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = str_arg(path, "path")?;
        let f = File::open(path).map_err(|e| lib(Error::File { path: path.into(), source: e }))?;
        let cfg = IngestConfig {
            max_edges: if max_edges == 0 { usize::MAX } else { max_edges },
            ..IngestConfig::default()
        };
        let g = read_trace(BufReader::new(f))
            .and_then(|t| t.ingest(&cfg))
            .map_err(lib)?;
        emit(out, g);
        Ok(())
    })
}

/// Simplifies `g` with random walks (`exact_p == 0`) or exact visit
/// probabilities. `walks` of 0 picks the count from the graph size.
///
/// # Safety
/// `g` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dfg_simplify(
    g: *const DfgGraph,
    exact_p: bool,
    walks: u64,
    seed: u64,
    fixpoint: bool,
    out: *mut *mut DfgGraph,
) -> DfgStatus {
    guard(|| {
        let g = graph_arg(g, "graph")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let p = SimplifyParams {
            walks: (walks > 0).then_some(walks),
            use_exact_p: exact_p,
            seed,
            fixpoint,
            ..SimplifyParams::default()
        };
        emit(out, approx_simplify(g, &p).map_err(lib)?);
        Ok(())
    })
}

/// Exact isomorphism-based simplification; refuses large graphs.
///
/// # Safety
/// `g` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dfg_simplify_exact(g: *const DfgGraph, out: *mut *mut DfgGraph) -> DfgStatus {
    guard(|| {
        let g = graph_arg(g, "graph")?;
        if out.is_null() {
            return Err(null("out"));
        }
        emit(out, exact_simplify(g).map_err(lib)?);
        Ok(())
    })
}

/// n-fragment inclusion score of `h` in `g`, written to `score`.
///
/// # Safety
/// `h` and `g` must be live handles and `score` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dfg_nfis(
    h: *const DfgGraph,
    g: *const DfgGraph,
    n: usize,
    k: usize,
    seed: u64,
    score: *mut f64,
) -> DfgStatus {
    guard(|| {
        let h = graph_arg(h, "h")?;
        let g = graph_arg(g, "g")?;
        if score.is_null() {
            return Err(null("score"));
        }
        let p = FisParams {
            n,
            k,
            seed,
            ..FisParams::default()
        };
        *score = nfis(h, g, &p).map_err(lib)?.value;
        Ok(())
    })
}
