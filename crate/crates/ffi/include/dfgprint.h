/* SPDX-License-Identifier: Apache-2.0 */

#ifndef DFGPRINT_H
#define DFGPRINT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result codes.
 */
typedef enum DfgStatus {
  DFG_STATUS_OK = 0,
  DFG_STATUS_NULL_ARGUMENT = 1,
  DFG_STATUS_INVALID_ARGUMENT = 2,
  DFG_STATUS_INVALID_GRAPH = 3,
  DFG_STATUS_PARSE = 4,
  DFG_STATUS_IO = 5,
  DFG_STATUS_SIZE_GUARD = 6,
  DFG_STATUS_NO_EDGES = 7,
  DFG_STATUS_PANIC = 8,
} DfgStatus;

/**
 * Opaque graph handle.
 */
typedef struct DfgGraph DfgGraph;

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next call into the library from the same thread.
 */
const char *dfg_last_error(void);

/**
 * Creates an empty graph.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum DfgStatus dfg_graph_new(struct DfgGraph **out);

/**
 * Releases a graph. Null is ignored.
 *
 * # Safety
 * `g` must come from this library and not be used afterwards.
 */
void dfg_graph_free(struct DfgGraph *g);

/**
 * Adds or relabels a vertex.
 *
 * # Safety
 * `g` must be a live handle and `label` a NUL-terminated string.
 */
enum DfgStatus dfg_graph_add_vertex(struct DfgGraph *g, uint64_t id, const char *label);

/**
 * Adds the edge `src -> dst`; both vertices must exist. Cycles are reported
 * by the operations that need a DAG.
 *
 * # Safety
 * `g` must be a live handle.
 */
enum DfgStatus dfg_graph_add_edge(struct DfgGraph *g, uint64_t src, uint64_t dst);

/**
 * Number of vertices; 0 for null.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
uintptr_t dfg_graph_vertex_count(const struct DfgGraph *g);

/**
 * Number of edges; 0 for null.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
uintptr_t dfg_graph_edge_count(const struct DfgGraph *g);

/**
 * Checks the graph invariants (acyclic, no self-loops, no dangling edges).
 *
 * # Safety
 * `g` must be a live handle.
 */
enum DfgStatus dfg_graph_check(const struct DfgGraph *g);

/**
 * Reads a fingerprint file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for writes.
 */
enum DfgStatus dfg_graph_read(const char *path, struct DfgGraph **out);

/**
 * Writes a graph as a fingerprint file named `name`.
 *
 * # Safety
 * `g` must be a live handle; `path` and `name` NUL-terminated strings.
 */
enum DfgStatus dfg_graph_write(const struct DfgGraph *g, const char *path, const char *name);

/**
 * Ingests a trace file with the default instrumented set. `max_edges` of 0
 * means unbounded.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for writes.
 */
enum DfgStatus dfg_ingest_trace(const char *path, uintptr_t max_edges, struct DfgGraph **out);

/**
 * Simplifies `g` with random walks (`exact_p == 0`) or exact visit
 * probabilities. `walks` of 0 picks the count from the graph size.
 *
 * # Safety
 * `g` must be a live handle and `out` valid for writes.
 */
enum DfgStatus dfg_simplify(const struct DfgGraph *g,
                            bool exact_p,
                            uint64_t walks,
                            uint64_t seed,
                            bool fixpoint,
                            struct DfgGraph **out);

/**
 * Exact isomorphism-based simplification; refuses large graphs.
 *
 * # Safety
 * `g` must be a live handle and `out` valid for writes.
 */
enum DfgStatus dfg_simplify_exact(const struct DfgGraph *g, struct DfgGraph **out);

/**
 * n-fragment inclusion score of `h` in `g`, written to `score`.
 *
 * # Safety
 * `h` and `g` must be live handles and `score` valid for writes.
 */
enum DfgStatus dfg_nfis(const struct DfgGraph *h,
                        const struct DfgGraph *g,
                        uintptr_t n,
                        uintptr_t k,
                        uint64_t seed,
                        double *score);

#endif  /* DFGPRINT_H */
