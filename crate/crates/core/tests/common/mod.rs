// SPDX-License-Identifier: Apache-2.0

//! Helpers shared by the integration suites: random DAGs and brute-force
//! oracles that do not reuse the library's own matching code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use dfgprint::rng::StreamRng;
use dfgprint::{DataFlowGraph, Label, VertexId};
use rand::RngExt;

pub fn lab(s: &str) -> Label {
    Label::new(s).unwrap()
}

/// Random DAG on `n` vertices with about `m` edges. Edges run from higher to
/// lower id, so the result is acyclic by construction.
pub fn random_dag(rng: &mut StreamRng, n: usize, m: usize, labels: &[&str]) -> DataFlowGraph {
    let mut g = DataFlowGraph::new();
    for v in 0..n as u64 {
        g.add_vertex(VertexId(v), lab(labels[rng.random_range(0..labels.len())]));
    }
    let max = n * (n - 1) / 2;
    let m = m.min(max);
    while g.edge_count() < m {
        let a = rng.random_range(0..n as u64);
        let b = rng.random_range(0..n as u64);
        if a != b {
            g.add_edge(VertexId(a.max(b)), VertexId(a.min(b)));
        }
    }
    g
}

/// Subgraph of `g` made of the given edges and their endpoints.
pub fn edge_subgraph(g: &DataFlowGraph, edges: &[(VertexId, VertexId)]) -> DataFlowGraph {
    let mut h = DataFlowGraph::new();
    for &(s, d) in edges {
        for v in [s, d] {
            h.add_vertex(v, g.label(v).unwrap().clone());
        }
        h.add_edge(s, d);
    }
    h
}

/// Exhaustive search for an injective, label- and edge-preserving map of
/// `p` into `g`.
pub fn brute_embeds(p: &DataFlowGraph, g: &DataFlowGraph) -> bool {
    let pv: Vec<VertexId> = p.vertex_ids().collect();
    let gv: Vec<VertexId> = g.vertex_ids().collect();
    let mut map: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut used: BTreeSet<VertexId> = BTreeSet::new();

    fn go(
        i: usize,
        pv: &[VertexId],
        gv: &[VertexId],
        p: &DataFlowGraph,
        g: &DataFlowGraph,
        map: &mut BTreeMap<VertexId, VertexId>,
        used: &mut BTreeSet<VertexId>,
    ) -> bool {
        if i == pv.len() {
            return p.edges().all(|(s, d)| g.has_edge(map[&s], map[&d]));
        }
        for &c in gv {
            if used.contains(&c) || g.label(c) != p.label(pv[i]) {
                continue;
            }
            map.insert(pv[i], c);
            used.insert(c);
            if go(i + 1, pv, gv, p, g, map, used) {
                return true;
            }
            used.remove(&c);
            map.remove(&pv[i]);
        }
        false
    }
    go(0, &pv, &gv, p, g, &mut map, &mut used)
}

/// Exact distribution of the edge-growth fragment sampler over edge index
/// sets (indices into `h.edges()`), including restarts and the
/// largest-attempt fallback.
pub fn growth_distribution(h: &DataFlowGraph, n: usize, max_restarts: usize) -> BTreeMap<u64, f64> {
    let edges: Vec<(VertexId, VertexId)> = h.edges().collect();
    let m = edges.len();
    assert!(m > 0 && m <= 63);
    let frontier = |mask: u64| -> Vec<usize> {
        let mut verts = BTreeSet::new();
        for (i, &(s, d)) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                verts.insert(s);
                verts.insert(d);
            }
        }
        (0..m)
            .filter(|&i| mask >> i & 1 == 0)
            .filter(|&i| verts.contains(&edges[i].0) || verts.contains(&edges[i].1))
            .collect()
    };

    // One attempt: outcomes with n edges, and stuck outcomes.
    let mut layer: BTreeMap<u64, f64> = (0..m).map(|i| (1u64 << i, 1.0 / m as f64)).collect();
    let mut stuck: BTreeMap<u64, f64> = BTreeMap::new();
    for _ in 1..n {
        let mut next = BTreeMap::new();
        for (&mask, &p) in &layer {
            let f = frontier(mask);
            if f.is_empty() {
                *stuck.entry(mask).or_insert(0.0) += p;
                continue;
            }
            for e in &f {
                *next.entry(mask | 1 << e).or_insert(0.0) += p / f.len() as f64;
            }
        }
        layer = next;
    }

    let p_stuck: f64 = stuck.values().sum();
    let r = max_restarts as i32;
    let geometric: f64 = (0..=r).map(|j| p_stuck.powi(j)).sum();
    let mut out: BTreeMap<u64, f64> = layer.iter().map(|(&k, &p)| (k, p * geometric)).collect();
    if p_stuck > 0.0 {
        // Every attempt stuck; the first attempt of maximal size wins.
        let size = |mask: u64| mask.count_ones();
        for (&mask, &p) in &stuck {
            let s = size(mask);
            let q = p / p_stuck;
            let below: f64 = stuck.iter().filter(|(k, _)| size(**k) < s).map(|(_, v)| v / p_stuck).sum();
            let at_most: f64 = stuck.iter().filter(|(k, _)| size(**k) <= s).map(|(_, v)| v / p_stuck).sum();
            let pick: f64 = (0..=r).map(|t| below.powi(t) * q * at_most.powi(r - t)).sum();
            *out.entry(mask).or_insert(0.0) += p_stuck.powi(r + 1) * pick;
        }
    }
    out
}

/// Exact n-FIS of `h` in `g` from the growth distribution and brute-force
/// matching.
pub fn exact_nfis(h: &DataFlowGraph, g: &DataFlowGraph, n: usize, max_restarts: usize) -> f64 {
    let edges: Vec<(VertexId, VertexId)> = h.edges().collect();
    growth_distribution(h, n, max_restarts)
        .into_iter()
        .filter(|&(mask, _)| {
            let chosen: Vec<_> = (0..edges.len())
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| edges[i])
                .collect();
            brute_embeds(&edge_subgraph(h, &chosen), g)
        })
        .map(|(_, p)| p)
        .sum()
}
