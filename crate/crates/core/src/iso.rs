// SPDX-License-Identifier: Apache-2.0

//! Exact isomorphism of rooted subgraphs.
//!
//! Backtracking in BFS order from the root. A vertex can only be paired with
//! a candidate that has the same label, the same in/out degree inside the
//! subgraph and the same unfolding hash (a Merkle hash over the vertex's
//! cone), which is a necessary condition for the cones to be isomorphic.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, VecDeque};
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::graph::{DataFlowGraph, Indexed, RootedSubgraph, VertexId};

/// Default cap on vertices per side for exact matching.
pub const DEFAULT_ISO_LIMIT: usize = 200;

/// True iff a label- and edge-preserving bijection maps `a.root` to `b.root`.
///
/// With `indegree_in`, paired vertices must also have equal in-degree in
/// that ambient graph.
pub fn rooted_isomorphic(
    a: &RootedSubgraph,
    b: &RootedSubgraph,
    indegree_in: Option<&DataFlowGraph>,
) -> Result<bool> {
    rooted_isomorphic_with_limit(a, b, indegree_in, DEFAULT_ISO_LIMIT)
}

pub fn rooted_isomorphic_with_limit(
    a: &RootedSubgraph,
    b: &RootedSubgraph,
    indegree_in: Option<&DataFlowGraph>,
    limit: usize,
) -> Result<bool> {
    for s in [a, b] {
        if s.len() > limit {
            return Err(Error::SizeGuard {
                size: s.len(),
                limit,
            });
        }
        if !s.graph.contains_vertex(s.root) {
            return Err(Error::UnknownVertex(s.root));
        }
    }
    if a.graph.vertex_count() != b.graph.vertex_count()
        || a.graph.edge_count() != b.graph.edge_count()
        || a.graph.label(a.root) != b.graph.label(b.root)
        || a.graph.label_histogram() != b.graph.label_histogram()
    {
        return Ok(false);
    }
    let ambient = |s: &RootedSubgraph| -> Vec<usize> {
        s.graph
            .vertex_ids()
            .map(|v| indegree_in.map_or(0, |g| g.in_degree(v)))
            .collect()
    };
    let sa = Side::new(&a.graph, a.root, ambient(a))?;
    let sb = Side::new(&b.graph, b.root, ambient(b))?;
    if sa.sig[sa.root] != sb.sig[sb.root] {
        return Ok(false);
    }
    let order = sa.bfs_order();
    if order.len() != sa.idx.len() {
        return Err(Error::InvalidGraph(format!(
            "vertex set of the subgraph rooted at {} is not reachable from its root",
            a.root
        )));
    }
    let mut m = Matcher {
        a: &sa,
        b: &sb,
        order,
        map: vec![usize::MAX; sa.idx.len()],
        used: vec![false; sb.idx.len()],
    };
    Ok(m.search(0))
}

struct Side {
    idx: Indexed,
    root: usize,
    sig: Vec<(u64, usize, usize, usize)>,
}

impl Side {
    fn new(g: &DataFlowGraph, root: VertexId, ambient: Vec<usize>) -> Result<Self> {
        let idx = Indexed::build(g)?;
        let hashes = unfolding_hashes(&idx)?;
        let root = idx.position(root).ok_or(Error::UnknownVertex(root))?;
        let sig = (0..idx.len())
            .map(|v| (hashes[v], idx.out[v].len(), idx.inn[v].len(), ambient[v]))
            .collect();
        Ok(Side { idx, root, sig })
    }

    fn bfs_order(&self) -> Vec<(usize, usize)> {
        // (vertex, bfs parent); the root has parent usize::MAX.
        let n = self.idx.len();
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([(self.root, usize::MAX)]);
        seen[self.root] = true;
        while let Some((v, p)) = queue.pop_front() {
            order.push((v, p));
            for &w in &self.idx.out[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back((w, v));
                }
            }
        }
        order
    }
}

struct Matcher<'a> {
    a: &'a Side,
    b: &'a Side,
    order: Vec<(usize, usize)>,
    map: Vec<usize>,
    used: Vec<bool>,
}

impl Matcher<'_> {
    fn search(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let (u, parent) = self.order[depth];
        let candidates: Vec<usize> = if parent == usize::MAX {
            vec![self.b.root]
        } else {
            self.b.idx.out[self.map[parent]].clone()
        };
        for c in candidates {
            if self.used[c] || self.a.sig[u] != self.b.sig[c] || !self.consistent(u, c) {
                continue;
            }
            self.map[u] = c;
            self.used[c] = true;
            if self.search(depth + 1) {
                return true;
            }
            self.map[u] = usize::MAX;
            self.used[c] = false;
        }
        false
    }

    // Every edge between `u` and an already-mapped vertex must exist between
    // the images; edge counts are equal, so this yields a bijection on edges.
    fn consistent(&self, u: usize, c: usize) -> bool {
        let a = &self.a.idx;
        let b = &self.b.idx;
        a.out[u]
            .iter()
            .filter(|&&w| self.map[w] != usize::MAX)
            .all(|&w| b.out[c].contains(&self.map[w]))
            && a.inn[u]
                .iter()
                .filter(|&&w| self.map[w] != usize::MAX)
                .all(|&w| b.inn[c].contains(&self.map[w]))
    }
}

/// Merkle hash of each vertex's unfolded cone: label plus the sorted
/// multiset of child hashes. Isomorphic cones hash equally.
pub(crate) fn unfolding_hashes(idx: &Indexed) -> Result<Vec<u64>> {
    let order = idx.topological_order()?;
    let mut h = vec![0u64; idx.len()];
    for &v in order.iter().rev() {
        let mut kids: Vec<u64> = idx.out[v].iter().map(|&w| h[w]).collect();
        kids.sort_unstable();
        let mut s = DefaultHasher::new();
        idx.labels[v].as_str().hash(&mut s);
        kids.hash(&mut s);
        h[v] = s.finish();
    }
    Ok(h)
}

/// Per-vertex key that must agree for two maximal rooted subgraphs to be
/// isomorphic: (unfolding hash, cone size, cone edge count).
pub(crate) fn cone_keys(g: &DataFlowGraph) -> Result<BTreeMap<VertexId, (u64, usize, usize)>> {
    let idx = Indexed::build(g)?;
    let hashes = unfolding_hashes(&idx)?;
    let n = idx.len();
    let mut out = BTreeMap::new();
    let mut mark = vec![usize::MAX; n];
    let mut stack = Vec::new();
    for v in 0..n {
        let (mut size, mut edges) = (0usize, 0usize);
        mark[v] = v;
        stack.push(v);
        while let Some(u) = stack.pop() {
            size += 1;
            edges += idx.out[u].len();
            for &w in &idx.out[u] {
                if mark[w] != v {
                    mark[w] = v;
                    stack.push(w);
                }
            }
        }
        out.insert(idx.ids[v], (hashes[v], size, edges));
    }
    Ok(out)
}
