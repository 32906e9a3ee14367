// SPDX-License-Identifier: Apache-2.0

//! Labeled data-flow DAGs.
//!
//! A vertex is one instruction execution. Edges run from a consuming
//! execution to each execution that produced one of its operands, so the
//! maximal rooted subgraph of a vertex is its operand-provenance cone.
//! Vertices with no incoming edge are final consumers and have depth 0.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque vertex identifier. Ordering is only used to make traversals
/// deterministic.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct VertexId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for VertexId {
    fn from(v: u64) -> Self {
        VertexId(v)
    }
}

/// Instruction-kind symbol attached to a vertex.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(Arc<str>);

impl Label {
    pub const OTHER: &'static str = "other";

    pub fn new(s: &str) -> Result<Self> {
        if s.is_empty() || s.chars().any(char::is_whitespace) {
            return Err(Error::InvalidLabel(s.to_string()));
        }
        Ok(Label(Arc::from(s)))
    }

    pub fn other() -> Self {
        Label(Arc::from(Self::OTHER))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Label {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl TryFrom<&str> for Label {
    type Error = Error;
    fn try_from(s: &str) -> Result<Self> {
        Label::new(s)
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Label::new(&s).map_err(serde::de::Error::custom)
    }
}

/// One structural problem found by [`DataFlowGraph::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    SelfLoop { vertex: VertexId },
    DanglingEdge { src: VertexId, dst: VertexId, missing: VertexId },
    Cycle { src: VertexId, dst: VertexId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop { vertex } => write!(f, "self-loop at {vertex}"),
            Violation::DanglingEdge { src, dst, missing } => {
                write!(f, "edge {src} -> {dst} references undeclared vertex {missing}")
            }
            Violation::Cycle { src, dst } => write!(f, "cycle through edge {src} -> {dst}"),
        }
    }
}

/// Labeled directed graph without multi-edges.
///
/// Mutation is allowed while building; every analysis entry point checks
/// acyclicity and endpoint validity before relying on them.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct DataFlowGraph {
    labels: BTreeMap<VertexId, Label>,
    edges: BTreeSet<(VertexId, VertexId)>,
    // (dst, src) mirror of `edges` for in-neighbor queries.
    reverse: BTreeSet<(VertexId, VertexId)>,
}

impl fmt::Debug for DataFlowGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DataFlowGraph")
            .field("vertices", &self.labels)
            .field("edges", &self.edges)
            .finish()
    }
}

const MIN_ID: VertexId = VertexId(0);
const MAX_ID: VertexId = VertexId(u64::MAX);

impl DataFlowGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds and validates a graph in one step.
    pub fn from_parts(
        vertices: impl IntoIterator<Item = (VertexId, Label)>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self> {
        let mut g = Self::new();
        for (v, l) in vertices {
            g.add_vertex(v, l);
        }
        for (s, d) in edges {
            g.add_edge(s, d);
        }
        g.check()?;
        Ok(g)
    }

    /// Inserts a vertex, replacing the label if it already exists.
    pub fn add_vertex(&mut self, id: VertexId, label: Label) -> Option<Label> {
        self.labels.insert(id, label)
    }

    /// Returns false if the edge was already present.
    pub fn add_edge(&mut self, src: VertexId, dst: VertexId) -> bool {
        if self.edges.insert((src, dst)) {
            self.reverse.insert((dst, src));
            true
        } else {
            false
        }
    }

    pub fn remove_edge(&mut self, src: VertexId, dst: VertexId) -> bool {
        self.reverse.remove(&(dst, src));
        self.edges.remove(&(src, dst))
    }

    /// Removes a vertex together with all incident edges.
    pub fn remove_vertex(&mut self, id: VertexId) -> Option<Label> {
        let outs: Vec<_> = self.successors(id).collect();
        let ins: Vec<_> = self.predecessors(id).collect();
        for d in outs {
            self.remove_edge(id, d);
        }
        for s in ins {
            self.remove_edge(s, id);
        }
        self.labels.remove(&id)
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn contains_vertex(&self, id: VertexId) -> bool {
        self.labels.contains_key(&id)
    }

    pub fn has_edge(&self, src: VertexId, dst: VertexId) -> bool {
        self.edges.contains(&(src, dst))
    }

    pub fn label(&self, id: VertexId) -> Option<&Label> {
        self.labels.get(&id)
    }

    /// Vertices in ascending id order.
    pub fn vertices(&self) -> impl Iterator<Item = (VertexId, &Label)> + '_ {
        self.labels.iter().map(|(v, l)| (*v, l))
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.labels.keys().copied()
    }

    /// Edges in ascending (src, dst) order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.edges.iter().copied()
    }

    /// Out-neighbors (operand origins) in ascending order.
    pub fn successors(&self, id: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.edges.range((id, MIN_ID)..=(id, MAX_ID)).map(|&(_, d)| d)
    }

    /// In-neighbors (consumers) in ascending order.
    pub fn predecessors(&self, id: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.reverse.range((id, MIN_ID)..=(id, MAX_ID)).map(|&(_, s)| s)
    }

    pub fn out_degree(&self, id: VertexId) -> usize {
        self.successors(id).count()
    }

    pub fn in_degree(&self, id: VertexId) -> usize {
        self.predecessors(id).count()
    }

    /// Vertices with no incoming edge.
    pub fn sources(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertex_ids().filter(|&v| self.in_degree(v) == 0)
    }

    pub fn max_vertex_id(&self) -> Option<VertexId> {
        self.labels.keys().next_back().copied()
    }

    /// Reports every invariant violation; an empty list means the graph is a
    /// valid data-flow DAG.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for &(s, d) in &self.edges {
            if s == d {
                out.push(Violation::SelfLoop { vertex: s });
            }
            for end in [s, d] {
                if !self.labels.contains_key(&end) {
                    out.push(Violation::DanglingEdge {
                        src: s,
                        dst: d,
                        missing: end,
                    });
                    break;
                }
            }
        }
        if out.is_empty() {
            if let Err(Error::Cycle { src, dst }) = self.topological_order() {
                out.push(Violation::Cycle { src, dst });
            }
        }
        out
    }

    /// Like [`validate`](Self::validate) but fails on the first problem.
    pub fn check(&self) -> Result<()> {
        match self.validate().into_iter().next() {
            None => Ok(()),
            Some(Violation::SelfLoop { vertex }) => Err(Error::SelfLoop(vertex)),
            Some(Violation::DanglingEdge { missing, .. }) => Err(Error::UnknownVertex(missing)),
            Some(Violation::Cycle { src, dst }) => Err(Error::Cycle { src, dst }),
        }
    }

    /// Orders vertices so that every edge points forward. Fails with one back
    /// edge when the graph has a cycle.
    pub fn topological_order(&self) -> Result<Vec<VertexId>> {
        let idx = Indexed::build(self)?;
        Ok(idx.topological_order()?.into_iter().map(|i| idx.ids[i]).collect())
    }

    /// Subgraph on `members` with every edge between them.
    pub fn induced(&self, members: &BTreeSet<VertexId>) -> DataFlowGraph {
        let mut g = DataFlowGraph::new();
        for &v in members {
            if let Some(l) = self.labels.get(&v) {
                g.add_vertex(v, l.clone());
            }
        }
        for &v in members {
            for d in self.successors(v) {
                if members.contains(&d) {
                    g.add_edge(v, d);
                }
            }
        }
        g
    }

    /// Copy with vertex ids replaced by their rank in ascending id order.
    pub fn renumbered(&self) -> DataFlowGraph {
        let map: BTreeMap<VertexId, VertexId> = self
            .labels
            .keys()
            .enumerate()
            .map(|(i, &v)| (v, VertexId(i as u64)))
            .collect();
        let mut g = DataFlowGraph::new();
        for (v, l) in &self.labels {
            g.add_vertex(map[v], l.clone());
        }
        for &(s, d) in &self.edges {
            if let (Some(&s), Some(&d)) = (map.get(&s), map.get(&d)) {
                g.add_edge(s, d);
            }
        }
        g
    }

    /// Label counts, ascending by label.
    pub fn label_histogram(&self) -> BTreeMap<Label, usize> {
        let mut h = BTreeMap::new();
        for l in self.labels.values() {
            *h.entry(l.clone()).or_insert(0) += 1;
        }
        h
    }
}

/// Dense index over a graph: positions follow ascending vertex id.
#[derive(Clone, Debug)]
pub struct Indexed {
    pub ids: Vec<VertexId>,
    pub labels: Vec<Label>,
    pub out: Vec<Vec<usize>>,
    pub inn: Vec<Vec<usize>>,
}

impl Indexed {
    /// Fails on dangling endpoints or self-loops; cycles are only detected by
    /// [`Indexed::topological_order`].
    pub fn build(g: &DataFlowGraph) -> Result<Self> {
        let ids: Vec<VertexId> = g.labels.keys().copied().collect();
        let labels: Vec<Label> = g.labels.values().cloned().collect();
        let n = ids.len();
        let mut out = vec![Vec::new(); n];
        let mut inn = vec![Vec::new(); n];
        for &(s, d) in &g.edges {
            if s == d {
                return Err(Error::SelfLoop(s));
            }
            let si = ids.binary_search(&s).map_err(|_| Error::UnknownVertex(s))?;
            let di = ids.binary_search(&d).map_err(|_| Error::UnknownVertex(d))?;
            out[si].push(di);
            inn[di].push(si);
        }
        Ok(Indexed {
            ids,
            labels,
            out,
            inn,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn position(&self, id: VertexId) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    /// Iterative DFS topological sort; edges point from earlier to later
    /// positions in the result.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        const WHITE: u8 = 0;
        const GRAY: u8 = 1;
        const BLACK: u8 = 2;
        let n = self.len();
        let mut color = vec![WHITE; n];
        let mut post = Vec::with_capacity(n);
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for start in 0..n {
            if color[start] != WHITE {
                continue;
            }
            color[start] = GRAY;
            stack.push((start, 0));
            while let Some(&mut (v, ref mut next)) = stack.last_mut() {
                if let Some(&w) = self.out[v].get(*next) {
                    *next += 1;
                    match color[w] {
                        WHITE => {
                            color[w] = GRAY;
                            stack.push((w, 0));
                        }
                        GRAY => {
                            return Err(Error::Cycle {
                                src: self.ids[v],
                                dst: self.ids[w],
                            })
                        }
                        _ => {}
                    }
                } else {
                    color[v] = BLACK;
                    post.push(v);
                    stack.pop();
                }
            }
        }
        post.reverse();
        Ok(post)
    }

    /// Longest-path depth per position.
    pub fn depths(&self) -> Result<Vec<u32>> {
        let order = self.topological_order()?;
        let mut depth = vec![0u32; self.len()];
        for &v in &order {
            for &w in &self.out[v] {
                depth[w] = depth[w].max(depth[v] + 1);
            }
        }
        Ok(depth)
    }
}

/// Longest-path depth of every vertex.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DepthMap(BTreeMap<VertexId, u32>);

impl DepthMap {
    pub fn get(&self, v: VertexId) -> Option<u32> {
        self.0.get(&v).copied()
    }

    pub fn max_depth(&self) -> Option<u32> {
        self.0.values().copied().max()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, u32)> + '_ {
        self.0.iter().map(|(v, d)| (*v, *d))
    }

    /// Vertices grouped by depth, each group in ascending id order.
    pub fn layers(&self) -> BTreeMap<u32, Vec<VertexId>> {
        let mut out: BTreeMap<u32, Vec<VertexId>> = BTreeMap::new();
        for (&v, &d) in &self.0 {
            out.entry(d).or_default().push(v);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Number of edges on the longest path ending at each vertex.
pub fn compute_depths(g: &DataFlowGraph) -> Result<DepthMap> {
    let idx = Indexed::build(g)?;
    let depth = idx.depths()?;
    Ok(DepthMap(idx.ids.iter().copied().zip(depth).collect()))
}

/// A root plus a subgraph in which every vertex is reachable from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedSubgraph {
    pub root: VertexId,
    pub graph: DataFlowGraph,
}

impl RootedSubgraph {
    pub fn members(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.graph.vertex_ids()
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.graph.edges()
    }

    pub fn len(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }
}

/// Everything reachable from `v`, with all graph edges between those vertices.
pub fn maximal_rooted_subgraph(g: &DataFlowGraph, v: VertexId) -> Result<RootedSubgraph> {
    if !g.contains_vertex(v) {
        return Err(Error::UnknownVertex(v));
    }
    let members = reachable_from(g, v);
    Ok(RootedSubgraph {
        root: v,
        graph: g.induced(&members),
    })
}

pub(crate) fn reachable_from(g: &DataFlowGraph, v: VertexId) -> BTreeSet<VertexId> {
    let mut seen = BTreeSet::from([v]);
    let mut queue = VecDeque::from([v]);
    while let Some(u) = queue.pop_front() {
        for w in g.successors(u) {
            if seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Collapses each group into its smallest-id member.
///
/// Groups must be disjoint, non-empty, label-uniform and free of internal
/// edges. Edges are redirected onto the representatives and deduplicated.
pub fn merge_vertices(g: &DataFlowGraph, groups: &[Vec<VertexId>]) -> Result<DataFlowGraph> {
    let mut rep: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    for (index, group) in groups.iter().enumerate() {
        let Some(&first) = group.iter().min() else {
            return Err(Error::EmptyGroup { index });
        };
        let first_label = g.label(first).ok_or(Error::UnknownVertex(first))?;
        for &v in group {
            let l = g.label(v).ok_or(Error::UnknownVertex(v))?;
            if l != first_label {
                return Err(Error::MixedLabels {
                    vertex: v,
                    first: first_label.to_string(),
                    second: l.to_string(),
                });
            }
            if rep.insert(v, first).is_some() {
                return Err(Error::OverlappingGroups(v));
            }
        }
    }
    for &(s, d) in &g.edges {
        if let (Some(rs), Some(rd)) = (rep.get(&s), rep.get(&d)) {
            if rs == rd {
                return Err(Error::IntraGroupEdge { src: s, dst: d });
            }
        }
    }
    let map = |v: VertexId| rep.get(&v).copied().unwrap_or(v);
    let mut out = DataFlowGraph::new();
    for (v, l) in g.vertices() {
        if map(v) == v {
            out.add_vertex(v, l.clone());
        }
    }
    for &(s, d) in &g.edges {
        out.add_edge(map(s), map(d));
    }
    out.check()?;
    Ok(out)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn lab(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    pub fn graph(vertices: &[(u64, &str)], edges: &[(u64, u64)]) -> DataFlowGraph {
        let mut g = DataFlowGraph::new();
        for &(v, l) in vertices {
            g.add_vertex(VertexId(v), lab(l));
        }
        for &(s, d) in edges {
            g.add_edge(VertexId(s), VertexId(d));
        }
        g
    }

    /// a=0 -> b=1, a -> c=2, b -> d=3, c -> d.
    pub fn diamond(la: &str, lb: &str, lc: &str, ld: &str) -> DataFlowGraph {
        graph(
            &[(0, la), (1, lb), (2, lc), (3, ld)],
            &[(0, 1), (0, 2), (1, 3), (2, 3)],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn v(x: u64) -> VertexId {
        VertexId(x)
    }

    #[test]
    fn labels_reject_blank_and_whitespace() {
        assert!(Label::new("").is_err());
        assert!(Label::new("i32 add").is_err());
        assert_eq!(Label::new("xor").unwrap().as_str(), "xor");
    }

    #[test]
    fn depth_of_singleton_chain_and_diamond() {
        let single = graph(&[(7, "xor")], &[]);
        assert_eq!(compute_depths(&single).unwrap().get(v(7)), Some(0));

        let chain = graph(&[(0, "a"), (1, "b"), (2, "c")], &[(0, 1), (1, 2)]);
        let d = compute_depths(&chain).unwrap();
        assert_eq!(
            (d.get(v(0)), d.get(v(1)), d.get(v(2))),
            (Some(0), Some(1), Some(2))
        );

        let d = compute_depths(&diamond("x", "x", "x", "x")).unwrap();
        let got: Vec<u32> = d.iter().map(|(_, d)| d).collect();
        assert_eq!(got, vec![0, 1, 1, 2]);
    }

    #[test]
    fn depth_uses_longest_not_shortest_path() {
        // 0 -> 2 directly and via 1.
        let g = graph(&[(0, "a"), (1, "a"), (2, "a")], &[(0, 2), (0, 1), (1, 2)]);
        assert_eq!(compute_depths(&g).unwrap().get(v(2)), Some(2));
    }

    #[test]
    fn cycle_is_reported_with_back_edge() {
        let g = graph(&[(0, "a"), (1, "b")], &[(0, 1), (1, 0)]);
        match compute_depths(&g) {
            Err(Error::Cycle { src, dst }) => assert!(g.has_edge(src, dst)),
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn maximal_rooted_subgraph_examples() {
        let g = diamond("o", "x", "x", "a");
        let whole = maximal_rooted_subgraph(&g, v(0)).unwrap();
        assert_eq!(whole.graph, g);

        let b = maximal_rooted_subgraph(&g, v(1)).unwrap();
        assert_eq!(b.members().collect::<Vec<_>>(), vec![v(1), v(3)]);
        assert_eq!(b.edges().collect::<Vec<_>>(), vec![(v(1), v(3))]);

        let sink = maximal_rooted_subgraph(&g, v(3)).unwrap();
        assert_eq!(sink.len(), 1);
        assert_eq!(sink.edges().count(), 0);

        assert!(matches!(
            maximal_rooted_subgraph(&g, v(99)),
            Err(Error::UnknownVertex(_))
        ));
    }

    #[test]
    fn merge_diamond_middle() {
        let g = diamond("o", "x", "x", "a");
        let m = merge_vertices(&g, &[vec![v(1), v(2)]]).unwrap();
        assert_eq!(m.vertex_count(), 3);
        assert_eq!(
            m.edges().collect::<Vec<_>>(),
            vec![(v(0), v(1)), (v(1), v(3))]
        );
    }

    #[test]
    fn merge_singletons_is_identity() {
        let g = diamond("o", "x", "x", "a");
        let groups: Vec<Vec<VertexId>> = g.vertex_ids().map(|x| vec![x]).collect();
        assert_eq!(merge_vertices(&g, &groups).unwrap(), g);
    }

    #[test]
    fn merge_two_sinks_unions_in_edges() {
        let g = graph(
            &[(0, "a"), (1, "b"), (2, "o"), (3, "o")],
            &[(0, 2), (1, 3), (0, 3)],
        );
        let m = merge_vertices(&g, &[vec![v(3), v(2)]]).unwrap();
        assert_eq!(m.vertex_count(), 3);
        assert_eq!(m.in_degree(v(2)), 2);
        assert_eq!(m.edge_count(), 2);
    }

    #[test]
    fn merge_rejects_bad_groups() {
        let g = diamond("o", "x", "and", "a");
        assert!(matches!(
            merge_vertices(&g, &[vec![v(1), v(2)]]),
            Err(Error::MixedLabels { .. })
        ));
        let g = diamond("x", "x", "x", "x");
        assert!(matches!(
            merge_vertices(&g, &[vec![v(0), v(1)]]),
            Err(Error::IntraGroupEdge { .. })
        ));
        assert!(matches!(
            merge_vertices(&g, &[vec![v(1), v(42)]]),
            Err(Error::UnknownVertex(_))
        ));
        assert!(matches!(
            merge_vertices(&g, &[vec![]]),
            Err(Error::EmptyGroup { index: 0 })
        ));
        assert!(matches!(
            merge_vertices(&g, &[vec![v(1), v(2)], vec![v(2), v(3)]]),
            Err(Error::OverlappingGroups(_))
        ));
    }

    #[test]
    fn merge_that_would_close_a_cycle_is_refused() {
        // 0 -> 1 -> 2 and 3 -> 4; merging {0,4} and {2,3} closes 0->1->2=3->4=0.
        let g = graph(
            &[(0, "a"), (1, "b"), (2, "c"), (3, "c"), (4, "a")],
            &[(0, 1), (1, 2), (3, 4)],
        );
        assert!(matches!(
            merge_vertices(&g, &[vec![v(0), v(4)], vec![v(2), v(3)]]),
            Err(Error::Cycle { .. })
        ));
    }

    #[test]
    fn validate_examples() {
        assert!(diamond("o", "x", "x", "a").validate().is_empty());

        let g = graph(&[(0, "a")], &[(0, 0)]);
        assert_eq!(g.validate(), vec![Violation::SelfLoop { vertex: v(0) }]);

        let g = graph(&[(0, "a"), (1, "b")], &[(0, 1), (1, 0)]);
        let violations = g.validate();
        assert_eq!(violations.len(), 1);
        assert!(matches!(violations[0], Violation::Cycle { .. }));

        let g = graph(&[(0, "a")], &[(0, 5)]);
        assert_eq!(
            g.validate(),
            vec![Violation::DanglingEdge {
                src: v(0),
                dst: v(5),
                missing: v(5)
            }]
        );
    }

    #[test]
    fn remove_vertex_drops_incident_edges() {
        let mut g = diamond("o", "x", "x", "a");
        g.remove_vertex(v(1));
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.in_degree(v(3)), 1);
        assert!(g.validate().is_empty());
    }
}
