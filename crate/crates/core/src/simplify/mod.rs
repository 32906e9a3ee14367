// SPDX-License-Identifier: Apache-2.0

//! Fingerprint generation by merging repeated structure.
//!
//! Two routes are provided. [`approx_simplify`] groups same-depth vertices
//! by backward-walk visit probability and merges same-label vertices within
//! a group, in a single pass over depths. [`exact_simplify`] is the oracle:
//! it merges roots of isomorphic maximal rooted subgraphs at equal depth
//! until none remain. It is only practical on small graphs.

mod cluster;
mod walk;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    compute_depths, maximal_rooted_subgraph, merge_vertices, DataFlowGraph, Indexed, Label,
    VertexId,
};
use crate::iso::{cone_keys, rooted_isomorphic_with_limit, DEFAULT_ISO_LIMIT};

pub use cluster::cluster_1d;
pub use walk::{exact_visit_probability, monte_carlo_visits, VisitStats};

/// Clustering tolerance used when probabilities are exact.
pub const EXACT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    /// `3 * max sqrt(f(1-f)/N)` over the depth layer, floored at `1/N`;
    /// [`EXACT_TOLERANCE`] when probabilities are exact.
    Auto,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplifyParams {
    /// Number of walks; `None` means `max(10000, 100 * |V|)`.
    pub walks: Option<u64>,
    pub bandwidth: Bandwidth,
    pub use_exact_p: bool,
    pub seed: u64,
    /// Repeat the pass until the vertex count stops shrinking.
    pub fixpoint: bool,
}

impl Default for SimplifyParams {
    fn default() -> Self {
        SimplifyParams {
            walks: None,
            bandwidth: Bandwidth::Auto,
            use_exact_p: false,
            seed: 0,
            fixpoint: false,
        }
    }
}

impl SimplifyParams {
    pub fn exact() -> Self {
        SimplifyParams {
            use_exact_p: true,
            ..Self::default()
        }
    }

    pub fn walks_for(&self, vertex_count: usize) -> u64 {
        self.walks
            .unwrap_or_else(|| 10_000u64.max(100 * vertex_count as u64))
    }

    pub fn validate(&self) -> Result<()> {
        if let Bandwidth::Fixed(h) = self.bandwidth {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidParam(format!(
                    "fixed bandwidth must be positive, got {h}"
                )));
            }
        }
        if self.walks == Some(0) {
            return Err(Error::InvalidParam("walk count must be positive".into()));
        }
        Ok(())
    }

    /// Compact `key=value` rendering stored in fingerprint headers.
    pub fn describe(&self, vertex_count: usize) -> String {
        let bw = match self.bandwidth {
            Bandwidth::Auto => "auto".to_string(),
            Bandwidth::Fixed(h) => format!("{h}"),
        };
        if self.use_exact_p {
            format!("mode=exact bandwidth={bw} fixpoint={}", self.fixpoint)
        } else {
            format!(
                "mode=walks walks={} bandwidth={bw} seed={} fixpoint={}",
                self.walks_for(vertex_count),
                self.seed,
                self.fixpoint
            )
        }
    }
}

/// Approximate simplification (single pass unless `params.fixpoint`).
pub fn approx_simplify(g: &DataFlowGraph, params: &SimplifyParams) -> Result<DataFlowGraph> {
    params.validate()?;
    let mut current = simplify_pass(g, params)?;
    if params.fixpoint {
        let mut round = 1u64;
        loop {
            let p = SimplifyParams {
                seed: params.seed.wrapping_add(round),
                ..params.clone()
            };
            let next = simplify_pass(&current, &p)?;
            if next.vertex_count() == current.vertex_count() {
                break;
            }
            current = next;
            round += 1;
        }
    }
    Ok(current)
}

fn simplify_pass(g: &DataFlowGraph, params: &SimplifyParams) -> Result<DataFlowGraph> {
    let idx = Indexed::build(g)?;
    let depth = idx.depths()?;
    let n = idx.len();
    if n == 0 {
        return Ok(g.clone());
    }
    let walks = params.walks_for(n);
    let prob: Vec<f64> = if params.use_exact_p {
        walk::exact_dense(&idx)?
    } else {
        walk::monte_carlo_dense(&idx, walks, params.seed)
            .into_iter()
            .map(|m| m as f64 / walks as f64)
            .collect()
    };

    let mut layers: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (v, &d) in depth.iter().enumerate() {
        layers.entry(d).or_default().push(v);
    }

    // Probabilities and depths come from the input graph; merges inside one
    // pass never touch two vertices of different input depth, so edges keep
    // pointing to strictly deeper vertices and each merge stays acyclic.
    let mut out = g.clone();
    for members in layers.values() {
        if members.len() < 2 {
            continue;
        }
        let freqs: Vec<f64> = members.iter().map(|&v| prob[v]).collect();
        let h = layer_bandwidth(params, &freqs, walks);
        let clusters = cluster_1d(&freqs, h);
        let mut groups: BTreeMap<(usize, &Label), Vec<VertexId>> = BTreeMap::new();
        for (k, &v) in members.iter().enumerate() {
            groups
                .entry((clusters[k], &idx.labels[v]))
                .or_default()
                .push(idx.ids[v]);
        }
        let merges: Vec<Vec<VertexId>> = groups.into_values().filter(|g| g.len() > 1).collect();
        if !merges.is_empty() {
            out = merge_vertices(&out, &merges)?;
        }
    }
    Ok(out)
}

fn layer_bandwidth(params: &SimplifyParams, freqs: &[f64], walks: u64) -> f64 {
    match params.bandwidth {
        Bandwidth::Fixed(h) => h,
        Bandwidth::Auto if params.use_exact_p => EXACT_TOLERANCE,
        Bandwidth::Auto => {
            let n = walks as f64;
            let sigma = freqs
                .iter()
                .map(|&f| (f * (1.0 - f) / n).sqrt())
                .fold(0.0, f64::max);
            (3.0 * sigma).max(1.0 / n)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactOptions {
    /// Also require equal ambient in-degrees of paired vertices.
    pub strict_indegree: bool,
    pub limit: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            strict_indegree: false,
            limit: DEFAULT_ISO_LIMIT,
        }
    }
}

/// Exact fixed-point simplification with default options.
pub fn exact_simplify(g: &DataFlowGraph) -> Result<DataFlowGraph> {
    exact_simplify_with(g, ExactOptions::default())
}

/// Repeatedly merges the smallest-id pair of same-depth, same-label roots
/// whose maximal rooted subgraphs are isomorphic, recomputing depths after
/// every merge, until no such pair is left.
pub fn exact_simplify_with(g: &DataFlowGraph, opts: ExactOptions) -> Result<DataFlowGraph> {
    if g.vertex_count() > opts.limit {
        return Err(Error::SizeGuard {
            size: g.vertex_count(),
            limit: opts.limit,
        });
    }
    let mut current = g.clone();
    while let Some((u, v)) = first_isomorphic_pair(&current, opts)? {
        current = merge_vertices(&current, &[vec![u, v]])?;
    }
    Ok(current)
}

/// Smallest (u, v), u < v, with equal depth, equal label and isomorphic
/// maximal rooted subgraphs.
pub(crate) fn first_isomorphic_pair(
    g: &DataFlowGraph,
    opts: ExactOptions,
) -> Result<Option<(VertexId, VertexId)>> {
    let mut found = None;
    for_each_isomorphic_pair(g, opts, |u, v| {
        found = Some((u, v));
        false
    })?;
    Ok(found)
}

/// Visits same-depth isomorphic root pairs in ascending (u, v) order until
/// `visit` returns false.
pub(crate) fn for_each_isomorphic_pair(
    g: &DataFlowGraph,
    opts: ExactOptions,
    visit: impl FnMut(VertexId, VertexId) -> bool,
) -> Result<()> {
    for_each_isomorphic_cone_pair(g, opts, true, visit)
}

/// Like [`for_each_isomorphic_pair`]; `same_depth = false` also pairs roots
/// of different depth.
pub(crate) fn for_each_isomorphic_cone_pair(
    g: &DataFlowGraph,
    opts: ExactOptions,
    same_depth: bool,
    mut visit: impl FnMut(VertexId, VertexId) -> bool,
) -> Result<()> {
    let depths = compute_depths(g)?;
    let keys = cone_keys(g)?;
    let depth_key = |v: VertexId| {
        if same_depth {
            depths.get(v).expect("depth of every vertex")
        } else {
            0
        }
    };
    let mut buckets: BTreeMap<(u32, &Label, (u64, usize, usize)), Vec<VertexId>> = BTreeMap::new();
    for (v, label) in g.vertices() {
        buckets.entry((depth_key(v), label, keys[&v])).or_default().push(v);
    }
    let ambient = opts.strict_indegree.then_some(g);
    let mut cones = BTreeMap::new();
    for (u, label) in g.vertices() {
        let bucket = &buckets[&(depth_key(u), label, keys[&u])];
        for &v in bucket.iter().filter(|&&v| v > u) {
            for x in [u, v] {
                if !cones.contains_key(&x) {
                    cones.insert(x, maximal_rooted_subgraph(g, x)?);
                }
            }
            if rooted_isomorphic_with_limit(&cones[&u], &cones[&v], ambient, opts.limit)?
                && !visit(u, v)
            {
                return Ok(());
            }
        }
    }
    Ok(())
}
