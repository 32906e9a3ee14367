// SPDX-License-Identifier: Apache-2.0

//! Approximation-quality study on small layered graphs.
//!
//! `G_N` is built layer by layer: `S_0` is a single childless vertex and every
//! vertex of `S_i` is identified by its set of children, a subset of the
//! vertices in `S_0 ∪ … ∪ S_{i-1}`. The study samples small subgraphs of
//! `G_4`, then counts how often exact-probability approximate simplification
//! leaves them untouched and how many same-depth isomorphic cone pairs they
//! contain.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use rand::RngExt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DataFlowGraph, Label, VertexId};
use crate::iso::DEFAULT_ISO_LIMIT;
use crate::rng::{substream, StreamRng};
use crate::simplify::{
    approx_simplify, for_each_isomorphic_cone_pair, Bandwidth, ExactOptions, SimplifyParams,
};

/// Largest `N` whose `G_N` is materialized (`|S_4| = 2^2059`).
pub const MAX_GN: usize = 3;

/// A vertex of a layered graph, named by its construction layer and index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LayerVertex {
    pub layer: usize,
    pub index: usize,
}

/// Layers `S_0 … S_N`; each vertex is its (sorted) children set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LayeredGraph {
    pub layers: Vec<Vec<Vec<LayerVertex>>>,
}

impl LayeredGraph {
    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// Position of the vertex with `children` in layer `layer`.
    pub fn find(&self, layer: usize, children: &[LayerVertex]) -> Option<usize> {
        self.layers.get(layer)?.iter().position(|c| c == children)
    }

    /// Dense vertex ids in layer order, all labeled `label`; edges run from a
    /// vertex to each of its children.
    pub fn to_graph(&self, label: &Label) -> DataFlowGraph {
        let mut offset = Vec::with_capacity(self.layers.len());
        let mut next = 0u64;
        for layer in &self.layers {
            offset.push(next);
            next += layer.len() as u64;
        }
        let id = |v: &LayerVertex| VertexId(offset[v.layer] + v.index as u64);
        let mut g = DataFlowGraph::new();
        for (i, layer) in self.layers.iter().enumerate() {
            for (j, children) in layer.iter().enumerate() {
                let me = LayerVertex { layer: i, index: j };
                g.add_vertex(id(&me), label.clone());
                for c in children {
                    g.add_edge(id(&me), id(c));
                }
            }
        }
        g
    }

    fn lower(&self, layer: usize) -> Vec<LayerVertex> {
        (0..layer)
            .flat_map(|i| (0..self.layers[i].len()).map(move |j| LayerVertex { layer: i, index: j }))
            .collect()
    }
}

/// Fully materialized `G_n` for `n ≤ 3`.
pub fn build_gn(n: usize) -> Result<LayeredGraph> {
    if n > MAX_GN {
        return Err(Error::Infeasible(n));
    }
    let mut g = LayeredGraph {
        layers: vec![vec![Vec::new()]],
    };
    for i in 1..=n {
        let lower = g.lower(i);
        let layer: Vec<Vec<LayerVertex>> = (0u64..1 << lower.len())
            .map(|mask| {
                lower
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, v)| *v)
                    .collect()
            })
            .collect();
        g.layers.push(layer);
    }
    Ok(g)
}

/// How layer sizes of a sampled subgraph are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerSizing {
    /// Sizes weighted by how many family members share them, so the sampled
    /// graph is uniform over the whole bounded family.
    UniformMember,
    /// Layer `i` gets a uniform size in `1..=min(|S_i|, budget left for it)`,
    /// lowest layer first.
    Sequential,
    /// A uniform total in `depth..max_vertices` is split over layers
    /// `1..=depth` by uniform cut points, then clamped to `|S_i|`.
    UniformTotal,
}

impl std::str::FromStr for LayerSizing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-member" => Ok(LayerSizing::UniformMember),
            "sequential" => Ok(LayerSizing::Sequential),
            "uniform-total" => Ok(LayerSizing::UniformTotal),
            _ => Err(Error::InvalidParam(format!("unknown layer sizing {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub depth: usize,
    pub max_vertices: usize,
    pub sizing: LayerSizing,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            depth: 4,
            max_vertices: 80,
            sizing: LayerSizing::UniformMember,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 || self.max_vertices < self.depth + 1 {
            return Err(Error::InvalidParam(format!(
                "sampler needs depth >= 1 and max_vertices > depth (depth={}, max_vertices={})",
                self.depth, self.max_vertices
            )));
        }
        Ok(())
    }
}

/// `|S_i|` of `G_N` given `|S_0 ∪ … ∪ S_{i-1}|`, saturating.
fn full_layer_size(lower_total: usize) -> usize {
    if lower_total >= usize::BITS as usize {
        usize::MAX
    } else {
        1usize << lower_total
    }
}

/// `ln C(n, k)`; `n` may exceed the integer range.
fn ln_choose(n: f64, k: usize) -> f64 {
    if k as f64 > n {
        return f64::NEG_INFINITY;
    }
    (0..k).map(|j| ((n - j as f64) / (j + 1) as f64).ln()).sum()
}

/// Cumulative (rescaled) member counts for every vector of sizes of layers
/// `1..=depth`. A vector `(s_1, …, s_d)` covers `Π C(|S_i|, s_i)` members.
fn member_weights(cfg: &SamplerConfig) -> Vec<(f64, Vec<usize>)> {
    fn walk(
        cfg: &SamplerConfig,
        used: usize,
        ln_w: f64,
        sizes: &mut Vec<usize>,
        out: &mut Vec<(f64, Vec<usize>)>,
    ) {
        if sizes.len() == cfg.depth {
            out.push((ln_w, sizes.clone()));
            return;
        }
        let reserve = cfg.depth - sizes.len() - 1;
        let full = 2f64.powi(used as i32);
        for k in 1..=cfg.max_vertices.saturating_sub(used + reserve) {
            let w = ln_choose(full, k);
            if w == f64::NEG_INFINITY {
                break;
            }
            sizes.push(k);
            walk(cfg, used + k, ln_w + w, sizes, out);
            sizes.pop();
        }
    }
    let mut out = Vec::new();
    walk(cfg, 1, 0.0, &mut Vec::new(), &mut out);
    let top = out.iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max);
    let mut acc = 0.0;
    for e in &mut out {
        acc += (e.0 - top).exp();
        e.0 = acc;
    }
    out
}

/// Draws members of the bounded family: subgraphs of `G_depth` with at most
/// `max_vertices` vertices, one vertex in `S_0`, at least one per layer, and
/// pairwise distinct, uniformly random children sets within every layer.
#[derive(Clone, Debug)]
pub struct LayeredSampler {
    cfg: SamplerConfig,
    weights: Arc<Vec<(f64, Vec<usize>)>>,
}

impl LayeredSampler {
    pub fn new(cfg: SamplerConfig) -> Result<Self> {
        cfg.validate()?;
        let weights = match cfg.sizing {
            LayerSizing::UniformMember => member_weights(&cfg),
            _ => Vec::new(),
        };
        Ok(LayeredSampler {
            cfg,
            weights: Arc::new(weights),
        })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    fn layer_sizes(&self, rng: &mut StreamRng) -> Vec<usize> {
        let cfg = &self.cfg;
        let mut sizes = vec![1usize];
        match cfg.sizing {
            LayerSizing::UniformMember => {
                let total = self.weights.last().map_or(0.0, |e| e.0);
                let x = rng.random::<f64>() * total;
                let at = self
                    .weights
                    .partition_point(|e| e.0 <= x)
                    .min(self.weights.len() - 1);
                sizes.extend_from_slice(&self.weights[at].1);
            }
            LayerSizing::Sequential => {
                for i in 1..=cfg.depth {
                    let used: usize = sizes.iter().sum();
                    let cap = full_layer_size(used)
                        .min(cfg.max_vertices.saturating_sub(used + cfg.depth - i))
                        .max(1);
                    sizes.push(rng.random_range(1..=cap));
                }
            }
            LayerSizing::UniformTotal => {
                let d = cfg.depth;
                let total = rng.random_range(d..cfg.max_vertices);
                // d positive parts via d-1 distinct cut points.
                let mut cuts: BTreeSet<usize> = BTreeSet::new();
                while cuts.len() + 1 < d {
                    cuts.insert(rng.random_range(1..total));
                }
                let mut prev = 0;
                for c in cuts.into_iter().chain([total]) {
                    let used: usize = sizes.iter().sum();
                    sizes.push((c - prev).min(full_layer_size(used)));
                    prev = c;
                }
            }
        }
        sizes
    }

    pub fn sample(&self, rng: &mut StreamRng) -> LayeredGraph {
        let sizes = self.layer_sizes(rng);
        let mut g = LayeredGraph {
            layers: vec![vec![Vec::new()]],
        };
        for (i, &size) in sizes.iter().enumerate().skip(1) {
            let lower = g.lower(i);
            let mut seen: HashSet<Vec<LayerVertex>> = HashSet::new();
            let mut layer = Vec::with_capacity(size);
            while layer.len() < size {
                let children: Vec<LayerVertex> =
                    lower.iter().filter(|_| rng.random_bool(0.5)).copied().collect();
                if seen.insert(children.clone()) {
                    layer.push(children);
                }
            }
            g.layers.push(layer);
        }
        g
    }
}

/// One bounded subgraph with the default sizing, labeled `other`.
pub fn sample_bounded_subgraph(
    depth: usize,
    max_vertices: usize,
    rng: &mut StreamRng,
) -> Result<DataFlowGraph> {
    let sampler = LayeredSampler::new(SamplerConfig {
        depth,
        max_vertices,
        ..SamplerConfig::default()
    })?;
    Ok(sampler.sample(rng).to_graph(&Label::other()))
}

fn guard(h: &DataFlowGraph) -> Result<()> {
    if h.vertex_count() > DEFAULT_ISO_LIMIT {
        return Err(Error::SizeGuard {
            size: h.vertex_count(),
            limit: DEFAULT_ISO_LIMIT,
        });
    }
    Ok(())
}

/// True iff exact-probability simplification with equality clustering
/// merges nothing.
pub fn is_approx_fixed_point(h: &DataFlowGraph) -> Result<bool> {
    guard(h)?;
    let params = SimplifyParams {
        use_exact_p: true,
        bandwidth: Bandwidth::Fixed(1e-12),
        ..SimplifyParams::default()
    };
    Ok(approx_simplify(h, &params)?.vertex_count() == h.vertex_count())
}

fn count_pairs(h: &DataFlowGraph, same_depth: bool) -> Result<usize> {
    guard(h)?;
    let mut n = 0;
    for_each_isomorphic_cone_pair(h, ExactOptions::default(), same_depth, |_, _| {
        n += 1;
        true
    })?;
    Ok(n)
}

/// Unordered same-depth vertex pairs with isomorphic maximal rooted
/// subgraphs.
pub fn count_rooted_iso_pairs(h: &DataFlowGraph) -> Result<usize> {
    count_pairs(h, true)
}

/// Unordered vertex pairs of any depth with isomorphic maximal rooted
/// subgraphs.
pub fn count_rooted_iso_pairs_any_depth(h: &DataFlowGraph) -> Result<usize> {
    count_pairs(h, false)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub samples: usize,
    pub fixed_points: usize,
    pub fixed_point_fraction: f64,
    /// Mean same-depth isomorphic pair count.
    pub mean_iso_pairs: f64,
    /// Mean isomorphic pair count without the depth restriction.
    pub mean_iso_pairs_any_depth: f64,
    pub mean_vertices: f64,
    pub sampler: SamplerConfig,
    pub seed: u64,
}

/// Samples `samples` bounded subgraphs (sample `i` from substream `i`) and
/// aggregates the fixed-point fraction and mean isomorphic-pair counts.
pub fn run_quality_study(samples: usize, seed: u64, cfg: &SamplerConfig) -> Result<QualityReport> {
    if samples == 0 {
        return Err(Error::InvalidParam("quality study needs at least one sample".into()));
    }
    let sampler = LayeredSampler::new(*cfg)?;
    let per: Vec<(bool, usize, usize, usize)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let h = sampler.sample(&mut rng).to_graph(&Label::other());
            Ok((
                is_approx_fixed_point(&h)?,
                count_rooted_iso_pairs(&h)?,
                count_rooted_iso_pairs_any_depth(&h)?,
                h.vertex_count(),
            ))
        })
        .collect::<Result<_>>()?;
    let n = samples as f64;
    let mean = |f: fn(&(bool, usize, usize, usize)) -> usize| {
        per.iter().map(|p| f(p) as f64).sum::<f64>() / n
    };
    let fixed_points = per.iter().filter(|p| p.0).count();
    Ok(QualityReport {
        samples,
        fixed_points,
        fixed_point_fraction: fixed_points as f64 / n,
        mean_iso_pairs: mean(|p| p.1),
        mean_iso_pairs_any_depth: mean(|p| p.2),
        mean_vertices: mean(|p| p.3),
        sampler: *cfg,
        seed,
    })
}
