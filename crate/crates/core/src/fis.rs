// SPDX-License-Identifier: Apache-2.0

//! n-fragment inclusion score.
//!
//! `nfis(h, g)` estimates the probability that a random connected fragment
//! of `h` with `n` edges occurs in `g` as a labeled, direction-preserving,
//! non-induced subgraph. Fragments are drawn by edge growth: start from a
//! uniformly random edge, then repeatedly add a uniformly random unused edge
//! that touches the fragment (ignoring direction).

use std::collections::{BTreeMap, HashMap};

use rand::RngExt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DataFlowGraph, Indexed, Label};
use crate::rng::{substream, StreamRng};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FisParams {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub max_restarts: usize,
}

impl Default for FisParams {
    fn default() -> Self {
        FisParams {
            n: 5,
            k: 500,
            seed: 0,
            max_restarts: 50,
        }
    }
}

impl FisParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 {
            return Err(Error::InvalidParam(format!(
                "n and k must be at least 1 (n={}, k={})",
                self.n, self.k
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FisScore {
    pub value: f64,
    pub hits: usize,
    pub trials: usize,
    /// Smallest fragment size actually used; below `n` only when `h` has no
    /// weak component with `n` edges.
    pub effective_n: usize,
}

/// A connected fragment of a source graph: the chosen edges (indices into
/// the source's ascending edge list) and the induced labeled graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    pub edges: Vec<usize>,
    pub graph: DataFlowGraph,
}

impl Fragment {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// Precomputed edge incidence of a fragment source graph.
#[derive(Clone, Debug)]
pub struct FragmentSampler {
    idx: Indexed,
    edges: Vec<(usize, usize)>,
    incident: Vec<Vec<usize>>,
}

impl FragmentSampler {
    pub fn new(h: &DataFlowGraph) -> Result<Self> {
        let idx = Indexed::build(h)?;
        let mut edges = Vec::with_capacity(h.edge_count());
        let mut incident = vec![Vec::new(); idx.len()];
        for (s, d) in h.edges() {
            let (s, d) = (idx.position(s).unwrap(), idx.position(d).unwrap());
            incident[s].push(edges.len());
            incident[d].push(edges.len());
            edges.push((s, d));
        }
        if edges.is_empty() {
            return Err(Error::NoEdges);
        }
        Ok(FragmentSampler {
            idx,
            edges,
            incident,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// One growth attempt; returns the chosen edge indices (fewer than `n`
    /// when growth got stuck).
    fn grow(&self, n: usize, rng: &mut StreamRng) -> Vec<usize> {
        let first = rng.random_range(0..self.edges.len());
        let mut chosen = vec![first];
        let (a, b) = self.edges[first];
        let mut verts = if a == b { vec![a] } else { vec![a, b] };
        let mut frontier = Vec::new();
        while chosen.len() < n {
            frontier.clear();
            for &v in &verts {
                for &e in &self.incident[v] {
                    if !chosen.contains(&e) && !frontier.contains(&e) {
                        frontier.push(e);
                    }
                }
            }
            if frontier.is_empty() {
                break;
            }
            let e = frontier[rng.random_range(0..frontier.len())];
            chosen.push(e);
            let (s, d) = self.edges[e];
            for x in [s, d] {
                if !verts.contains(&x) {
                    verts.push(x);
                }
            }
        }
        chosen
    }

    /// Edge indices of one fragment, sorted. Restarts from a fresh edge when
    /// growth gets stuck; after `max_restarts` restarts the largest attempt
    /// is returned.
    pub fn sample_edges(&self, n: usize, max_restarts: usize, rng: &mut StreamRng) -> Vec<usize> {
        let mut best: Vec<usize> = Vec::new();
        for _ in 0..=max_restarts {
            let got = self.grow(n, rng);
            if got.len() >= n {
                best = got;
                break;
            }
            if got.len() > best.len() {
                best = got;
            }
        }
        best.sort_unstable();
        best
    }

    pub fn fragment(&self, edges: Vec<usize>) -> Fragment {
        let mut graph = DataFlowGraph::new();
        for &e in &edges {
            let (s, d) = self.edges[e];
            for x in [s, d] {
                graph.add_vertex(self.idx.ids[x], self.idx.labels[x].clone());
            }
            graph.add_edge(self.idx.ids[s], self.idx.ids[d]);
        }
        Fragment { edges, graph }
    }

    fn pattern(&self, edges: &[usize]) -> Pattern {
        let mut local: Vec<usize> = Vec::new();
        let pos = |x: usize, local: &mut Vec<usize>| match local.iter().position(|&y| y == x) {
            Some(p) => p,
            None => {
                local.push(x);
                local.len() - 1
            }
        };
        let pe: Vec<(usize, usize)> = edges
            .iter()
            .map(|&e| {
                let (s, d) = self.edges[e];
                (pos(s, &mut local), pos(d, &mut local))
            })
            .collect();
        Pattern {
            labels: local.iter().map(|&x| self.idx.labels[x].clone()).collect(),
            edges: pe,
        }
    }
}

/// Draws one fragment with `n` edges (or the largest reachable size).
pub fn sample_fragment(
    h: &DataFlowGraph,
    n: usize,
    max_restarts: usize,
    rng: &mut StreamRng,
) -> Result<Fragment> {
    if n == 0 {
        return Err(Error::InvalidParam("fragment size must be at least 1".into()));
    }
    let s = FragmentSampler::new(h)?;
    let edges = s.sample_edges(n, max_restarts, rng);
    Ok(s.fragment(edges))
}

/// Small labeled pattern with dense vertex positions.
struct Pattern {
    labels: Vec<Label>,
    edges: Vec<(usize, usize)>,
}

/// Indexed host graph for repeated monomorphism queries.
pub struct Target {
    label_code: HashMap<Label, u32>,
    codes: Vec<u32>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
    by_label: HashMap<u32, Vec<usize>>,
}

impl Target {
    pub fn new(g: &DataFlowGraph) -> Result<Self> {
        let idx = Indexed::build(g)?;
        let mut label_code = HashMap::new();
        let mut codes = Vec::with_capacity(idx.len());
        let mut by_label: HashMap<u32, Vec<usize>> = HashMap::new();
        for (v, l) in idx.labels.iter().enumerate() {
            let next = label_code.len() as u32;
            let c = *label_code.entry(l.clone()).or_insert(next);
            codes.push(c);
            by_label.entry(c).or_default().push(v);
        }
        let sorted = |mut adj: Vec<Vec<usize>>| {
            for a in &mut adj {
                a.sort_unstable();
            }
            adj
        };
        Ok(Target {
            label_code,
            codes,
            out: sorted(idx.out),
            inn: sorted(idx.inn),
            by_label,
        })
    }

    pub fn contains(&self, pattern: &DataFlowGraph) -> Result<bool> {
        let idx = Indexed::build(pattern)?;
        let mut edges = Vec::new();
        for (v, outs) in idx.out.iter().enumerate() {
            for &w in outs {
                edges.push((v, w));
            }
        }
        Ok(self.embeds(&Pattern {
            labels: idx.labels,
            edges,
        }))
    }

    fn embeds(&self, p: &Pattern) -> bool {
        let n = p.labels.len();
        if n == 0 {
            return true;
        }
        let mut codes = Vec::with_capacity(n);
        for l in &p.labels {
            match self.label_code.get(l) {
                Some(&c) => codes.push(c),
                None => return false,
            }
        }
        let mut pout = vec![Vec::new(); n];
        let mut pin = vec![Vec::new(); n];
        for &(s, d) in &p.edges {
            pout[s].push(d);
            pin[d].push(s);
        }
        let rarity = |v: usize| self.by_label.get(&codes[v]).map_or(0, Vec::len);

        // Matching order: rarest label first, then always extend along an
        // edge to the vertex with most links into the ordered prefix.
        let mut order: Vec<usize> = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        let mut anchor: Vec<Option<(usize, bool)>> = Vec::with_capacity(n);
        while order.len() < n {
            let links = |v: usize| {
                pout[v].iter().chain(&pin[v]).filter(|&&w| placed[w]).count()
            };
            let next = (0..n)
                .filter(|&v| !placed[v])
                .max_by_key(|&v| {
                    (
                        links(v),
                        usize::MAX - rarity(v),
                        pout[v].len() + pin[v].len(),
                        usize::MAX - v,
                    )
                })
                .unwrap();
            // (mapped neighbor, true if edge runs neighbor -> next)
            let a = pin[next]
                .iter()
                .find(|&&w| placed[w])
                .map(|&w| (w, true))
                .or_else(|| pout[next].iter().find(|&&w| placed[w]).map(|&w| (w, false)));
            placed[next] = true;
            order.push(next);
            anchor.push(a);
        }

        let mut state = Search {
            t: self,
            codes: &codes,
            pout: &pout,
            pin: &pin,
            order: &order,
            anchor: &anchor,
            map: vec![usize::MAX; n],
            used: vec![false; self.codes.len()],
        };
        state.run(0)
    }
}

struct Search<'a> {
    t: &'a Target,
    codes: &'a [u32],
    pout: &'a [Vec<usize>],
    pin: &'a [Vec<usize>],
    order: &'a [usize],
    anchor: &'a [Option<(usize, bool)>],
    map: Vec<usize>,
    used: Vec<bool>,
}

impl Search<'_> {
    fn run(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let u = self.order[depth];
        let empty = Vec::new();
        let candidates: &Vec<usize> = match self.anchor[depth] {
            Some((w, true)) => &self.t.out[self.map[w]],
            Some((w, false)) => &self.t.inn[self.map[w]],
            None => self.t.by_label.get(&self.codes[u]).unwrap_or(&empty),
        };
        for &c in candidates {
            if self.t.codes[c] != self.codes[u]
                || self.used[c]
                || self.t.out[c].len() < self.pout[u].len()
                || self.t.inn[c].len() < self.pin[u].len()
                || !self.edges_ok(u, c)
            {
                continue;
            }
            self.map[u] = c;
            self.used[c] = true;
            if self.run(depth + 1) {
                return true;
            }
            self.used[c] = false;
            self.map[u] = usize::MAX;
        }
        false
    }

    fn edges_ok(&self, u: usize, c: usize) -> bool {
        self.pout[u]
            .iter()
            .filter(|&&w| self.map[w] != usize::MAX)
            .all(|&w| self.t.out[c].binary_search(&self.map[w]).is_ok())
            && self.pin[u]
                .iter()
                .filter(|&&w| self.map[w] != usize::MAX)
                .all(|&w| self.t.inn[c].binary_search(&self.map[w]).is_ok())
    }
}

/// True iff `frag` has a label- and direction-preserving injective
/// embedding into `g` (extra edges in `g` are allowed).
pub fn is_subgraph(frag: &DataFlowGraph, g: &DataFlowGraph) -> Result<bool> {
    Target::new(g)?.contains(frag)
}

/// Monte Carlo n-FIS of `h` in `g`.
pub fn nfis(h: &DataFlowGraph, g: &DataFlowGraph, params: &FisParams) -> Result<FisScore> {
    let sampler = FragmentSampler::new(h)?;
    let target = Target::new(g)?;
    nfis_prepared(&sampler, &target, params)
}

/// n-FIS with reusable sampler and target indexes.
///
/// Trial `i` draws from substream `i` of the seed, so the fragment sequence
/// depends only on `h` and the seed. Distinct fragments are matched once,
/// in parallel.
pub fn nfis_prepared(
    sampler: &FragmentSampler,
    target: &Target,
    params: &FisParams,
) -> Result<FisScore> {
    params.validate()?;
    let draws: Vec<Vec<usize>> = (0..params.k)
        .map(|i| {
            let mut rng = substream(params.seed, i as u64);
            sampler.sample_edges(params.n, params.max_restarts, &mut rng)
        })
        .collect();
    let effective_n = draws.iter().map(Vec::len).min().unwrap_or(0);
    let mut distinct: BTreeMap<&[usize], bool> = draws.iter().map(|d| (&d[..], false)).collect();
    let keys: Vec<&[usize]> = distinct.keys().copied().collect();
    let found: Vec<bool> = keys
        .par_iter()
        .map(|edges| target.embeds(&sampler.pattern(edges)))
        .collect();
    for (k, f) in keys.into_iter().zip(found) {
        distinct.insert(k, f);
    }
    let hits = draws.iter().filter(|d| distinct[&d[..]]).count();
    Ok(FisScore {
        value: hits as f64 / params.k as f64,
        hits,
        trials: params.k,
        effective_n,
    })
}
