// SPDX-License-Identifier: Apache-2.0

//! Backward random walks.
//!
//! A walk starts at a uniformly random vertex and keeps stepping to a
//! uniformly random in-neighbor until it reaches a vertex with no incoming
//! edge. `P(v)` is the probability that a walk visits `v`.

use std::collections::BTreeMap;

use rand::RngExt;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{DataFlowGraph, Indexed, VertexId};
use crate::rng::substream;

const WALKS_PER_CHUNK: u64 = 4096;

/// Exact visit probabilities from the child recursion
/// `P(v) = 1/|V| + sum over children c of P(c) / indegree(c)`,
/// evaluated children-first.
pub fn exact_visit_probability(g: &DataFlowGraph) -> Result<BTreeMap<VertexId, f64>> {
    let idx = Indexed::build(g)?;
    let p = exact_dense(&idx)?;
    Ok(idx.ids.iter().copied().zip(p).collect())
}

pub(crate) fn exact_dense(idx: &Indexed) -> Result<Vec<f64>> {
    let order = idx.topological_order()?;
    let base = 1.0 / idx.len() as f64;
    let mut p = vec![0.0; idx.len()];
    for &v in order.iter().rev() {
        let mut sum = base;
        for &c in &idx.out[v] {
            sum += p[c] / idx.inn[c].len() as f64;
        }
        p[v] = sum;
    }
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VisitStats {
    pub walks: u64,
    pub visits: BTreeMap<VertexId, u64>,
    pub frequency: BTreeMap<VertexId, f64>,
    pub exact_p: Option<BTreeMap<VertexId, f64>>,
}

impl VisitStats {
    /// Total visits over vertices without incoming edges; each walk ends at
    /// exactly one of them, so this equals `walks`.
    pub fn source_visits(&self, g: &DataFlowGraph) -> u64 {
        self.visits
            .iter()
            .filter(|(v, _)| g.in_degree(**v) == 0)
            .map(|(_, m)| *m)
            .sum()
    }

    pub fn with_exact(mut self, g: &DataFlowGraph) -> Result<Self> {
        self.exact_p = Some(exact_visit_probability(g)?);
        Ok(self)
    }
}

/// Runs `walks` independent backward walks. Walks are split into fixed-size
/// chunks, each with its own substream, so results do not depend on thread
/// scheduling.
pub fn monte_carlo_visits(g: &DataFlowGraph, walks: u64, seed: u64) -> Result<VisitStats> {
    if walks == 0 {
        return Err(Error::InvalidParam("walk count must be positive".into()));
    }
    let idx = Indexed::build(g)?;
    idx.topological_order()?;
    let counts = monte_carlo_dense(&idx, walks, seed);
    let visits: BTreeMap<VertexId, u64> = idx.ids.iter().copied().zip(counts).collect();
    let frequency = visits
        .iter()
        .map(|(&v, &m)| (v, m as f64 / walks as f64))
        .collect();
    Ok(VisitStats {
        walks,
        visits,
        frequency,
        exact_p: None,
    })
}

pub(crate) fn monte_carlo_dense(idx: &Indexed, walks: u64, seed: u64) -> Vec<u64> {
    let n = idx.len();
    if n == 0 {
        return Vec::new();
    }
    let chunks = walks.div_ceil(WALKS_PER_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = substream(seed, chunk);
            let todo = WALKS_PER_CHUNK.min(walks - chunk * WALKS_PER_CHUNK);
            let mut counts = vec![0u64; n];
            for _ in 0..todo {
                let mut v = rng.random_range(0..n);
                loop {
                    counts[v] += 1;
                    let ins = &idx.inn[v];
                    if ins.is_empty() {
                        break;
                    }
                    v = ins[rng.random_range(0..ins.len())];
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    fn v(x: u64) -> VertexId {
        VertexId(x)
    }

    /// Enumerates every backward walk with its probability.
    fn enumerate_walks(g: &DataFlowGraph) -> BTreeMap<VertexId, f64> {
        fn go(g: &DataFlowGraph, at: VertexId, prob: f64, acc: &mut BTreeMap<VertexId, f64>) {
            *acc.entry(at).or_insert(0.0) += prob;
            let ins: Vec<_> = g.predecessors(at).collect();
            for p in &ins {
                go(g, *p, prob / ins.len() as f64, acc);
            }
        }
        let mut acc = BTreeMap::new();
        let n = g.vertex_count() as f64;
        for s in g.vertex_ids() {
            go(g, s, 1.0 / n, &mut acc);
        }
        acc
    }

    #[test]
    fn single_edge() {
        let g = graph(&[(1, "a"), (2, "b")], &[(1, 2)]);
        let p = exact_visit_probability(&g).unwrap();
        assert_eq!(p[&v(2)], 0.5);
        assert_eq!(p[&v(1)], 1.0);
    }

    #[test]
    fn diamond_matches_hand_values_and_enumeration() {
        let g = diamond("o", "x", "x", "a");
        let p = exact_visit_probability(&g).unwrap();
        assert_eq!(p[&v(3)], 0.25);
        assert_eq!(p[&v(1)], 0.375);
        assert_eq!(p[&v(2)], 0.375);
        assert_eq!(p[&v(0)], 1.0);
        let e = enumerate_walks(&g);
        for (k, val) in &p {
            assert!((e[k] - val).abs() < 1e-15);
        }
    }

    #[test]
    fn singleton_is_certain() {
        let g = graph(&[(5, "x")], &[]);
        assert_eq!(exact_visit_probability(&g).unwrap()[&v(5)], 1.0);
    }

    #[test]
    fn monte_carlo_edge_and_diamond() {
        let n = 10_000u64;
        let g = graph(&[(1, "a"), (2, "b")], &[(1, 2)]);
        let s = monte_carlo_visits(&g, n, 3).unwrap();
        assert_eq!(s.frequency[&v(1)], 1.0);
        let sigma = (0.25 / n as f64).sqrt();
        assert!((s.frequency[&v(2)] - 0.5).abs() <= 3.0 * sigma);

        let g = diamond("o", "x", "x", "a");
        let s = monte_carlo_visits(&g, n, 4).unwrap();
        assert_eq!(s.frequency[&v(0)], 1.0);
        let sigma = (0.375 * 0.625 / n as f64).sqrt();
        assert!((s.frequency[&v(1)] - 0.375).abs() <= 3.0 * sigma);
        assert_eq!(s.source_visits(&g), n);
    }

    #[test]
    fn monte_carlo_is_deterministic_per_seed() {
        let g = diamond("o", "x", "x", "a");
        let a = monte_carlo_visits(&g, 9000, 11).unwrap();
        let b = monte_carlo_visits(&g, 9000, 11).unwrap();
        let c = monte_carlo_visits(&g, 9000, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.visits, c.visits);
    }

    #[test]
    fn zero_walks_rejected() {
        let g = graph(&[(1, "a")], &[]);
        assert!(monte_carlo_visits(&g, 0, 0).is_err());
    }
}
