// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::*;
use dfgprint::cli::config::Settings;
use dfgprint::cli::pipeline::{build_corpus, process, run_pipeline, CorpusSpec};
use dfgprint::fis::{is_subgraph, nfis, FisParams};
use dfgprint::quality::{build_gn, run_quality_study, SamplerConfig};
use dfgprint::rng::substream;
use dfgprint::simplify::{approx_simplify, exact_visit_probability, monte_carlo_visits, SimplifyParams};
use dfgprint::synth::{gen_trace, Strategy, WorkloadKind, WorkloadSpec};
use dfgprint::trace::{ingest_raw, IngestConfig};
use dfgprint::{DataFlowGraph, VertexId};
use rand::RngExt;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(limit: Duration, t: Duration) -> bool {
    t <= limit
}

fn visit_graphs() -> Vec<DataFlowGraph> {
    let mut rng = substream(101, 0);
    (0..100)
        .map(|_| {
            let n = rng.random_range(2..=50usize);
            let m = rng.random_range(1..=2 * n);
            random_dag(&mut rng, n, m, &["a", "b", "c"])
        })
        .collect()
}

fn c1_visit_oracle() -> Outcome {
    let start = Instant::now();
    let walks = 10_000u64;
    let (mut ok, mut total) = (0usize, 0usize);
    for (i, g) in visit_graphs().iter().enumerate() {
        let exact = exact_visit_probability(g).unwrap();
        let mc = monte_carlo_visits(g, walks, i as u64).unwrap();
        for (v, p) in &exact {
            let sigma = (p * (1.0 - p) / walks as f64).sqrt();
            total += 1;
            if (mc.frequency[v] - p).abs() <= 4.0 * sigma {
                ok += 1;
            }
        }
    }
    let t = start.elapsed();
    let frac = ok as f64 / total as f64;
    outcome(
        frac >= 0.99 && within(Duration::from_secs(30), t),
        format!("{:.2}% of {total} vertices within 4 sigma (need 99%), {:.1?} (limit 30 s)", 100.0 * frac, t),
    )
}

fn c2_source_mass() -> Outcome {
    let mut worst = 0.0f64;
    let mut exact_counts = true;
    let graphs = visit_graphs();
    for (i, g) in graphs.iter().enumerate() {
        let p = exact_visit_probability(g).unwrap();
        let mass: f64 = g.sources().map(|v| p[&v]).sum();
        worst = worst.max((mass - 1.0).abs());
        let mc = monte_carlo_visits(g, 5_000, i as u64).unwrap();
        exact_counts &= mc.source_visits(g) == mc.walks;
    }
    outcome(
        worst <= 1e-12 && exact_counts,
        format!(
            "{} graphs: max |sum P - 1| = {worst:.1e} (limit 1e-12), walk endings at sources exact: {exact_counts}",
            graphs.len()
        ),
    )
}

/// Two copies of a random rooted cone; every cone vertex gets the same
/// number of extra consumers in both copies.
fn twin_cones(rng: &mut dfgprint::rng::StreamRng) -> (DataFlowGraph, Vec<(VertexId, VertexId)>) {
    let m = rng.random_range(2..=10u64);
    let labels = ["a", "b"];
    let cone_labels: Vec<&str> = (0..m).map(|_| labels[rng.random_range(0..2)]).collect();
    let mut cone_edges = Vec::new();
    for j in 1..m {
        cone_edges.push((rng.random_range(0..j), j));
        for i in 0..j {
            if rng.random_range(0..4) == 0 {
                cone_edges.push((i, j));
            }
        }
    }
    let mut g = DataFlowGraph::new();
    let off = 100;
    for (v, l) in cone_labels.iter().enumerate() {
        g.add_vertex(VertexId(v as u64), lab(l));
        g.add_vertex(VertexId(off + v as u64), lab(l));
    }
    for &(s, d) in &cone_edges {
        g.add_edge(VertexId(s), VertexId(d));
        g.add_edge(VertexId(off + s), VertexId(off + d));
    }
    let mut next = 1000;
    for v in 1..m {
        for _ in 0..rng.random_range(0..3) {
            g.add_vertex(VertexId(next), lab("c"));
            if rng.random_range(0..2) == 0 {
                g.add_edge(VertexId(next), VertexId(v));
                g.add_edge(VertexId(next), VertexId(off + v));
            } else {
                g.add_vertex(VertexId(next + 1), lab("c"));
                g.add_edge(VertexId(next), VertexId(v));
                g.add_edge(VertexId(next + 1), VertexId(off + v));
            }
            next += 2;
        }
    }
    let pairs = (0..m).map(|v| (VertexId(v), VertexId(off + v))).collect();
    (g, pairs)
}

fn c3_twin_cones() -> Outcome {
    let mut rng = substream(103, 0);
    let mut worst = 0.0f64;
    let mut broken = 0;
    let cases = 200;
    for _ in 0..cases {
        let (g, pairs) = twin_cones(&mut rng);
        let p = exact_visit_probability(&g).unwrap();
        for &(a, b) in &pairs {
            worst = worst.max((p[&a] - p[&b]).abs());
        }
        // Breaking the in-degree match on one twin; reported, not required.
        let (r1, r2) = pairs[0];
        let (_, leaf) = pairs[pairs.len() - 1];
        let mut h = g.clone();
        h.add_vertex(VertexId(5000), lab("c"));
        h.add_edge(VertexId(5000), leaf);
        let q = exact_visit_probability(&h).unwrap();
        if (q[&r1] - q[&r2]).abs() > 1e-12 {
            broken += 1;
        }
    }
    outcome(
        worst <= 1e-12,
        format!(
            "{cases} twin-cone graphs: max |P(twin) - P(twin')| = {worst:.1e} (limit 1e-12); \
             unmatched in-degree changed the root pair in {broken}/{cases} (excluded)"
        ),
    )
}

fn c4_gn_sizes() -> Outcome {
    let start = Instant::now();
    let sizes = build_gn(3).unwrap().layer_sizes();
    let t = start.elapsed();
    outcome(
        sizes == [1, 2, 8, 2048] && within(Duration::from_secs(5), t),
        format!("layer sizes {sizes:?} (expected [1, 2, 8, 2048]), {t:.1?} (limit 5 s)"),
    )
}

fn c5_quality() -> Outcome {
    let start = Instant::now();
    let r = run_quality_study(5000, 2024, &SamplerConfig::default()).unwrap();
    let t = start.elapsed();
    let frac_ok = (0.80..=0.98).contains(&r.fixed_point_fraction);
    let iso_ok = (4.0..=10.0).contains(&r.mean_iso_pairs_any_depth);
    outcome(
        frac_ok && iso_ok && within(Duration::from_secs(300), t),
        format!(
            "{} samples: fixed-point fraction {:.4} (band [0.80, 0.98]), mean isomorphic pairs {:.3} \
             (any depth, band [4, 10]; same depth {:.3}), {t:.1?} (limit 300 s)",
            r.samples, r.fixed_point_fraction, r.mean_iso_pairs_any_depth, r.mean_iso_pairs
        ),
    )
}

fn isomorphic(a: &DataFlowGraph, b: &DataFlowGraph) -> bool {
    a.vertex_count() == b.vertex_count()
        && a.edge_count() == b.edge_count()
        && is_subgraph(a, b).unwrap()
}

fn c6_repetition_collapse() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in [WorkloadKind::MinerMixrounds, WorkloadKind::MinerSha2like] {
        let mut fps = Vec::new();
        for r in [10, 25, 50, 100] {
            let t = gen_trace(&WorkloadSpec::new(kind, r, 0)).unwrap();
            let g = ingest_raw(t.events, &IngestConfig::unbounded()).unwrap();
            let s = approx_simplify(&g, &SimplifyParams::exact()).unwrap();
            fps.push((g, s));
        }
        let same = fps.windows(2).all(|w| isomorphic(&w[0].1, &w[1].1));
        let (raw, fp) = &fps[3];
        let red = 1.0 - fp.vertex_count() as f64 / raw.vertex_count() as f64;
        pass &= same && red >= 0.90;
        parts.push(format!(
            "{kind}: |V'| = {:?}, isomorphic {same}, reduction at R=100 {:.1}%",
            fps.iter().map(|(_, s)| s.vertex_count()).collect::<Vec<_>>(),
            100.0 * red
        ));
    }
    outcome(pass, format!("{} (need >= 90%)", parts.join("; ")))
}

fn c7_nfis() -> Outcome {
    let mut rng = substream(107, 0);
    let mut worst = 0.0f64;
    let (mut lo, mut hi) = (1.0f64, 0.0f64);
    let mut self_ok = true;
    for case in 0..40u64 {
        let m = rng.random_range(3..=12);
        let h = random_dag(&mut rng, 8, m, &["a", "b"]);
        let m = rng.random_range(6..=14);
        let g = random_dag(&mut rng, 9, m, &["a", "b"]);
        let n = if case % 4 == 0 { 4 } else { 3 };
        let exact = exact_nfis(&h, &g, n, 50);
        lo = lo.min(exact);
        hi = hi.max(exact);
        let p = FisParams { n, k: 20_000, seed: case, ..FisParams::default() };
        worst = worst.max((nfis(&h, &g, &p).unwrap().value - exact).abs());
        self_ok &= nfis(&h, &h, &FisParams { k: 500, ..p }).unwrap().value == 1.0;
    }
    let (mut subset_ok, mut mono_ok) = (true, true);
    for case in 0..100u64 {
        let m = rng.random_range(6..=20);
        let g = random_dag(&mut rng, 10, m, &["a", "b", "c"]);
        let mut edges: Vec<_> = g.edges().collect();
        for i in 0..edges.len() {
            let j = rng.random_range(i..edges.len());
            edges.swap(i, j);
        }
        edges.truncate(rng.random_range(1..=edges.len()));
        let h = edge_subgraph(&g, &edges);
        let p = FisParams { n: 3, k: 200, seed: case, ..FisParams::default() };
        subset_ok &= nfis(&h, &g, &p).unwrap().value == 1.0;
        let base = random_dag(&mut rng, 8, 10, &["a", "b", "c"]);
        let mut bigger = base.clone();
        for extra in 8..12u64 {
            bigger.add_vertex(VertexId(extra), lab(["a", "b", "c"][(extra % 3) as usize]));
            bigger.add_edge(VertexId(extra), VertexId(rng.random_range(0..extra)));
        }
        mono_ok &= nfis(&h, &base, &p).unwrap().hits <= nfis(&h, &bigger, &p).unwrap().hits;
    }
    outcome(
        worst <= 0.03 && self_ok && subset_ok && mono_ok,
        format!(
            "40 graph pairs (<= 12 edges, exact scores {:.3}..{hi:.3}): max |MC - exact| = {worst:.4} \
             (limit 0.03); self-score 1.0: {self_ok}; subset soundness on 100: {subset_ok}; \
             superset monotonicity on 100: {mono_ok}",
            lo.abs()
        ),
    )
}

fn c8_detection() -> Outcome {
    let start = Instant::now();
    let mut min_obf = f64::INFINITY;
    let mut max_benign = 0.0f64;
    let mut worst_obf = String::new();
    for seed in 0..5 {
        let s = Settings { seed, ..Settings::default() };
        let (fps, samples) = build_corpus(&CorpusSpec::default(), s.synth_seed()).unwrap();
        let fps: BTreeMap<WorkloadKind, DataFlowGraph> = fps
            .iter()
            .map(|t| (t.kind, process(t, &s).unwrap().simplified))
            .collect();
        let p = s.fis_params();
        for t in &samples {
            let g = process(t, &s).unwrap().simplified;
            if !t.kind.is_miner() {
                for h in fps.values() {
                    max_benign = max_benign.max(nfis(h, &g, &p).unwrap().value);
                }
            } else if matches!(t.strategy, Some(Strategy::Split | Strategy::Interleave)) {
                let v = nfis(&fps[&t.kind], &g, &p).unwrap().value;
                if v < min_obf {
                    min_obf = v;
                    worst_obf = format!("{} (seed {seed})", t.name);
                }
            }
        }
    }
    let t = start.elapsed();
    outcome(
        min_obf >= 0.65 && max_benign < 0.65 && within(Duration::from_secs(300), t),
        format!(
            "5 master seeds, n=5 k=500: min split/interleave family score {min_obf:.3} at {worst_obf} \
             (need >= 0.65); max benign score {max_benign:.3} (need < 0.65); {t:.1?} (limit 300 s)"
        ),
    )
}

fn c9_determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let s = Settings { seed: 77, ..Settings::default() };
    let ra = run_pipeline(a.path(), &s, &CorpusSpec::default()).unwrap();
    run_pipeline(b.path(), &s, &CorpusSpec::default()).unwrap();
    let mut differing = Vec::new();
    for f in &ra.report_files {
        let rel = f.strip_prefix(a.path()).unwrap();
        if std::fs::read(f).unwrap() != std::fs::read(b.path().join(rel)).unwrap() {
            differing.push(rel.display().to_string());
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "{} report files compared byte for byte, {} differ {:?}",
            ra.report_files.len(),
            differing.len(),
            differing
        ),
    )
}

fn c10_shadow_stack() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for kind in WorkloadKind::ALL {
        for rounds in [1, 7, 30] {
            for seed in 0..3 {
                for noise in [0.0, 0.25] {
                    let spec = WorkloadSpec { kind, rounds, seed, noise_rate: noise };
                    let t = gen_trace(&spec).unwrap();
                    let g = ingest_raw(t.events, &IngestConfig::unbounded()).unwrap();
                    checked += 1;
                    let same = g.vertices().eq(t.truth.vertices()) && g.edges().eq(t.truth.edges());
                    if !same {
                        bad.push(format!("{kind} R={rounds} seed={seed} noise={noise}"));
                    }
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{checked} workloads, ingested graph equals ground truth in all but {} {:?}", bad.len(), bad),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("visit-probability oracle agreement", c1_visit_oracle),
        ("source-mass conservation", c2_source_mass),
        ("twin-cone probability equality", c3_twin_cones),
        ("G_3 layer sizes", c4_gn_sizes),
        ("approximation-quality study", c5_quality),
        ("repetition collapse", c6_repetition_collapse),
        ("n-FIS brute-force agreement", c7_nfis),
        ("synthetic end-to-end detection", c8_detection),
        ("pipeline determinism", c9_determinism),
        ("shadow-stack reconstruction", c10_shadow_stack),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
