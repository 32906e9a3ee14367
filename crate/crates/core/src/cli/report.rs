// SPDX-License-Identifier: Apache-2.0

//! Report types shared by the subcommands. Each renders as pretty JSON or as
//! an aligned text table.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fis::{nfis_prepared, FisParams, FisScore, FragmentSampler, Target};
use crate::graph::DataFlowGraph;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    #[default]
    Table,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "table" => Ok(Format::Table),
            _ => Err(Error::InvalidParam(format!(
                "unknown format {s:?} (expected json or table)"
            ))),
        }
    }
}

pub trait Report: Serialize {
    fn table(&self) -> String;

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Table => self.table(),
        }
    }
}

/// Left-aligned first column, right-aligned rest.
fn aligned(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width = vec![0usize; cols];
    for r in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        for (i, c) in r.iter().enumerate() {
            width[i] = width[i].max(c.chars().count());
        }
    }
    let mut out = String::new();
    for r in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        let mut line = String::new();
        for (i, c) in r.iter().enumerate() {
            if i == 0 {
                write!(line, "{c:<w$}", w = width[i]).unwrap();
            } else {
                write!(line, "  {c:>w$}", w = width[i]).unwrap();
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Malicious,
    Benign,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub fingerprint: String,
    pub score: FisScore,
    /// Threshold applied to this fingerprint.
    pub threshold: f64,
    pub hit: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionVerdict {
    pub sample: String,
    pub scores: Vec<ScoreEntry>,
    pub max_score: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

/// A scoring target: fingerprint name, graph and optional own threshold.
pub struct ScoringFingerprint<'a> {
    pub name: &'a str,
    pub graph: &'a DataFlowGraph,
    pub threshold: Option<f64>,
}

/// Scores `sample` against every fingerprint (`nfis(fingerprint, sample)`).
/// The sample is malicious when some score reaches its fingerprint's
/// threshold, `threshold` unless the fingerprint carries its own.
pub fn score_sample(
    sample_name: &str,
    sample: &DataFlowGraph,
    fingerprints: &[ScoringFingerprint<'_>],
    params: &FisParams,
    threshold: f64,
) -> Result<DetectionVerdict> {
    let target = Target::new(sample)?;
    let scores: Vec<ScoreEntry> = fingerprints
        .par_iter()
        .map(|f| {
            let score = nfis_prepared(&FragmentSampler::new(f.graph)?, &target, params)?;
            let t = f.threshold.unwrap_or(threshold);
            Ok(ScoreEntry {
                fingerprint: f.name.to_string(),
                hit: score.value >= t,
                threshold: t,
                score,
            })
        })
        .collect::<Result<_>>()?;
    let max_score = scores.iter().map(|s| s.score.value).fold(0.0, f64::max);
    let verdict = if scores.iter().any(|s| s.hit) {
        Verdict::Malicious
    } else {
        Verdict::Benign
    };
    Ok(DetectionVerdict {
        sample: sample_name.to_string(),
        scores,
        max_score,
        threshold,
        verdict,
    })
}

impl Report for DetectionVerdict {
    fn table(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .scores
            .iter()
            .map(|s| {
                vec![
                    s.fingerprint.clone(),
                    format!("{:.3}", s.score.value),
                    format!("{}/{}", s.score.hits, s.score.trials),
                    s.score.effective_n.to_string(),
                    format!("{:.2}", s.threshold),
                    if s.hit { "yes" } else { "no" }.to_string(),
                ]
            })
            .collect();
        let mut out = format!("sample {}\n", self.sample);
        out.push_str(&aligned(
            &strings(&["fingerprint", "score", "hits", "n", "threshold", "hit"]),
            &rows,
        ));
        writeln!(
            out,
            "max score {:.3}, verdict {}",
            self.max_score,
            match self.verdict {
                Verdict::Malicious => "malicious",
                Verdict::Benign => "benign",
            }
        )
        .unwrap();
        out
    }
}

/// A list of verdicts, one row per sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictList(pub Vec<DetectionVerdict>);

impl Report for VerdictList {
    fn table(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .0
            .iter()
            .map(|v| {
                let best = v
                    .scores
                    .iter()
                    .max_by(|a, b| a.score.value.total_cmp(&b.score.value))
                    .map_or("-".to_string(), |s| s.fingerprint.clone());
                vec![
                    v.sample.clone(),
                    format!("{:.3}", v.max_score),
                    best,
                    match v.verdict {
                        Verdict::Malicious => "malicious",
                        Verdict::Benign => "benign",
                    }
                    .to_string(),
                ]
            })
            .collect();
        aligned(&strings(&["sample", "max score", "best match", "verdict"]), &rows)
    }
}

/// `scores[i][j] = nfis(fingerprint i, graph j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub names: Vec<String>,
    pub scores: Vec<Vec<f64>>,
    pub params: FisParams,
}

pub fn score_matrix(graphs: &[(String, DataFlowGraph)], params: &FisParams) -> Result<ScoreMatrix> {
    let targets: Vec<Target> = graphs
        .iter()
        .map(|(_, g)| Target::new(g))
        .collect::<Result<_>>()?;
    let scores: Vec<Vec<f64>> = graphs
        .par_iter()
        .map(|(_, h)| {
            let sampler = FragmentSampler::new(h)?;
            targets
                .iter()
                .map(|t| Ok(nfis_prepared(&sampler, t, params)?.value))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(ScoreMatrix {
        names: graphs.iter().map(|(n, _)| n.clone()).collect(),
        scores,
        params: params.clone(),
    })
}

impl Report for ScoreMatrix {
    fn table(&self) -> String {
        let mut header = vec!["H \\ G".to_string()];
        header.extend(self.names.iter().cloned());
        let rows: Vec<Vec<String>> = self
            .names
            .iter()
            .zip(&self.scores)
            .map(|(n, r)| {
                let mut row = vec![n.clone()];
                row.extend(r.iter().map(|v| format!("{v:.3}")));
                row
            })
            .collect();
        aligned(&header, &rows)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    /// Tallies (predicted malicious, actually malicious) pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let mut c = Confusion::default();
        for (pred, actual) in pairs {
            match (pred, actual) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }
}

/// Metrics are `None` (rendered `N/A`) when their denominator is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub confusion: Confusion,
    pub accuracy: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
}

fn ratio(a: usize, b: usize) -> Option<f64> {
    (b > 0).then(|| a as f64 / b as f64)
}

impl MetricsReport {
    pub fn new(c: Confusion) -> Self {
        let sensitivity = ratio(c.tp, c.tp + c.fn_);
        let precision = ratio(c.tp, c.tp + c.fp);
        let f1 = match (precision, sensitivity) {
            (Some(p), Some(s)) if p + s > 0.0 => Some(2.0 * p * s / (p + s)),
            _ => None,
        };
        MetricsReport {
            confusion: c,
            accuracy: ratio(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn_),
            sensitivity,
            specificity: ratio(c.tn, c.tn + c.fp),
            precision,
            f1,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or("N/A".to_string(), |v| format!("{v:.4}"))
}

impl Report for MetricsReport {
    fn table(&self) -> String {
        let c = &self.confusion;
        let rows = vec![
            vec!["tp".into(), c.tp.to_string()],
            vec!["fp".into(), c.fp.to_string()],
            vec!["tn".into(), c.tn.to_string()],
            vec!["fn".into(), c.fn_.to_string()],
            vec!["accuracy".into(), opt(self.accuracy)],
            vec!["sensitivity".into(), opt(self.sensitivity)],
            vec!["specificity".into(), opt(self.specificity)],
            vec!["precision".into(), opt(self.precision)],
            vec!["f1".into(), opt(self.f1)],
        ];
        aligned(&strings(&["metric", "value"]), &rows)
    }
}

/// Parses a labels file: one `sample malicious|benign` pair per line,
/// `#` comments allowed.
pub fn parse_labels(text: &str) -> Result<BTreeMap<String, bool>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut it = body.split_whitespace();
        let (Some(name), Some(label), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::parse(i + 1, "expected `<sample> malicious|benign`"));
        };
        let malicious = match label {
            "malicious" => true,
            "benign" => false,
            _ => return Err(Error::parse(i + 1, format!("unknown label {label:?}"))),
        };
        if out.insert(name.to_string(), malicious).is_some() {
            return Err(Error::parse(i + 1, format!("sample {name:?} labeled twice")));
        }
    }
    Ok(out)
}

pub fn render_labels(labels: &BTreeMap<String, bool>) -> String {
    labels
        .iter()
        .map(|(n, m)| format!("{n} {}\n", if *m { "malicious" } else { "benign" }))
        .collect()
}

/// Reads a verdict file holding either one verdict or a list.
pub fn parse_verdicts(text: &str) -> Result<Vec<DetectionVerdict>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(DetectionVerdict),
        Many(Vec<DetectionVerdict>),
    }
    Ok(match serde_json::from_str(text)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

/// Confusion metrics of `verdicts` against `labels`; every verdict needs a
/// label.
pub fn evaluate(verdicts: &[DetectionVerdict], labels: &BTreeMap<String, bool>) -> Result<MetricsReport> {
    let pairs = verdicts
        .iter()
        .map(|v| {
            let actual = labels.get(&v.sample).ok_or_else(|| {
                Error::InvalidParam(format!("no label for sample {:?}", v.sample))
            })?;
            Ok((v.verdict == Verdict::Malicious, *actual))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricsReport::new(Confusion::from_pairs(pairs)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionRow {
    pub sample: String,
    pub vertices: usize,
    pub edges: usize,
    pub vertices_after: usize,
    pub edges_after: usize,
    /// `1 - after / before`; `None` for an empty input.
    pub vertex_reduction: Option<f64>,
    pub edge_reduction: Option<f64>,
}

impl ReductionRow {
    pub fn new(sample: &str, before: &DataFlowGraph, after: &DataFlowGraph) -> Self {
        let red = |a: usize, b: usize| (b > 0).then(|| 1.0 - a as f64 / b as f64);
        ReductionRow {
            sample: sample.to_string(),
            vertices: before.vertex_count(),
            edges: before.edge_count(),
            vertices_after: after.vertex_count(),
            edges_after: after.edge_count(),
            vertex_reduction: red(after.vertex_count(), before.vertex_count()),
            edge_reduction: red(after.edge_count(), before.edge_count()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub rows: Vec<ReductionRow>,
    pub mean_vertex_reduction: Option<f64>,
    pub mean_edge_reduction: Option<f64>,
}

impl ReductionReport {
    pub fn new(rows: Vec<ReductionRow>) -> Self {
        let mean = |f: fn(&ReductionRow) -> Option<f64>| {
            let v: Vec<f64> = rows.iter().filter_map(f).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        ReductionReport {
            mean_vertex_reduction: mean(|r| r.vertex_reduction),
            mean_edge_reduction: mean(|r| r.edge_reduction),
            rows,
        }
    }
}

fn pct(v: Option<f64>) -> String {
    v.map_or("N/A".to_string(), |v| format!("{:.1}%", 100.0 * v))
}

impl Report for ReductionReport {
    fn table(&self) -> String {
        let mut rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.sample.clone(),
                    r.vertices.to_string(),
                    r.edges.to_string(),
                    r.vertices_after.to_string(),
                    r.edges_after.to_string(),
                    pct(r.vertex_reduction),
                    pct(r.edge_reduction),
                ]
            })
            .collect();
        rows.push(vec![
            "mean".into(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            pct(self.mean_vertex_reduction),
            pct(self.mean_edge_reduction),
        ]);
        aligned(
            &strings(&["sample", "|V|", "|E|", "|V'|", "|E'|", "dV", "dE"]),
            &rows,
        )
    }
}

impl Report for crate::quality::QualityReport {
    fn table(&self) -> String {
        let rows = vec![
            vec!["samples".into(), self.samples.to_string()],
            vec!["fixed points".into(), self.fixed_points.to_string()],
            vec!["fixed-point fraction".into(), format!("{:.4}", self.fixed_point_fraction)],
            vec!["mean iso pairs (same depth)".into(), format!("{:.3}", self.mean_iso_pairs)],
            vec!["mean iso pairs (any depth)".into(), format!("{:.3}", self.mean_iso_pairs_any_depth)],
            vec!["mean vertices".into(), format!("{:.2}", self.mean_vertices)],
            vec![
                "sampler".into(),
                format!(
                    "depth={} max_vertices={} sizing={}",
                    self.sampler.depth,
                    self.sampler.max_vertices,
                    serde_json::to_value(self.sampler.sizing)
                        .ok()
                        .and_then(|v| v.as_str().map(str::to_string))
                        .unwrap_or_default()
                ),
            ],
            vec!["seed".into(), self.seed.to_string()],
        ];
        aligned(&strings(&["quantity", "value"]), &rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    #[test]
    fn perfect_classifier_metrics() {
        let c = Confusion::from_pairs([(true, true), (true, true), (false, false), (false, false)]);
        assert_eq!(c, Confusion { tp: 2, fp: 0, tn: 2, fn_: 0 });
        let m = MetricsReport::new(c);
        for v in [m.accuracy, m.sensitivity, m.specificity, m.precision, m.f1] {
            assert_eq!(v, Some(1.0));
        }
    }

    #[test]
    fn hand_computed_metrics() {
        // tp=3 fp=1 tn=4 fn=2 over 10 samples.
        let m = MetricsReport::new(Confusion { tp: 3, fp: 1, tn: 4, fn_: 2 });
        assert_eq!(m.accuracy, Some(0.7));
        assert_eq!(m.sensitivity, Some(0.6));
        assert_eq!(m.specificity, Some(0.8));
        assert_eq!(m.precision, Some(0.75));
        let f1 = m.f1.unwrap();
        assert!((f1 - 2.0 * 0.75 * 0.6 / 1.35).abs() < 1e-15);
    }

    #[test]
    fn undefined_metrics_are_na() {
        let m = MetricsReport::new(Confusion { tp: 0, fp: 0, tn: 3, fn_: 0 });
        assert_eq!(m.precision, None);
        assert_eq!(m.sensitivity, None);
        assert_eq!(m.f1, None);
        assert_eq!(m.specificity, Some(1.0));
        assert!(m.table().contains("N/A"));
    }

    #[test]
    fn self_score_is_malicious() {
        let g = diamond("other", "xor", "xor", "and");
        let fps = [ScoringFingerprint {
            name: "d",
            graph: &g,
            threshold: None,
        }];
        let v = score_sample("s", &g, &fps, &FisParams::default(), 0.65).unwrap();
        assert_eq!(v.max_score, 1.0);
        assert_eq!(v.verdict, Verdict::Malicious);
    }

    #[test]
    fn per_fingerprint_threshold_wins() {
        let g = diamond("other", "xor", "xor", "and");
        let fps = [ScoringFingerprint {
            name: "d",
            graph: &g,
            threshold: Some(1.5),
        }];
        let v = score_sample("s", &g, &fps, &FisParams::default(), 0.65).unwrap();
        assert_eq!(v.verdict, Verdict::Benign);
    }

    #[test]
    fn one_by_one_matrix() {
        let g = diamond("other", "xor", "xor", "and");
        let m = score_matrix(&[("g".into(), g)], &FisParams::default()).unwrap();
        assert_eq!(m.scores, vec![vec![1.0]]);
    }

    #[test]
    fn reduction_is_one_minus_ratio() {
        let before = diamond("o", "x", "x", "a");
        let after = graph(&[(0, "o"), (1, "x"), (3, "a")], &[(0, 1), (1, 3)]);
        let r = ReductionRow::new("d", &before, &after);
        assert_eq!(r.vertex_reduction, Some(1.0 - 3.0 / 4.0));
        assert_eq!(r.edge_reduction, Some(1.0 - 2.0 / 4.0));
        let rep = ReductionReport::new(vec![r]);
        assert!(rep.table().contains("25.0%"));
    }

    #[test]
    fn labels_round_trip_and_eval() {
        let labels = parse_labels("# x\na malicious\nb benign\n").unwrap();
        assert_eq!(parse_labels(&render_labels(&labels)).unwrap(), labels);
        assert!(parse_labels("a evil").is_err());
        assert!(parse_labels("a benign\na benign").is_err());
        let g = diamond("other", "xor", "xor", "and");
        let fps = [ScoringFingerprint { name: "d", graph: &g, threshold: None }];
        let va = score_sample("a", &g, &fps, &FisParams::default(), 0.65).unwrap();
        let mut vb = va.clone();
        vb.sample = "b".into();
        let json = VerdictList(vec![va, vb]).render(Format::Json);
        let vs = parse_verdicts(&json).unwrap();
        let m = evaluate(&vs, &labels).unwrap();
        assert_eq!(m.confusion, Confusion { tp: 1, fp: 1, tn: 0, fn_: 0 });
        assert!(evaluate(&vs, &BTreeMap::new()).is_err());
        let one = vs[0].render(Format::Json);
        assert_eq!(parse_verdicts(&one).unwrap().len(), 1);
    }
}
