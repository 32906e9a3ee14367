// SPDX-License-Identifier: Apache-2.0

//! End-to-end run on a synthetic corpus: generate traces, ingest, simplify,
//! build a fingerprint database, score, and write reports.
//!
//! Output layout under the chosen directory:
//!
//! ```text
//! traces/<name>.trace     raw traces
//! db/                     miner fingerprints
//! samples/<name>.fp       simplified sample graphs
//! labels.txt
//! reports/{verdicts,matrix,reduction,metrics}.{json,txt}
//! ```
//!
//! Every file depends only on the settings, so two runs with the same master
//! seed produce identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::Settings;
use super::db::FingerprintDb;
use super::report::{
    evaluate, render_labels, score_matrix, score_sample, DetectionVerdict, Format, MetricsReport,
    ReductionReport, ReductionRow, Report, ScoreMatrix, ScoringFingerprint, VerdictList,
};
use crate::error::{Error, Result};
use crate::fingerprint::{write_fingerprint, FingerprintMeta, FingerprintRecord};
use crate::graph::DataFlowGraph;
use crate::rng::derive_seed;
use crate::simplify::approx_simplify;
use crate::synth::{
    gen_trace, obfuscate_trace, ObfuscationSpec, Strategy, WorkloadKind, WorkloadSpec,
};
use crate::trace::{ingest_raw, write_raw, Direction, RawStackEvent};

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusSpec {
    /// Rounds of the traces the database fingerprints come from.
    pub fingerprint_rounds: u32,
    pub sample_rounds: u32,
    /// Noise rate of the `benign-random` sample.
    pub benign_noise: f64,
    pub obfuscation_rate: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            fingerprint_rounds: 50,
            sample_rounds: 60,
            benign_noise: 0.2,
            obfuscation_rate: 0.2,
        }
    }
}

/// A corpus member before ingestion.
pub struct CorpusTrace {
    pub name: String,
    pub kind: WorkloadKind,
    pub strategy: Option<Strategy>,
    pub events: Vec<RawStackEvent>,
}

impl CorpusTrace {
    pub fn malicious(&self) -> bool {
        self.kind.is_miner()
    }
}

/// The database traces (one per miner family) and the samples (every kind
/// plain, plus each miner under every obfuscation strategy).
pub fn build_corpus(
    spec: &CorpusSpec,
    synth_seed: u64,
) -> Result<(Vec<CorpusTrace>, Vec<CorpusTrace>)> {
    let mut fingerprints = Vec::new();
    let mut samples = Vec::new();
    for kind in WorkloadKind::ALL {
        if kind.is_miner() {
            let ws = WorkloadSpec::new(
                kind,
                spec.fingerprint_rounds,
                derive_seed(synth_seed, &format!("fingerprint/{kind}")),
            );
            fingerprints.push(CorpusTrace {
                name: kind.name().to_string(),
                kind,
                strategy: None,
                events: gen_trace(&ws)?.events,
            });
        }
        let ws = WorkloadSpec {
            noise_rate: if kind == WorkloadKind::BenignRandom {
                spec.benign_noise
            } else {
                0.0
            },
            ..WorkloadSpec::new(
                kind,
                spec.sample_rounds,
                derive_seed(synth_seed, &format!("sample/{kind}")),
            )
        };
        let events = gen_trace(&ws)?.events;
        if kind.is_miner() {
            for strategy in Strategy::ALL {
                let os = ObfuscationSpec {
                    rate: spec.obfuscation_rate,
                    ..ObfuscationSpec::new(
                        strategy,
                        derive_seed(synth_seed, &format!("obfuscate/{kind}/{strategy}")),
                    )
                };
                samples.push(CorpusTrace {
                    name: format!("sample-{kind}+{strategy}"),
                    kind,
                    strategy: Some(strategy),
                    events: obfuscate_trace(&events, &os)?.events,
                });
            }
        }
        samples.push(CorpusTrace {
            name: format!("sample-{kind}"),
            kind,
            strategy: None,
            events,
        });
    }
    samples.sort_by(|a, b| a.name.cmp(&b.name));
    Ok((fingerprints, samples))
}

/// Ingested and simplified graph of one trace.
pub struct Processed {
    pub name: String,
    pub malicious: bool,
    pub raw: DataFlowGraph,
    pub simplified: DataFlowGraph,
}

pub fn process(t: &CorpusTrace, settings: &Settings) -> Result<Processed> {
    let raw = ingest_raw(t.events.iter().cloned(), &settings.ingest_config())?;
    let simplified = approx_simplify(&raw, &settings.simplify_params())?;
    Ok(Processed {
        name: t.name.clone(),
        malicious: t.malicious(),
        raw,
        simplified,
    })
}

fn record(p: &Processed, settings: &Settings) -> FingerprintRecord {
    FingerprintRecord::new(
        p.simplified.clone(),
        FingerprintMeta {
            name: p.name.clone(),
            source: format!("synth {}", p.name),
            direction: Direction::ConsumerToOperand,
            params: settings.simplify_params().describe(p.raw.vertex_count()),
            // Fixed so that repeated runs produce identical files.
            created: 0,
        },
    )
}

#[derive(Debug)]
pub struct PipelineOutput {
    pub verdicts: VerdictList,
    pub matrix: ScoreMatrix,
    pub reduction: ReductionReport,
    pub metrics: MetricsReport,
    pub report_files: Vec<PathBuf>,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::file(path, e))
}

fn write_report(dir: &Path, stem: &str, r: &impl Report, files: &mut Vec<PathBuf>) -> Result<()> {
    for (ext, fmt) in [("json", Format::Json), ("txt", Format::Table)] {
        let path = dir.join(format!("{stem}.{ext}"));
        write_text(&path, &r.render(fmt))?;
        files.push(path);
    }
    Ok(())
}

/// Runs the whole pipeline into `out`, which must not already hold a
/// database.
pub fn run_pipeline(out: &Path, settings: &Settings, spec: &CorpusSpec) -> Result<PipelineOutput> {
    settings.validate()?;
    let (fp_traces, sample_traces) = build_corpus(spec, settings.synth_seed())?;

    let traces = out.join("traces");
    let samples_dir = out.join("samples");
    let reports = out.join("reports");
    for d in [&traces, &samples_dir, &reports] {
        fs::create_dir_all(d).map_err(|e| Error::file(d, e))?;
    }
    for t in fp_traces.iter().chain(&sample_traces) {
        let path = traces.join(format!("{}.trace", t.name));
        let f = fs::File::create(&path).map_err(|e| Error::file(&path, e))?;
        write_raw(BufWriter::new(f), &t.events)?;
    }

    let fps: Vec<Processed> = fp_traces
        .par_iter()
        .map(|t| process(t, settings))
        .collect::<Result<_>>()?;
    let samples: Vec<Processed> = sample_traces
        .par_iter()
        .map(|t| process(t, settings))
        .collect::<Result<_>>()?;

    let mut db = FingerprintDb::create(out.join("db"))?;
    for p in &fps {
        db.add(&record(p, settings), None, false)?;
    }
    for p in &samples {
        write_fingerprint(&record(p, settings), samples_dir.join(format!("{}.fp", p.name)))?;
    }

    let labels: BTreeMap<String, bool> = samples
        .iter()
        .map(|p| (p.name.clone(), p.malicious))
        .collect();
    write_text(&out.join("labels.txt"), &render_labels(&labels))?;

    let loaded = db.load_all()?;
    let targets: Vec<ScoringFingerprint<'_>> = loaded
        .iter()
        .map(|(e, r)| ScoringFingerprint {
            name: &e.name,
            graph: &r.graph,
            threshold: e.threshold,
        })
        .collect();
    let params = settings.fis_params();
    let verdicts: Vec<DetectionVerdict> = samples
        .iter()
        .map(|p| score_sample(&p.name, &p.simplified, &targets, &params, settings.threshold))
        .collect::<Result<_>>()?;
    let verdicts = VerdictList(verdicts);

    let miners: Vec<(String, DataFlowGraph)> = fps
        .iter()
        .chain(samples.iter().filter(|p| p.malicious))
        .map(|p| (p.name.clone(), p.simplified.clone()))
        .collect();
    let matrix = score_matrix(&miners, &params)?;
    let reduction = ReductionReport::new(
        samples
            .iter()
            .map(|p| ReductionRow::new(&p.name, &p.raw, &p.simplified))
            .collect(),
    );
    let metrics = evaluate(&verdicts.0, &labels)?;

    let mut files = Vec::new();
    write_report(&reports, "verdicts", &verdicts, &mut files)?;
    write_report(&reports, "matrix", &matrix, &mut files)?;
    write_report(&reports, "reduction", &reduction, &mut files)?;
    write_report(&reports, "metrics", &metrics, &mut files)?;
    Ok(PipelineOutput {
        verdicts,
        matrix,
        reduction,
        metrics,
        report_files: files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_sorted_and_labeled() {
        let (fps, samples) = build_corpus(&CorpusSpec::default(), 1).unwrap();
        assert_eq!(fps.len(), 2);
        assert_eq!(samples.len(), 5 + 2 * Strategy::ALL.len());
        assert!(samples.windows(2).all(|w| w[0].name < w[1].name));
        assert_eq!(samples.iter().filter(|s| s.malicious()).count(), 10);
    }
}
