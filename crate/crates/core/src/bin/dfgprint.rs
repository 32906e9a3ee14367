// SPDX-License-Identifier: Apache-2.0

use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dfgprint::cli::config::Settings;
use dfgprint::cli::db::FingerprintDb;
use dfgprint::cli::pipeline::{run_pipeline, CorpusSpec};
use dfgprint::cli::report::{
    evaluate, parse_labels, parse_verdicts, score_matrix, score_sample, Format, ReductionReport,
    ReductionRow, Report, ScoringFingerprint, Verdict,
};
use dfgprint::dot::to_dot;
use dfgprint::fingerprint::{creation_time, read_fingerprint, write_fingerprint, FingerprintMeta, FingerprintRecord};
use dfgprint::quality::{run_quality_study, LayerSizing, SamplerConfig};
use dfgprint::simplify::{approx_simplify, exact_simplify};
use dfgprint::synth::{gen_trace, obfuscate_trace, ObfuscationSpec, Strategy, WorkloadKind, WorkloadSpec};
use dfgprint::trace::{read_trace, write_raw, Direction};
use dfgprint::{Error, Result};

#[derive(Parser)]
#[command(name = "dfgprint", version, about = "Data-flow graph fingerprinting and detection")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Settings file (key=value lines); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report format: json or table.
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Detection threshold.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Fragment size in edges.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Fragments sampled per score.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Random walks per simplification.
    #[arg(long, global = true)]
    walks: Option<u64>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use exact visit probabilities instead of random walks.
    #[arg(long, global = true)]
    exact_p: bool,
    /// Repeat simplification until the graph stops shrinking.
    #[arg(long, global = true)]
    fixpoint: bool,
    /// Edge cap while ingesting traces, or `unbounded`.
    #[arg(long, global = true, value_parser = parse_max_edges)]
    max_edges: Option<usize>,
}

fn parse_max_edges(v: &str) -> std::result::Result<usize, String> {
    if v == "unbounded" {
        return Ok(usize::MAX);
    }
    v.parse().map_err(|e| format!("{e}"))
}

#[derive(Subcommand)]
enum Command {
    /// Build the data-flow graph of a trace file.
    Ingest {
        trace: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Graph name (defaults to the output file stem).
        #[arg(long)]
        name: Option<String>,
    },
    /// Simplify a graph into a fingerprint.
    Simplify {
        graph: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        name: Option<String>,
        /// Use the exact isomorphism-based simplification (small graphs only).
        #[arg(long)]
        oracle: bool,
    },
    /// Manage a fingerprint database.
    Db {
        #[command(subcommand)]
        action: DbAction,
    },
    /// Score a sample against every fingerprint in a database.
    /// Exits with status 2 when the verdict is malicious.
    Score {
        sample: PathBuf,
        #[arg(long)]
        db: PathBuf,
        /// Sample name in the report (defaults to the fingerprint's name).
        #[arg(long)]
        name: Option<String>,
    },
    /// Pairwise score matrix of fingerprints.
    Matrix {
        #[arg(required = true)]
        graphs: Vec<PathBuf>,
    },
    /// Detection metrics of verdict files against labels.
    Eval {
        #[arg(long)]
        labels: PathBuf,
        #[arg(required = true)]
        verdicts: Vec<PathBuf>,
    },
    /// Approximation-quality study on sampled layered graphs.
    Quality {
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 80)]
        max_vertices: usize,
        /// uniform-member, sequential or uniform-total.
        #[arg(long, default_value = "uniform-member")]
        sizing: LayerSizing,
    },
    /// Generate a synthetic raw trace.
    Synth {
        /// miner-sha2like, miner-mixrounds, benign-convolution,
        /// benign-checksum or benign-random.
        kind: WorkloadKind,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 50)]
        rounds: u32,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// substitute, split, flatten-noise or interleave.
        #[arg(long)]
        obfuscate: Option<Strategy>,
        #[arg(long, default_value_t = 0.2)]
        rate: f64,
    },
    /// Size reduction table from before/after graph pairs.
    ReductionReport {
        /// Alternating before and after files.
        #[arg(required = true, num_args = 2..)]
        pairs: Vec<PathBuf>,
    },
    /// Export a graph as Graphviz DOT.
    Dot {
        graph: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the synthetic end-to-end pipeline into a fresh directory.
    Pipeline {
        output: PathBuf,
        #[arg(long, default_value_t = 50)]
        fingerprint_rounds: u32,
        #[arg(long, default_value_t = 60)]
        sample_rounds: u32,
    },
}

#[derive(Subcommand)]
enum DbAction {
    /// Create an empty database.
    Init { dir: PathBuf },
    /// Add a fingerprint file.
    Add {
        dir: PathBuf,
        fingerprint: PathBuf,
        /// Store under this name instead of the file's.
        #[arg(long)]
        name: Option<String>,
        /// Threshold for this fingerprint only.
        #[arg(long = "own-threshold")]
        own_threshold: Option<f64>,
        #[arg(long)]
        replace: bool,
    },
    /// List the stored fingerprints.
    List { dir: PathBuf },
    /// Remove a fingerprint.
    Remove { dir: PathBuf, name: String },
}

fn settings(g: &Global) -> Result<Settings> {
    let mut s = match &g.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    if let Some(v) = g.format {
        s.format = v;
    }
    if let Some(v) = g.threshold {
        s.threshold = v;
    }
    if let Some(v) = g.n {
        s.n = v;
    }
    if let Some(v) = g.k {
        s.k = v;
    }
    if let Some(v) = g.walks {
        s.walks = Some(v);
    }
    if let Some(v) = g.seed {
        s.seed = v;
    }
    if let Some(v) = g.max_edges {
        s.max_edges = v;
    }
    s.exact_p |= g.exact_p;
    s.fixpoint |= g.fixpoint;
    s.validate()?;
    Ok(s)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "graph".into())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let s = settings(&cli.global)?;
    match cli.command {
        Command::Ingest {
            trace,
            output,
            name,
        } => {
            let f = File::open(&trace).map_err(|e| Error::File {
                path: trace.clone(),
                source: e,
            })?;
            let t = read_trace(BufReader::new(f))?;
            let direction = match &t {
                dfgprint::trace::Trace::Resolved { direction, .. } => *direction,
                dfgprint::trace::Trace::Raw(_) => Direction::ConsumerToOperand,
            };
            let graph = t.ingest(&s.ingest_config())?;
            let rec = FingerprintRecord::new(
                graph,
                FingerprintMeta {
                    name: name.unwrap_or_else(|| stem(&output)),
                    source: trace.display().to_string(),
                    direction,
                    params: "unsimplified".into(),
                    created: creation_time(),
                },
            );
            write_fingerprint(&rec, &output)?;
            println!(
                "{}: {} vertices, {} edges",
                output.display(),
                rec.graph.vertex_count(),
                rec.graph.edge_count()
            );
        }
        Command::Simplify {
            graph,
            output,
            name,
            oracle,
        } => {
            let input = read_fingerprint(&graph)?;
            let (out, params) = if oracle {
                (exact_simplify(&input.graph)?, "mode=oracle".to_string())
            } else {
                let p = s.simplify_params();
                (
                    approx_simplify(&input.graph, &p)?,
                    p.describe(input.graph.vertex_count()),
                )
            };
            let rec = FingerprintRecord::new(
                out,
                FingerprintMeta {
                    name: name.unwrap_or_else(|| stem(&output)),
                    params,
                    created: creation_time(),
                    ..input.meta.clone()
                },
            );
            write_fingerprint(&rec, &output)?;
            print!(
                "{}",
                ReductionReport::new(vec![ReductionRow::new(
                    &rec.meta.name,
                    &input.graph,
                    &rec.graph
                )])
                .render(s.format)
            );
        }
        Command::Db { action } => db(action, s.format)?,
        Command::Score { sample, db, name } => {
            let rec = read_fingerprint(&sample)?;
            let db = FingerprintDb::open(&db)?;
            let loaded = db.load_all()?;
            if loaded.is_empty() {
                return Err(Error::Database(format!(
                    "{} holds no fingerprints",
                    db.root().display()
                )));
            }
            let targets: Vec<ScoringFingerprint<'_>> = loaded
                .iter()
                .map(|(e, r)| ScoringFingerprint {
                    name: &e.name,
                    graph: &r.graph,
                    threshold: e.threshold,
                })
                .collect();
            let name = name.unwrap_or_else(|| rec.meta.name.clone());
            let v = score_sample(&name, &rec.graph, &targets, &s.fis_params(), s.threshold)?;
            print!("{}", v.render(s.format));
            if v.verdict == Verdict::Malicious {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Matrix { graphs } => {
            let gs = graphs
                .iter()
                .map(|p| {
                    let r = read_fingerprint(p)?;
                    Ok((r.meta.name, r.graph))
                })
                .collect::<Result<Vec<_>>>()?;
            print!("{}", score_matrix(&gs, &s.fis_params())?.render(s.format));
        }
        Command::Eval { labels, verdicts } => {
            let text = fs::read_to_string(&labels).map_err(|e| Error::File {
                path: labels.clone(),
                source: e,
            })?;
            let labels = parse_labels(&text)?;
            let mut all = Vec::new();
            for p in &verdicts {
                let text = fs::read_to_string(p).map_err(|e| Error::File {
                    path: p.clone(),
                    source: e,
                })?;
                all.extend(parse_verdicts(&text)?);
            }
            print!("{}", evaluate(&all, &labels)?.render(s.format));
        }
        Command::Quality {
            samples,
            depth,
            max_vertices,
            sizing,
        } => {
            let cfg = SamplerConfig {
                depth,
                max_vertices,
                sizing,
            };
            let r = run_quality_study(samples, s.seed, &cfg)?;
            print!("{}", r.render(s.format));
        }
        Command::Synth {
            kind,
            output,
            rounds,
            noise,
            obfuscate,
            rate,
        } => {
            let spec = WorkloadSpec {
                noise_rate: noise,
                ..WorkloadSpec::new(kind, rounds, s.synth_seed())
            };
            let mut events = gen_trace(&spec)?.events;
            if let Some(strategy) = obfuscate {
                let o = ObfuscationSpec {
                    rate,
                    ..ObfuscationSpec::new(strategy, dfgprint::rng::derive_seed(s.synth_seed(), "obfuscate"))
                };
                events = obfuscate_trace(&events, &o)?.events;
            }
            let f = File::create(&output).map_err(|e| Error::File {
                path: output.clone(),
                source: e,
            })?;
            write_raw(std::io::BufWriter::new(f), &events)?;
            println!("{}: {} events", output.display(), events.len());
        }
        Command::ReductionReport { pairs } => {
            if pairs.len() % 2 != 0 {
                return Err(Error::InvalidParam(
                    "reduction-report takes before/after pairs; got an odd number of files".into(),
                ));
            }
            let rows = pairs
                .chunks(2)
                .map(|p| {
                    let before = read_fingerprint(&p[0])?;
                    let after = read_fingerprint(&p[1])?;
                    Ok(ReductionRow::new(&after.meta.name, &before.graph, &after.graph))
                })
                .collect::<Result<Vec<_>>>()?;
            print!("{}", ReductionReport::new(rows).render(s.format));
        }
        Command::Dot { graph, output } => {
            let dot = to_dot(&read_fingerprint(&graph)?.graph);
            match output {
                Some(p) => fs::write(&p, dot).map_err(|e| Error::File { path: p, source: e })?,
                None => print!("{dot}"),
            }
        }
        Command::Pipeline {
            output,
            fingerprint_rounds,
            sample_rounds,
        } => {
            let spec = CorpusSpec {
                fingerprint_rounds,
                sample_rounds,
                ..CorpusSpec::default()
            };
            let out = run_pipeline(&output, &s, &spec)?;
            print!("{}", out.verdicts.render(s.format));
            print!("{}", out.metrics.render(s.format));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn db(action: DbAction, format: Format) -> Result<()> {
    match action {
        DbAction::Init { dir } => {
            FingerprintDb::create(&dir)?;
            println!("created {}", dir.display());
        }
        DbAction::Add {
            dir,
            fingerprint,
            name,
            own_threshold,
            replace,
        } => {
            let mut rec = read_fingerprint(&fingerprint)?;
            if let Some(n) = name {
                rec.meta.name = n;
            }
            let mut db = FingerprintDb::open(&dir)?;
            db.add(&rec, own_threshold, replace)?;
            println!("added {}", rec.meta.name);
        }
        DbAction::List { dir } => {
            let db = FingerprintDb::open(&dir)?;
            let entries: Vec<_> = db.entries().cloned().collect();
            match format {
                Format::Json => {
                    println!("{}", serde_json::to_string_pretty(&entries)?);
                }
                Format::Table => {
                    for e in entries {
                        let t = e.threshold.map_or("-".to_string(), |t| format!("{t}"));
                        println!("{}\t{}\t{}\t{}\t{}", e.name, e.vertices, e.edges, t, e.params);
                    }
                }
            }
        }
        DbAction::Remove { dir, name } => {
            FingerprintDb::open(&dir)?.remove(&name)?;
            println!("removed {name}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
