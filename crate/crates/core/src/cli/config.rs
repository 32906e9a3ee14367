// SPDX-License-Identifier: Apache-2.0

//! `key=value` settings files.
//!
//! ```text
//! # detection settings
//! threshold = 0.65
//! n = 5
//! k = 500
//! seed = 42
//! ```
//!
//! Keys may be written with `_` or `-`. Blank lines and `#` comments are
//! ignored. Command-line flags override file values.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::report::Format;
use crate::error::{Error, Result};
use crate::fis::FisParams;
use crate::rng::derive_seed;
use crate::simplify::{Bandwidth, SimplifyParams};
use crate::trace::{IngestConfig, DEFAULT_MAX_EDGES};

pub const DEFAULT_THRESHOLD: f64 = 0.65;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub threshold: f64,
    pub n: usize,
    pub k: usize,
    /// `None` picks the walk count from the graph size.
    pub walks: Option<u64>,
    /// Master seed; every stochastic stage derives its own stream from it.
    pub seed: u64,
    pub exact_p: bool,
    pub fixpoint: bool,
    pub max_edges: usize,
    pub format: Format,
    pub bandwidth: Bandwidth,
    pub max_restarts: usize,
}

impl Default for Settings {
    fn default() -> Self {
        let fis = FisParams::default();
        Settings {
            threshold: DEFAULT_THRESHOLD,
            n: fis.n,
            k: fis.k,
            walks: None,
            seed: 0,
            exact_p: false,
            fixpoint: false,
            max_edges: DEFAULT_MAX_EDGES,
            format: Format::Table,
            bandwidth: Bandwidth::Auto,
            max_restarts: fis.max_restarts,
        }
    }
}

fn value<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::parse(line, format!("bad value {v:?} for {key}")))
}

fn flag(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::parse(line, format!("bad boolean {v:?} for {key}"))),
    }
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, v)) = body.split_once('=') else {
                return Err(Error::parse(line, format!("expected key = value, got {body:?}")));
            };
            let key = key.trim().replace('-', "_");
            let v = v.trim();
            match key.as_str() {
                "threshold" => s.threshold = value(line, &key, v)?,
                "n" => s.n = value(line, &key, v)?,
                "k" => s.k = value(line, &key, v)?,
                "walks" => {
                    s.walks = if v == "auto" {
                        None
                    } else {
                        Some(value(line, &key, v)?)
                    }
                }
                "seed" => s.seed = value(line, &key, v)?,
                "exact_p" => s.exact_p = flag(line, &key, v)?,
                "fixpoint" => s.fixpoint = flag(line, &key, v)?,
                "max_edges" => {
                    s.max_edges = if v == "unbounded" {
                        usize::MAX
                    } else {
                        value(line, &key, v)?
                    }
                }
                "format" => {
                    s.format = v.parse().map_err(|e: Error| Error::parse(line, e.to_string()))?
                }
                "bandwidth" => {
                    s.bandwidth = if v == "auto" {
                        Bandwidth::Auto
                    } else {
                        Bandwidth::Fixed(value(line, &key, v)?)
                    }
                }
                "max_restarts" => s.max_restarts = value(line, &key, v)?,
                _ => return Err(Error::parse(line, format!("unknown setting {key:?}"))),
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Settings::parse(&text).map_err(|e| match e {
            Error::Parse { line, msg } => Error::Parse {
                line,
                msg: format!("{}: {msg}", path.display()),
            },
            e => e,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidParam(format!(
                "threshold must lie in [0, 1], got {}",
                self.threshold
            )));
        }
        self.fis_params().validate()?;
        self.simplify_params().validate()?;
        self.ingest_config().validate()
    }

    pub fn ingest_config(&self) -> IngestConfig {
        IngestConfig {
            max_edges: self.max_edges,
            ..IngestConfig::default()
        }
    }

    pub fn simplify_params(&self) -> SimplifyParams {
        SimplifyParams {
            walks: self.walks,
            bandwidth: self.bandwidth,
            use_exact_p: self.exact_p,
            seed: derive_seed(self.seed, "walk"),
            fixpoint: self.fixpoint,
        }
    }

    pub fn fis_params(&self) -> FisParams {
        FisParams {
            n: self.n,
            k: self.k,
            seed: derive_seed(self.seed, "fragment"),
            max_restarts: self.max_restarts,
        }
    }

    pub fn synth_seed(&self) -> u64 {
        derive_seed(self.seed, "synth")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_key() {
        let s = Settings::parse(
            "# comment\nthreshold = 0.5\nn=4\nk = 100\nwalks=2000\nseed=9\nexact-p=true\n\
             fixpoint = yes\nmax_edges=unbounded\nformat=json\nbandwidth=0.01\nmax_restarts=3 # trailing\n",
        )
        .unwrap();
        assert_eq!(
            s,
            Settings {
                threshold: 0.5,
                n: 4,
                k: 100,
                walks: Some(2000),
                seed: 9,
                exact_p: true,
                fixpoint: true,
                max_edges: usize::MAX,
                format: Format::Json,
                bandwidth: Bandwidth::Fixed(0.01),
                max_restarts: 3,
            }
        );
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Settings::parse("\n# nothing\n").unwrap(), Settings::default());
    }

    #[test]
    fn errors_carry_line_numbers() {
        for (text, line) in [("n=5\nbogus=1", 2), ("threshold=2", 0), ("k", 1), ("n=x", 1)] {
            match Settings::parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                Err(Error::InvalidParam(_)) => assert_eq!(line, 0, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn stages_get_distinct_seeds() {
        let s = Settings::default();
        let seeds = [s.simplify_params().seed, s.fis_params().seed, s.synth_seed()];
        assert!(seeds[0] != seeds[1] && seeds[1] != seeds[2] && seeds[0] != seeds[2]);
    }
}
