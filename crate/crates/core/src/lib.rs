// SPDX-License-Identifier: Apache-2.0

//! Fingerprinting of programs by their instruction-level data-flow graphs.
//!
//! Execution traces are turned into labeled DAGs ([`graph`], [`trace`]),
//! repeated structure is merged away to get a compact fingerprint
//! ([`simplify`]), and samples are compared against known fingerprints with
//! the n-fragment inclusion score ([`fis`]). [`quality`] measures how close
//! the walk-based simplification is to the exact one, and [`synth`] produces
//! synthetic workloads for end-to-end experiments.

pub mod error;
pub mod graph;
pub mod iso;
pub mod rng;
pub mod simplify;
pub mod trace;
pub mod fingerprint;
pub mod dot;
pub mod fis;
pub mod quality;
pub mod synth;
pub mod cli;

pub use error::{Error, Result};
pub use graph::{DataFlowGraph, Label, VertexId};
