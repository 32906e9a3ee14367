// SPDX-License-Identifier: Apache-2.0

//! Pieces behind the `dfgprint` command: settings, the fingerprint
//! database, report types and the end-to-end pipeline.

pub mod config;
pub mod db;
pub mod pipeline;
pub mod report;
