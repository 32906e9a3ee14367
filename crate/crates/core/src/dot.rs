// SPDX-License-Identifier: Apache-2.0

//! Graphviz export. `and`, `xor` and `shr` vertices are filled red, green and
//! blue; every other label is left uncolored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::DataFlowGraph;

fn fill(label: &str) -> Option<&'static str> {
    match label {
        "and" => Some("red"),
        "xor" => Some("green"),
        "shr" => Some("blue"),
        _ => None,
    }
}

pub fn to_dot(g: &DataFlowGraph) -> String {
    let mut s = String::from("digraph dfg {\n");
    for (v, l) in g.vertices() {
        match fill(l.as_str()) {
            Some(color) => writeln!(
                s,
                "  \"{v}\" [label=\"{l}\", style=filled, fillcolor={color}];"
            ),
            None => writeln!(s, "  \"{v}\" [label=\"{l}\"];"),
        }
        .unwrap();
    }
    for (a, b) in g.edges() {
        writeln!(s, "  \"{a}\" -> \"{b}\";").unwrap();
    }
    s.push_str("}\n");
    s
}

pub fn export_dot(g: &DataFlowGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_dot(g)).map_err(|e| Error::file(path, e))
}
