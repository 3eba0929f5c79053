//! Text exports: DOT and edge lists for graphs, CSV for census trajectories.

use std::fmt::Write;

use crate::growth::{CensusVector, Graph};
use crate::model::Kind;

/// Graphviz rendering; master vertices are drawn as boxes.
pub fn to_dot(g: &Graph) -> String {
    let (header, arrow) = match g.kind {
        Kind::Hooking => ("graph", "--"),
        Kind::Bipolar => ("digraph", "->"),
    };
    let mut out = format!("{header} network {{\n");
    let _ = writeln!(out, "  {} [shape=box, label=\"{}*\"];", g.master, g.master);
    if let Some(s) = g.master_sink {
        let _ = writeln!(out, "  {s} [shape=box, label=\"{s}*\"];");
    }
    for v in 0..g.vertex_count() {
        if v != g.master && Some(v) != g.master_sink {
            let _ = writeln!(out, "  {v};");
        }
    }
    for (u, v) in g.edge_list() {
        let _ = writeln!(out, "  {u} {arrow} {v};");
    }
    out.push_str("}\n");
    out
}

/// One `u v` line per edge (arcs as `from to`).
pub fn to_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    for (u, v) in g.edge_list() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

/// CSV with header `step,k1,…,kr,star_activity`.
pub fn trajectory_csv(essential: &[u32], rows: &[CensusVector]) -> String {
    let mut out = String::from("step");
    for k in essential {
        let _ = write!(out, ",k{k}");
    }
    out.push_str(",star_activity\n");
    for row in rows {
        let _ = write!(out, "{}", row.step);
        for c in &row.counts {
            let _ = write!(out, ",{c}");
        }
        let _ = writeln!(out, ",{}", row.star_activity());
    }
    out
}
