//! Plain-text edge lists: a header line `n d`, then one `u v` pair per line.
//! Vertices are 0-indexed; fields are whitespace-delimited.

use std::fmt::Write as _;

use super::{EdgeKey, SimpleGraph};
use crate::error::{Error, Result};

/// Serialize a regular graph. Edges are written in lexicographic order.
pub fn write_edge_list(g: &SimpleGraph) -> Result<String> {
    let d = g
        .regular_degree()
        .ok_or_else(|| Error::Precondition("edge-list header needs a regular graph".into()))?;
    let mut out = format!("{} {}\n", g.n(), d);
    for e in g.edges() {
        writeln!(out, "{} {}", e.u(), e.v()).expect("writing to a String");
    }
    Ok(out)
}

/// Parse an edge list and check every degree matches the header.
pub fn read_edge_list(text: &str) -> Result<SimpleGraph> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .enumerate()
        .filter(|(_, l)| !l.is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("missing `n d` header".into()))?;
    let [n, d] = parse_pair(header, 1)?;
    let mut edges = Vec::new();
    for (idx, line) in lines {
        let [u, v] = parse_pair(line, idx + 1)?;
        edges.push(EdgeKey::new(u, v)?);
    }
    let g = SimpleGraph::from_edges(n, edges)?;
    if !g.is_regular(d) {
        return Err(Error::Parse(format!("graph is not {d}-regular as declared")));
    }
    Ok(g)
}

fn parse_pair(line: &str, lineno: usize) -> Result<[usize; 2]> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(Error::Parse(format!(
            "line {lineno}: expected two fields, got {}",
            fields.len()
        )));
    }
    let mut out = [0; 2];
    for (slot, field) in out.iter_mut().zip(fields) {
        *slot = field
            .parse()
            .map_err(|_| Error::Parse(format!("line {lineno}: `{field}` is not a vertex index")))?;
    }
    Ok(out)
}
