//! Plain-text edge lists.
//!
//! ```text
//! # vertices=6 symbols=1,2
//! 1 3
//! 2 3
//! ```
//! Vertex ids are 1-based; `symbols` lists the symbol vertices in symbol order.

use super::DecodingGraph;
use crate::error::{invalid, Result};

pub fn write_edge_list(g: &DecodingGraph) -> String {
    let symbols: Vec<String> = g.symbol_nodes().iter().map(|s| (s + 1).to_string()).collect();
    let mut out = format!("# vertices={} symbols={}\n", g.vertex_count(), symbols.join(","));
    for &(u, v) in g.edges() {
        out.push_str(&format!("{} {}\n", u + 1, v + 1));
    }
    out
}

fn parse_id(tok: &str, line: usize) -> Result<usize> {
    match tok.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v - 1),
        _ => invalid(format!("line {line}: bad vertex id {tok:?}")),
    }
}

pub fn parse_edge_list(text: &str) -> Result<DecodingGraph> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return invalid("empty edge list");
    };
    let mut vertices = None;
    let mut symbols = Vec::new();
    for field in header.trim_start_matches('#').split_whitespace() {
        match field.split_once('=') {
            Some(("vertices", v)) => vertices = v.parse::<usize>().ok(),
            Some(("symbols", s)) if !s.is_empty() => {
                symbols = s.split(',').map(|t| parse_id(t, 1)).collect::<Result<_>>()?;
            }
            Some(("symbols", _)) => {}
            _ => return invalid(format!("line 1: unknown header field {field:?}")),
        }
    }
    let Some(vertices) = vertices else {
        return invalid("line 1: missing vertices=");
    };
    let mut edges = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return invalid(format!("line {}: expected two vertex ids", i + 1));
        }
        edges.push((parse_id(toks[0], i + 1)?, parse_id(toks[1], i + 1)?));
    }
    DecodingGraph::from_parts(vertices, edges, &symbols)
}

#[cfg(test)]
mod tests {
    use super::super::build_polar_graph;
    use super::*;

    #[test]
    fn round_trip() {
        let g = build_polar_graph(2).unwrap();
        let text = write_edge_list(&g);
        let h = parse_edge_list(&text).unwrap();
        assert_eq!(h.edges(), g.edges());
        assert_eq!(h.symbol_nodes(), g.symbol_nodes());
        assert_eq!(write_edge_list(&h), text);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_edge_list("").is_err());
        assert!(parse_edge_list("# vertices=2\n1 3\n").is_err());
        assert!(parse_edge_list("# vertices=2\n0 1\n").is_err());
        assert!(parse_edge_list("# size=2\n").is_err());
    }
}
