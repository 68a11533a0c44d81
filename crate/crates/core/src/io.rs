//! Text formats for graphs, weights, code books, and tree sets.
//!
//! Graph files: first line `n m`, then m lines `u v` with 0-indexed
//! endpoints. Weight files: one decimal per line, aligned to edge ids.
//! Parsing is strict except that trailing blank lines are allowed.

use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Graph, SpanningTree, WeightVector};
use crate::tree_space::CodeBook;

fn content_lines(text: &str) -> Result<Vec<&str>> {
    let mut lines: Vec<&str> = text.lines().collect();
    while matches!(lines.last(), Some(l) if l.trim().is_empty()) {
        lines.pop();
    }
    if lines.iter().any(|l| l.trim().is_empty()) {
        return Err(Error::validation("blank line inside the body"));
    }
    Ok(lines)
}

fn parse_fields<T: std::str::FromStr>(line: &str, expected: usize, what: &str) -> Result<Vec<T>> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != expected {
        return Err(Error::validation(format!(
            "{what}: expected {expected} fields, got {} in {line:?}",
            parts.len()
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<T>()
                .map_err(|_| Error::validation(format!("{what}: cannot parse {p:?}")))
        })
        .collect()
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let lines = content_lines(text)?;
    if lines.is_empty() {
        return Err(Error::validation("empty graph file"));
    }
    let header: Vec<usize> = parse_fields(lines[0], 2, "graph header")?;
    let (n, m) = (header[0], header[1]);
    if lines.len() != m + 1 {
        return Err(Error::validation(format!(
            "graph file declares {m} edges but has {} edge lines",
            lines.len() - 1
        )));
    }
    let mut edges = Vec::with_capacity(m);
    for line in &lines[1..] {
        let uv: Vec<usize> = parse_fields(line, 2, "edge line")?;
        edges.push((uv[0], uv[1]));
    }
    Graph::new(n, edges)
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph> {
    parse_graph(&std::fs::read_to_string(path)?)
}

pub fn graph_to_string(graph: &Graph) -> String {
    let mut out = format!("{} {}\n", graph.vertex_count(), graph.edge_count());
    for &(u, v) in graph.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn write_graph(path: impl AsRef<Path>, graph: &Graph) -> Result<()> {
    Ok(std::fs::write(path, graph_to_string(graph))?)
}

pub fn parse_weights(text: &str) -> Result<WeightVector> {
    let lines = content_lines(text)?;
    let mut values = Vec::with_capacity(lines.len());
    for line in lines {
        let v: Vec<f64> = parse_fields(line, 1, "weight line")?;
        values.push(v[0]);
    }
    WeightVector::new(values)
}

pub fn read_weights(path: impl AsRef<Path>) -> Result<WeightVector> {
    parse_weights(&std::fs::read_to_string(path)?)
}

pub fn weights_to_string(weights: &WeightVector) -> String {
    let mut out = String::new();
    for v in weights.values() {
        out.push_str(&format!("{v}\n"));
    }
    out
}

pub fn write_weights(path: impl AsRef<Path>, weights: &WeightVector) -> Result<()> {
    Ok(std::fs::write(path, weights_to_string(weights))?)
}

/// Code book format: line 1 `n M d`, then M lines of n characters from {0,1}.
pub fn codebook_to_string(code: &CodeBook) -> String {
    let mut out = format!("{} {} {}\n", code.length, code.words.len(), code.min_distance);
    for &w in &code.words {
        let mut line = String::with_capacity(code.length + 1);
        for i in 0..code.length {
            line.push(if code.position_set(w, i) { '1' } else { '0' });
        }
        line.push('\n');
        out.push_str(&line);
    }
    out
}

pub fn parse_codebook(text: &str) -> Result<CodeBook> {
    let lines = content_lines(text)?;
    if lines.is_empty() {
        return Err(Error::validation("empty code book"));
    }
    let header: Vec<usize> = parse_fields(lines[0], 3, "code book header")?;
    let (n, m, d) = (header[0], header[1], header[2]);
    if lines.len() != m + 1 {
        return Err(Error::validation(format!(
            "code book declares {m} words but has {} word lines",
            lines.len() - 1
        )));
    }
    let mut words = Vec::with_capacity(m);
    for line in &lines[1..] {
        let line = line.trim();
        if line.len() != n {
            return Err(Error::validation(format!(
                "code word {line:?} does not have length {n}"
            )));
        }
        let mut w = 0u64;
        for c in line.chars() {
            w <<= 1;
            match c {
                '0' => {}
                '1' => w |= 1,
                other => {
                    return Err(Error::validation(format!("invalid code symbol {other:?}")))
                }
            }
        }
        words.push(w);
    }
    CodeBook::new(n, words, d)
}

/// Tree set format: one tree per line as space-separated edge ids.
pub fn trees_to_string(trees: &[SpanningTree]) -> String {
    let mut out = String::new();
    for t in trees {
        out.push_str(&t.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_trees(text: &str, graph: &Graph) -> Result<Vec<SpanningTree>> {
    let mut trees = Vec::new();
    for line in content_lines(text)? {
        let ids: Vec<usize> = line
            .split_whitespace()
            .map(|p| {
                p.parse::<usize>()
                    .map_err(|_| Error::validation(format!("cannot parse edge id {p:?}")))
            })
            .collect::<Result<_>>()?;
        trees.push(SpanningTree::new(graph, ids)?);
    }
    Ok(trees)
}
