use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::Graph;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Ids in the file start at 1; they are shifted down by one on load.
    pub one_indexed: bool,
    /// Read a third column as the edge weight and sum repeated edges.
    /// Otherwise repeated edges collapse to a single unit edge.
    pub weighted: bool,
}

/// Reads a whitespace-separated edge list. Lines starting with `#` and
/// blank lines are skipped. Self-loops are dropped but their endpoint is
/// still created as a vertex.
pub fn load_edge_list<R: BufRead>(reader: R, options: LoadOptions) -> Result<Graph> {
    let mut raw: Vec<(u64, u64, f64)> = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = index + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let u = parse_id(tokens.next(), lineno, options.one_indexed)?;
        let v = parse_id(tokens.next(), lineno, options.one_indexed)?;
        let w = match tokens.next() {
            Some(tok) if options.weighted => {
                let w: f64 = tok
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("invalid weight {tok:?}")))?;
                if !(w.is_finite() && w > 0.0) {
                    return Err(Error::parse(
                        lineno,
                        format!("weight must be positive, got {w}"),
                    ));
                }
                w
            }
            _ => 1.0,
        };
        if let Some(extra) = tokens.next() {
            return Err(Error::parse(lineno, format!("unexpected token {extra:?}")));
        }
        raw.push((u, v, w));
    }
    if raw.is_empty() {
        return Err(Error::EmptyGraph);
    }

    let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v, _)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let index = |id: u64| ids.binary_search(&id).expect("id collected above");
    let edges = raw
        .iter()
        .filter(|(u, v, _)| u != v)
        .map(|&(u, v, w)| {
            let (a, b) = (index(u), index(v));
            (a.min(b), a.max(b), w)
        })
        .collect();
    Ok(Graph::from_canonical(ids, edges, options.weighted))
}

pub fn load_edge_list_file(path: impl AsRef<Path>, options: LoadOptions) -> Result<Graph> {
    let file = File::open(path)?;
    load_edge_list(BufReader::new(file), options)
}

/// Writes each undirected edge once as `u v` (or `u v w` when `weighted`)
/// using external ids, in ascending `(u, v)` order.
pub fn write_edge_list<W: Write>(graph: &Graph, mut out: W, weighted: bool) -> Result<()> {
    for (u, v, w) in graph.edges() {
        let (eu, ev) = (graph.external_id(u), graph.external_id(v));
        if weighted {
            writeln!(out, "{eu} {ev} {w}")?;
        } else {
            writeln!(out, "{eu} {ev}")?;
        }
    }
    out.flush()?;
    Ok(())
}

fn parse_id(token: Option<&str>, lineno: usize, one_indexed: bool) -> Result<u64> {
    let token = token.ok_or_else(|| Error::parse(lineno, "expected two vertex ids"))?;
    let id: u64 = token
        .parse()
        .map_err(|_| Error::parse(lineno, format!("invalid vertex id {token:?}")))?;
    if one_indexed {
        id.checked_sub(1)
            .ok_or_else(|| Error::parse(lineno, "vertex id 0 in a one-indexed file"))
    } else {
        Ok(id)
    }
}
