//! Edge-list text format: a header line `n <count>`, then one `u v` per line
//! with `u < v`; `#` starts a comment.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Graph, GraphError};

pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let mut graph: Option<Graph> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| GraphError::Parse { line: line_no, msg: msg.to_string() };
        let mut fields = line.split_whitespace();
        let (a, b) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(err("expected exactly two fields")),
        };
        match graph.as_mut() {
            None => {
                if a != "n" {
                    return Err(err("expected header `n <count>`"));
                }
                let n: usize = b.parse().map_err(|_| err("vertex count is not a number"))?;
                graph = Some(Graph::empty(n));
            }
            Some(g) => {
                let u: usize = a.parse().map_err(|_| err("endpoint is not a number"))?;
                let v: usize = b.parse().map_err(|_| err("endpoint is not a number"))?;
                if u >= v {
                    return Err(err("expected u < v"));
                }
                if v >= g.n() {
                    return Err(err("endpoint out of range"));
                }
                if !g.add_edge(u, v) {
                    return Err(err("duplicate edge"));
                }
            }
        }
    }
    graph.ok_or(GraphError::Parse { line: 0, msg: "missing header `n <count>`".to_string() })
}

/// Canonical text: header, then edges in lexicographic order.
pub fn write_graph(g: &Graph) -> String {
    let mut out = format!("n {}\n", g.n());
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph, GraphError> {
    parse_graph(&fs::read_to_string(path)?)
}

pub fn save_graph(g: &Graph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    let mut f = fs::File::create(path)?;
    f.write_all(write_graph(g).as_bytes())?;
    Ok(())
}
