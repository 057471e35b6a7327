use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use super::{Edge, Graph, GraphError};

/// Parses `u v` lines (0-indexed, `#` starts a comment). The vertex count is
/// one more than the largest id mentioned.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    let mut n = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let mut id = |what: &str| -> Result<usize, GraphError> {
            let tok = parts.next().ok_or_else(|| GraphError::Parse {
                line: line_no,
                message: format!("missing {what} vertex"),
            })?;
            tok.parse().map_err(|_| GraphError::Parse {
                line: line_no,
                message: format!("{tok:?} is not a vertex id"),
            })
        };
        let u = id("first")?;
        let v = id("second")?;
        if parts.next().is_some() {
            return Err(GraphError::Parse {
                line: line_no,
                message: "expected exactly two ids".into(),
            });
        }
        if u == v {
            return Err(GraphError::SelfLoop {
                vertex: u,
                line: Some(line_no),
            });
        }
        let e = Edge::new(u, v);
        if !seen.insert(e) {
            return Err(GraphError::DuplicateEdge {
                u: e.0,
                v: e.1,
                line: Some(line_no),
            });
        }
        n = n.max(e.1 + 1);
        edges.push((u, v));
    }
    Graph::from_edges(n, edges)
}

pub fn read_edge_list(path: &Path) -> Result<Graph, GraphError> {
    let text = std::fs::read_to_string(path).map_err(|e| GraphError::Io(e.to_string()))?;
    parse_edge_list(&text)
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("# n={} m={}\n", g.n(), g.m());
    for e in g.edges() {
        let _ = writeln!(out, "{} {}", e.0, e.1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments() {
        let g = parse_edge_list("# header\n0 1\n1 2 # trailing\n\n2 0\n").unwrap();
        assert_eq!((g.n(), g.m()), (3, 3));
    }

    #[test]
    fn reports_line_numbers() {
        assert_eq!(
            parse_edge_list("0 1\n2 2\n"),
            Err(GraphError::SelfLoop {
                vertex: 2,
                line: Some(2)
            })
        );
        assert_eq!(
            parse_edge_list("0 1\n1 2\n1 0\n"),
            Err(GraphError::DuplicateEdge {
                u: 0,
                v: 1,
                line: Some(3)
            })
        );
        assert!(matches!(
            parse_edge_list("0 x\n"),
            Err(GraphError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn round_trip() {
        let g = Graph::from_edges(5, [(0, 4), (1, 3), (2, 3)]).unwrap();
        assert_eq!(parse_edge_list(&write_edge_list(&g)).unwrap(), g);
    }
}
