//! `.edg` text format: a header line `N M` followed by `M` lines `u v w`
//! with 0-based `u < v` and a non-negative decimal weight. Weights are
//! written in shortest round-trip form.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::instance::graph::WeightedGraph;

pub fn read_graph(path: impl AsRef<Path>) -> Result<WeightedGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_graph(&text, path)
}

pub fn write_graph(g: &WeightedGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_graph(g)).map_err(|e| Error::io(path, e))
}

pub fn format_graph(g: &WeightedGraph) -> String {
    let mut out = String::with_capacity(16 * (g.num_edges() + 1));
    let _ = writeln!(out, "{} {}", g.n(), g.num_edges());
    for e in g.edges() {
        let _ = writeln!(out, "{} {} {}", e.u, e.v, e.w);
    }
    out
}

pub fn parse_graph(text: &str, origin: &Path) -> Result<WeightedGraph> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "missing header line".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [n, m] = fields.as_slice() else {
        return Err(err(1, format!("header must be `N M`, got {header:?}")));
    };
    let n: usize = n
        .parse()
        .map_err(|_| err(1, format!("bad node count {n:?}")))?;
    let m: usize = m
        .parse()
        .map_err(|_| err(1, format!("bad edge count {m:?}")))?;
    if n < 2 {
        return Err(err(1, format!("need at least 2 nodes, got {n}")));
    }

    let mut edges = Vec::with_capacity(m);
    let mut seen = HashSet::with_capacity(m);
    for (lineno, line) in lines {
        if line.is_empty() {
            continue;
        }
        if edges.len() == m {
            return Err(err(lineno, format!("more than the declared {m} edges")));
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [u, v, w] = parts.as_slice() else {
            return Err(err(lineno, format!("edge line must be `u v w`, got {line:?}")));
        };
        let u: usize = u.parse().map_err(|_| err(lineno, format!("bad node index {u:?}")))?;
        let v: usize = v.parse().map_err(|_| err(lineno, format!("bad node index {v:?}")))?;
        let w: f64 = w.parse().map_err(|_| err(lineno, format!("bad weight {w:?}")))?;
        if u >= n || v >= n {
            return Err(err(lineno, format!("node index out of range for {n} nodes")));
        }
        if u >= v {
            return Err(err(lineno, format!("edge ({u}, {v}) must satisfy u < v")));
        }
        if !(w.is_finite() && w >= 0.0) {
            return Err(err(lineno, format!("weight {w} must be finite and non-negative")));
        }
        if !seen.insert((u, v)) {
            return Err(err(lineno, format!("duplicate edge ({u}, {v})")));
        }
        edges.push((u, v, w));
    }
    if edges.len() != m {
        return Err(err(
            text.lines().count().max(1),
            format!("header declares {m} edges, found {}", edges.len()),
        ));
    }
    WeightedGraph::new(n, edges).map_err(|e| err(1, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, GeneratorConfig};

    fn parse(text: &str) -> Result<WeightedGraph> {
        parse_graph(text, Path::new("test.edg"))
    }

    fn parse_error_line(text: &str) -> usize {
        match parse(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_file() {
        let g = parse("2 1\n0 1 1.5\n").unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.edges()[0].w, 1.5);
    }

    #[test]
    fn canonical_text_round_trips() {
        let text = "4 3\n0 1 1.5\n0 3 0.1\n2 3 2\n";
        assert_eq!(format_graph(&parse(text).unwrap()), text);
    }

    #[test]
    fn generated_graph_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.edg");
        let g = generate(&GeneratorConfig::new(40, 2024)).unwrap();
        write_graph(&g, &path).unwrap();
        let back = read_graph(&path).unwrap();
        assert_eq!(g.num_edges(), back.num_edges());
        for (a, b) in g.edges().iter().zip(back.edges()) {
            assert_eq!(a.w.to_bits(), b.w.to_bits());
            // 17 significant digits identify a double uniquely.
            let seventeen: f64 = format!("{:.16e}", a.w).parse().unwrap();
            assert_eq!(seventeen.to_bits(), b.w.to_bits());
        }
    }

    #[test]
    fn malformed_inputs_report_lines() {
        assert_eq!(parse_error_line(""), 1);
        assert_eq!(parse_error_line("2\n"), 1);
        assert_eq!(parse_error_line("x 1\n0 1 1\n"), 1);
        assert_eq!(parse_error_line("3 2\n0 1 1\n0 3 1\n"), 3);
        assert_eq!(parse_error_line("3 1\n0 1 -2\n"), 2);
        assert_eq!(parse_error_line("3 2\n0 1 1\n0 1 2\n"), 3);
        assert_eq!(parse_error_line("3 1\n1 0 1\n"), 2);
        assert_eq!(parse_error_line("3 1\n0 1\n"), 2);
        assert_eq!(parse_error_line("3 1\n0 1 1\n1 2 1\n"), 3);
        assert!(matches!(parse("3 2\n0 1 1\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            read_graph("/definitely/not/here.edg"),
            Err(Error::Io { .. })
        ));
    }
}
