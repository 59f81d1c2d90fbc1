//! Edge-list and update-stream text formats.
//!
//! Edge lists hold one `u v` pair per line; extra columns (weights,
//! timestamps) are ignored and lines starting with `#` or `%` are comments,
//! so SNAP and KONECT dumps load directly. Update streams hold `I u v` or
//! `D u v` lines. Node labels are arbitrary unsigned integers and are
//! remapped densely to `0..n` in ascending label order.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use forestq_core::{Digraph, Edge, NodeId, UpdateEvent, UpdateKind};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Directed,
    /// Every edge `{u, v}` becomes the pair `(u, v)`, `(v, u)`.
    Undirected,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Directed => "directed",
            Mode::Undirected => "undirected",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "directed" => Ok(Mode::Directed),
            "undirected" => Ok(Mode::Undirected),
            other => Err(format!(
                "unknown mode '{other}' (expected directed|undirected)"
            )),
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown node label {label}")]
    UnknownNode { line: usize, label: u64 },
}

/// A graph together with the label mapping used to build it.
#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: Digraph,
    pub mode: Mode,
    labels: Vec<u64>,
    index: HashMap<u64, usize>,
    /// Directed edges dropped because they were already present.
    pub duplicates: usize,
    /// Lines dropped because both endpoints were equal.
    pub self_loops: usize,
}

impl LoadedGraph {
    /// Wraps an in-memory graph whose labels are its node indices.
    pub fn from_digraph(graph: Digraph, mode: Mode) -> Self {
        let labels: Vec<u64> = (0..graph.node_count() as u64).collect();
        let index = labels.iter().map(|&l| (l, l as usize)).collect();
        LoadedGraph {
            graph,
            mode,
            labels,
            index,
            duplicates: 0,
            self_loops: 0,
        }
    }

    pub fn node(&self, label: u64) -> Option<NodeId> {
        self.index.get(&label).map(|&i| NodeId::new(i))
    }

    pub fn label(&self, node: NodeId) -> u64 {
        self.labels[node.index()]
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }
}

fn data_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String), IoError>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(k, line)| match line {
            Err(e) => Some(Err(IoError::Io(e))),
            Ok(l) => {
                let t = l.trim();
                if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
                    None
                } else {
                    Some(Ok((k + 1, t.to_string())))
                }
            }
        })
}

fn parse_label(tok: Option<&str>, line: usize) -> Result<u64, IoError> {
    let tok = tok.ok_or_else(|| IoError::Parse {
        line,
        message: "expected two node labels".into(),
    })?;
    tok.parse().map_err(|_| IoError::Parse {
        line,
        message: format!("invalid node label '{tok}'"),
    })
}

/// Reads an edge list.
pub fn load_graph<R: BufRead>(reader: R, mode: Mode) -> Result<LoadedGraph, IoError> {
    let mut pairs = Vec::new();
    let mut labels = BTreeSet::new();
    for item in data_lines(reader) {
        let (line, text) = item?;
        let mut toks = text.split_whitespace();
        let u = parse_label(toks.next(), line)?;
        let v = parse_label(toks.next(), line)?;
        labels.insert(u);
        labels.insert(v);
        pairs.push((u, v));
    }
    let labels: Vec<u64> = labels.into_iter().collect();
    let index: HashMap<u64, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let mut graph = Digraph::new(labels.len());
    let (mut duplicates, mut self_loops) = (0, 0);
    for (u, v) in pairs {
        if u == v {
            self_loops += 1;
            continue;
        }
        let (a, b) = (index[&u], index[&v]);
        let dirs: &[(usize, usize)] = match mode {
            Mode::Directed => &[(a, b)],
            Mode::Undirected => &[(a, b), (b, a)],
        };
        for &(x, y) in dirs {
            if graph.insert_edge(Edge::new(x, y)).is_err() {
                duplicates += 1;
            }
        }
    }
    Ok(LoadedGraph {
        graph,
        mode,
        labels,
        index,
        duplicates,
        self_loops,
    })
}

pub fn load_graph_file(path: &Path, mode: Mode) -> Result<LoadedGraph, IoError> {
    load_graph(BufReader::new(File::open(path)?), mode)
}

/// Parsed update stream. `lines[k]` is the source line of `events[k]`.
#[derive(Clone, Debug, Default)]
pub struct UpdateStream {
    pub events: Vec<UpdateEvent>,
    pub lines: Vec<usize>,
}

/// Reads an update stream against the labels of `g`. In undirected mode a
/// line expands to two events, `(u, v)` then `(v, u)`.
pub fn parse_update_stream<R: BufRead>(
    reader: R,
    g: &LoadedGraph,
) -> Result<UpdateStream, IoError> {
    let mut out = UpdateStream::default();
    for item in data_lines(reader) {
        let (line, text) = item?;
        let mut toks = text.split_whitespace();
        let kind = match toks.next() {
            Some("I") | Some("i") => UpdateKind::Insert,
            Some("D") | Some("d") => UpdateKind::Delete,
            Some(other) => {
                return Err(IoError::Parse {
                    line,
                    message: format!("unknown operation '{other}' (expected I or D)"),
                })
            }
            None => unreachable!(),
        };
        let u = parse_label(toks.next(), line)?;
        let v = parse_label(toks.next(), line)?;
        if toks.next().is_some() {
            return Err(IoError::Parse {
                line,
                message: "trailing tokens after edge".into(),
            });
        }
        let a = g.node(u).ok_or(IoError::UnknownNode { line, label: u })?;
        let b = g.node(v).ok_or(IoError::UnknownNode { line, label: v })?;
        let mut push = |e: Edge| {
            let sequence = out.events.len() as u64;
            out.events.push(UpdateEvent {
                kind,
                edge: e,
                sequence,
            });
            out.lines.push(line);
        };
        push(Edge::new(a, b));
        if g.mode == Mode::Undirected {
            push(Edge::new(b, a));
        }
    }
    Ok(out)
}

pub fn load_update_stream_file(path: &Path, g: &LoadedGraph) -> Result<UpdateStream, IoError> {
    parse_update_stream(BufReader::new(File::open(path)?), g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, mode: Mode) -> LoadedGraph {
        load_graph(text.as_bytes(), mode).unwrap()
    }

    #[test]
    fn three_cycle() {
        let g = load("0 1\n1 2\n2 0\n", Mode::Directed);
        assert_eq!(g.graph.node_count(), 3);
        assert_eq!(g.graph.edge_count(), 3);
    }

    #[test]
    fn empty_input() {
        let g = load("", Mode::Directed);
        assert_eq!(g.graph.node_count(), 0);
        assert_eq!(g.graph.edge_count(), 0);
    }

    #[test]
    fn undirected_line_gives_both_directions() {
        let g = load("0 1\n", Mode::Undirected);
        assert_eq!(g.graph.edge_count(), 2);
        assert_eq!(g.graph.out_neighbors(NodeId::new(0)), &[NodeId::new(1)]);
        assert_eq!(g.graph.out_neighbors(NodeId::new(1)), &[NodeId::new(0)]);
    }

    #[test]
    fn comments_duplicates_and_loops() {
        let g = load(
            "# header\n% konect\n\n0 1 1.0 12345\n0 1\n2 2\n1 0\n",
            Mode::Directed,
        );
        assert_eq!(g.graph.edge_count(), 2);
        assert_eq!(g.duplicates, 1);
        assert_eq!(g.self_loops, 1);
        assert_eq!(g.graph.node_count(), 3);
    }

    #[test]
    fn undirected_reverse_line_is_duplicate() {
        let g = load("0 1\n1 0\n", Mode::Undirected);
        assert_eq!(g.graph.edge_count(), 2);
        assert_eq!(g.duplicates, 2);
    }

    #[test]
    fn labels_remap_densely_in_order() {
        let g = load("100 7\n7 42\n", Mode::Directed);
        assert_eq!(g.labels(), &[7, 42, 100]);
        assert_eq!(g.node(100), Some(NodeId::new(2)));
        assert!(g.graph.has_edge(NodeId::new(2), NodeId::new(0)));
        assert_eq!(g.label(NodeId::new(1)), 42);
        assert_eq!(g.node(5), None);
    }

    #[test]
    fn malformed_lines_report_line_number() {
        let err = load_graph("0 1\n1\n".as_bytes(), Mode::Directed).unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 2, .. }), "{err}");
        let err = load_graph("0 1\n# c\nx 2\n".as_bytes(), Mode::Directed).unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 3, .. }), "{err}");
        let err = load_graph("-1 2\n".as_bytes(), Mode::Directed).unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 1, .. }));
    }

    #[test]
    fn update_stream_parses() {
        let g = load("0 1\n1 2\n2 0\n", Mode::Directed);
        let s = parse_update_stream("# s\nI 0 2\nD 2 0\n".as_bytes(), &g).unwrap();
        assert_eq!(s.events.len(), 2);
        assert_eq!(s.events[0].kind, UpdateKind::Insert);
        assert_eq!(s.events[1].edge, Edge::new(2, 0));
        assert_eq!(s.events[1].sequence, 1);
        assert_eq!(s.lines, vec![2, 3]);
    }

    #[test]
    fn undirected_stream_expands() {
        let g = load("0 1\n1 2\n", Mode::Undirected);
        let s = parse_update_stream("D 1 2\n".as_bytes(), &g).unwrap();
        assert_eq!(s.events.len(), 2);
        assert_eq!(s.events[1].edge, Edge::new(2, 1));
        assert_eq!(s.lines, vec![1, 1]);
    }

    #[test]
    fn update_stream_errors() {
        let g = load("0 1\n", Mode::Directed);
        let e = parse_update_stream("X 0 1\n".as_bytes(), &g).unwrap_err();
        assert!(matches!(e, IoError::Parse { line: 1, .. }));
        let e = parse_update_stream("I 0 9\n".as_bytes(), &g).unwrap_err();
        assert!(matches!(e, IoError::UnknownNode { line: 1, label: 9 }));
        let e = parse_update_stream("I 0 1 2\n".as_bytes(), &g).unwrap_err();
        assert!(matches!(e, IoError::Parse { .. }));
    }

    #[test]
    fn mode_round_trip() {
        assert_eq!("Undirected".parse::<Mode>().unwrap(), Mode::Undirected);
        assert_eq!(Mode::Directed.to_string(), "directed");
        assert!("both".parse::<Mode>().is_err());
    }
}
