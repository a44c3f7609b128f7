//! Plain-text graph files.
//!
//! ```text
//! # comment
//! n m k
//! u v w      (m lines: endpoint labels and a positive weight)
//! t          (k lines: terminal labels)
//! ```
//!
//! Labels are arbitrary whitespace-free strings. Dense ids are assigned in
//! order of first appearance, edges before terminals.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{GraphError, TerminalSet, VertexId, WeightedGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unexpected end of input: {0}")]
    Truncated(String),
    #[error("line {line}: {source}")]
    Graph {
        line: usize,
        #[source]
        source: GraphError,
    },
    #[error("header declares {declared} vertices but {found} distinct labels appear")]
    LabelCount { declared: usize, found: usize },
}

/// A graph with terminals and the label of every vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub graph: WeightedGraph,
    pub terminals: TerminalSet,
    pub labels: Vec<String>,
}

impl Instance {
    /// Labels each vertex by its id.
    pub fn numbered(graph: WeightedGraph, terminals: TerminalSet) -> Self {
        let labels = (0..graph.vertex_count()).map(|v| v.to_string()).collect();
        Instance {
            graph,
            terminals,
            labels,
        }
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v]
    }

    pub fn id_of(&self, label: &str) -> Option<VertexId> {
        self.labels.iter().position(|l| l == label)
    }

    /// Serializes in the file format; `parse_instance` reads it back to an
    /// equal instance.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let g = &self.graph;
        let _ = writeln!(out, "{} {} {}", g.vertex_count(), g.edge_count(), self.terminals.len());
        for e in g.edges() {
            let _ = writeln!(out, "{} {} {}", self.labels[e.u], self.labels[e.v], e.weight);
        }
        for &t in self.terminals.as_slice() {
            let _ = writeln!(out, "{}", self.labels[t]);
        }
        out
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-blank, non-comment line with its 1-based number.
    fn next_content(&mut self, what: &str) -> Result<(usize, Vec<&'a str>), ParseError> {
        for (i, line) in self.inner.by_ref() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Ok((i + 1, t.split_whitespace().collect()));
        }
        Err(ParseError::Truncated(format!("expected {what}")))
    }
}

fn field<T: std::str::FromStr>(line: usize, s: &str, what: &str) -> Result<T, ParseError> {
    s.parse().map_err(|_| ParseError::Syntax {
        line,
        message: format!("invalid {what} {s:?}"),
    })
}

fn expect_fields(line: usize, got: &[&str], want: usize, what: &str) -> Result<(), ParseError> {
    if got.len() != want {
        return Err(ParseError::Syntax {
            line,
            message: format!("expected {what} ({want} fields), found {} fields", got.len()),
        });
    }
    Ok(())
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (hl, header) = lines.next_content("header `n m k`")?;
    expect_fields(hl, &header, 3, "header `n m k`")?;
    let n: usize = field(hl, header[0], "vertex count")?;
    let m: usize = field(hl, header[1], "edge count")?;
    let k: usize = field(hl, header[2], "terminal count")?;

    let mut ids: HashMap<String, VertexId> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut intern = |label: &str, line: usize| -> Result<VertexId, ParseError> {
        if let Some(&id) = ids.get(label) {
            return Ok(id);
        }
        if labels.len() == n {
            return Err(ParseError::Syntax {
                line,
                message: format!("label {label:?} exceeds the declared {n} vertices"),
            });
        }
        ids.insert(label.to_string(), labels.len());
        labels.push(label.to_string());
        Ok(labels.len() - 1)
    };

    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (line, f) = lines.next_content("an edge line `u v w`")?;
        expect_fields(line, &f, 3, "edge `u v w`")?;
        let w: f64 = field(line, f[2], "weight")?;
        let u = intern(f[0], line)?;
        let v = intern(f[1], line)?;
        if u == v {
            return Err(ParseError::Graph {
                line,
                source: GraphError::SelfLoop(u),
            });
        }
        if !(w.is_finite() && w > 0.0) {
            return Err(ParseError::Graph {
                line,
                source: GraphError::BadWeight { u, v, weight: w },
            });
        }
        edges.push((u, v, w));
    }
    let mut terminals = Vec::with_capacity(k);
    for _ in 0..k {
        let (line, f) = lines.next_content("a terminal line")?;
        expect_fields(line, &f, 1, "terminal label")?;
        terminals.push(intern(f[0], line)?);
    }
    if let Ok((line, _)) = lines.next_content("") {
        return Err(ParseError::Syntax {
            line,
            message: "unexpected content after the terminal lines".into(),
        });
    }
    if labels.len() != n {
        return Err(ParseError::LabelCount {
            declared: n,
            found: labels.len(),
        });
    }
    let graph = WeightedGraph::from_edges(n, edges).map_err(|source| ParseError::Graph { line: hl, source })?;
    let terminals = TerminalSet::new(&graph, terminals).map_err(|source| ParseError::Graph { line: hl, source })?;
    Ok(Instance {
        graph,
        terminals,
        labels,
    })
}
