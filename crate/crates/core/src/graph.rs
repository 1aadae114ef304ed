//! Immutable simple undirected graphs in compact adjacency-array form, plus the
//! plain-text edge-list format used by the CLI and test fixtures.
//!
//! The edge-list format is line oriented: the first non-empty line holds
//! `n m`, and each of the following `m` lines holds one edge `u v` with
//! `0 <= u, v < n`. Edge ids are assigned in file order. Lines starting with
//! `#` are ignored.

use std::fmt::Write as _;
use std::io::Read;

use thiserror::Error;

/// Vertex identifier. Vertices of an `n`-vertex graph are `0..n`.
pub type Vertex = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { line: usize, vertex: usize, n: usize },
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: duplicate edge {{{u}, {v}}}")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("header declares {declared} edges but {found} were read")]
    EdgeCountMismatch { declared: usize, found: usize },
    #[error("io error: {0}")]
    Io(String),
}

/// A simple undirected graph with stable edge ids `0..m`.
///
/// Adjacency arrays are sorted by neighbor id; each entry carries the id of
/// the incident edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    offsets: Vec<usize>,
    neighbors: Vec<Vertex>,
    edge_ids: Vec<usize>,
    max_degree: usize,
}

impl Graph {
    /// Builds a graph from an edge list. Edge `i` of the list gets id `i`.
    /// Line numbers in errors are 1-based positions in `edges` offset by one
    /// (matching the file format, whose first line is the header).
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self, GraphError> {
        for (i, &(u, v)) in edges.iter().enumerate() {
            let line = i + 2;
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { line, vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { line, vertex: u });
            }
        }

        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut slots: Vec<(Vertex, usize)> = vec![(0, 0); 2 * edges.len()];
        let mut fill = offsets[..n].to_vec();
        for (id, &(u, v)) in edges.iter().enumerate() {
            slots[fill[u]] = (v, id);
            fill[u] += 1;
            slots[fill[v]] = (u, id);
            fill[v] += 1;
        }
        for v in 0..n {
            let row = &mut slots[offsets[v]..offsets[v + 1]];
            row.sort_unstable();
            for pair in row.windows(2) {
                if pair[0].0 == pair[1].0 {
                    let later = pair[0].1.max(pair[1].1);
                    let (a, b) = edges[later];
                    return Err(GraphError::DuplicateEdge { line: later + 2, u: a, v: b });
                }
            }
        }
        let (neighbors, edge_ids) = slots.into_iter().unzip();
        Ok(Self {
            n,
            edges: edges.to_vec(),
            offsets,
            neighbors,
            edge_ids,
            max_degree: degree.iter().copied().max().unwrap_or(0),
        })
    }

    pub fn empty(n: usize) -> Self {
        Self::from_edges(n, &[]).expect("edgeless graph is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Average degree `2m / n`; zero for the vertexless graph.
    pub fn avg_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            2.0 * self.m() as f64 / self.n as f64
        }
    }

    /// Average degree as the exact fraction `(2m, n)`.
    pub fn avg_degree_ratio(&self) -> (usize, usize) {
        (2 * self.m(), self.n)
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Sorted neighbors of `v`.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// `(neighbor, edge id)` pairs of `v`, sorted by neighbor.
    pub fn incident(&self, v: Vertex) -> impl Iterator<Item = (Vertex, usize)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.neighbors[range.clone()].iter().copied().zip(self.edge_ids[range].iter().copied())
    }

    pub fn edge(&self, id: usize) -> (Vertex, Vertex) {
        self.edges[id]
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn edge_id(&self, u: Vertex, v: Vertex) -> Option<usize> {
        if u >= self.n || v >= self.n {
            return None;
        }
        let row = self.neighbors(u);
        row.binary_search(&v).ok().map(|i| self.edge_ids[self.offsets[u] + i])
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edge_id(u, v).is_some()
    }

    /// Writes the graph in edge-list format, edges in id order.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(12 * (self.m() + 1));
        let _ = writeln!(out, "{} {}", self.n, self.m());
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// Parses the edge-list text format.
pub fn load_edge_list<R: Read>(mut reader: R) -> Result<Graph, GraphError> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|e| GraphError::Io(e.to_string()))?;
    parse_edge_list(&text)
}

pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines
        .next()
        .ok_or(GraphError::Parse { line: 1, message: "missing header `n m`".into() })?;
    let (n, m) = parse_pair(header_line, header)?;

    let mut edges = Vec::with_capacity(m);
    let mut line_of = Vec::with_capacity(m);
    for (line, l) in lines {
        let (u, v) = parse_pair(line, l)?;
        edges.push((u, v));
        line_of.push(line);
    }
    if edges.len() != m {
        return Err(GraphError::EdgeCountMismatch { declared: m, found: edges.len() });
    }
    // `from_edges` reports positions assuming a compact file; map back to real lines.
    Graph::from_edges(n, &edges).map_err(|e| remap_line(e, &line_of))
}

fn remap_line(err: GraphError, line_of: &[usize]) -> GraphError {
    let fix = |line: usize| line_of.get(line - 2).copied().unwrap_or(line);
    match err {
        GraphError::VertexOutOfRange { line, vertex, n } => {
            GraphError::VertexOutOfRange { line: fix(line), vertex, n }
        }
        GraphError::SelfLoop { line, vertex } => GraphError::SelfLoop { line: fix(line), vertex },
        GraphError::DuplicateEdge { line, u, v } => GraphError::DuplicateEdge { line: fix(line), u, v },
        other => other,
    }
}

fn parse_pair(line: usize, text: &str) -> Result<(usize, usize), GraphError> {
    let mut parts = text.split_whitespace();
    let mut next = |what: &str| -> Result<usize, GraphError> {
        let tok = parts
            .next()
            .ok_or_else(|| GraphError::Parse { line, message: format!("missing {what}") })?;
        tok.parse::<usize>()
            .map_err(|_| GraphError::Parse { line, message: format!("invalid {what} `{tok}`") })
    };
    let a = next("first field")?;
    let b = next("second field")?;
    if let Some(extra) = parts.next() {
        return Err(GraphError::Parse { line, message: format!("unexpected trailing field `{extra}`") });
    }
    Ok((a, b))
}
