//! Query-model access to a graph.
//!
//! Estimators never touch a [`Graph`] directly; they go through one of the
//! probe-counting handles below. [`ListModel`] is the adjacency-list view the
//! local oracles run on. It is implemented by [`ListAccess`] for a stored
//! graph and by the implicit reduction graph in [`crate::virtual_h`], which
//! answers neighbor queries with adjacency-matrix probes.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::graph::{Graph, Vertex};

/// Probe totals of an access handle.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeCounts {
    pub list: u64,
    pub matrix: u64,
}

/// The adjacency-list query interface: degrees and "i-th neighbor" lookups.
///
/// Neighbor indices are 1-based, as in the query model.
pub trait ListModel {
    fn vertex_count(&self) -> usize;

    fn degree(&self, v: Vertex) -> usize;

    /// The `i`-th neighbor of `v`, or `None` when `deg(v) < i`.
    fn neighbor(&self, v: Vertex, i: usize) -> Option<Vertex>;

    /// Probes issued so far through this handle.
    fn probes(&self) -> ProbeCounts {
        ProbeCounts::default()
    }
}

/// Uncounted access, for reference computations and tests.
impl ListModel for Graph {
    fn vertex_count(&self) -> usize {
        self.n()
    }

    fn degree(&self, v: Vertex) -> usize {
        Graph::degree(self, v)
    }

    fn neighbor(&self, v: Vertex, i: usize) -> Option<Vertex> {
        if i == 0 {
            return None;
        }
        self.neighbors(v).get(i - 1).copied()
    }
}

/// How [`ListAccess`] answers degree queries.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeProbe {
    /// A direct degree query, costed as one probe.
    #[default]
    Direct,
    /// Discover the degree with neighbor probes only: doubling, then binary
    /// search. Costs `O(log deg)` probes.
    ExponentialSearch,
}

/// Adjacency-list access with an exact probe counter.
#[derive(Debug)]
pub struct ListAccess<'g> {
    graph: &'g Graph,
    probes: Cell<u64>,
    policy: DegreeProbe,
}

impl<'g> ListAccess<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        Self::with_policy(graph, DegreeProbe::Direct)
    }

    pub fn with_policy(graph: &'g Graph, policy: DegreeProbe) -> Self {
        Self { graph, probes: Cell::new(0), policy }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn probe_count(&self) -> u64 {
        self.probes.get()
    }

    fn bump(&self) {
        self.probes.set(self.probes.get() + 1);
    }

    fn exists(&self, v: Vertex, i: usize) -> bool {
        self.neighbor(v, i).is_some()
    }
}

impl ListModel for ListAccess<'_> {
    fn vertex_count(&self) -> usize {
        self.graph.n()
    }

    fn degree(&self, v: Vertex) -> usize {
        match self.policy {
            DegreeProbe::Direct => {
                self.bump();
                self.graph.degree(v)
            }
            DegreeProbe::ExponentialSearch => {
                if !self.exists(v, 1) {
                    return 0;
                }
                // Invariant: lo is a valid index, hi is not.
                let mut lo = 1;
                let mut hi = 2;
                while self.exists(v, hi) {
                    lo = hi;
                    hi *= 2;
                }
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if self.exists(v, mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        }
    }

    fn neighbor(&self, v: Vertex, i: usize) -> Option<Vertex> {
        self.bump();
        ListModel::neighbor(self.graph, v, i)
    }

    fn probes(&self) -> ProbeCounts {
        ProbeCounts { list: self.probes.get(), matrix: 0 }
    }
}

/// Adjacency-matrix access with an exact probe counter.
#[derive(Debug)]
pub struct MatrixAccess<'g> {
    graph: &'g Graph,
    probes: Cell<u64>,
}

impl<'g> MatrixAccess<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        Self { graph, probes: Cell::new(0) }
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    /// Adjacency bit of the pair `(u, v)`.
    pub fn probe(&self, u: Vertex, v: Vertex) -> bool {
        self.probes.set(self.probes.get() + 1);
        u != v && self.graph.has_edge(u, v)
    }

    pub fn probe_count(&self) -> u64 {
        self.probes.get()
    }
}
