//! The implicit graph `H` that turns adjacency-matrix input into
//! adjacency-list input.
//!
//! `H` has two copies `V1`, `V2` of the vertex set and, for every vertex `v`,
//! a block `U_v` of `gamma` pendant vertices attached to `V2(v)`. `V1(v)` is
//! adjacent to `V1(w)` when `{v, w}` is an edge of `G` and to `V2(w)`
//! otherwise; `V2` mirrors this. Every neighbor query on `H` costs at most one
//! matrix probe on `G`, and `H` restricted to `V1` is `G` itself.

use serde::{Deserialize, Serialize};

use crate::access::{ListModel, MatrixAccess, ProbeCounts};
use crate::graph::{Graph, Vertex};
use crate::rank::GraphShape;

/// A vertex of `H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HVertex {
    V1(Vertex),
    V2(Vertex),
    /// Pendant `slot` (1-based, at most `gamma`) of `owner`'s block.
    U { owner: Vertex, slot: usize },
}

/// Pad size `gamma = 4 n ceil(log2 n)`.
pub fn gamma(n: usize) -> usize {
    4 * n * ceil_log2(n)
}

fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

impl HVertex {
    /// Integer id: `V1` in `[0, n)`, `V2` in `[n, 2n)`, `U` from `2n` on.
    pub fn id(self, n: usize, gamma: usize) -> usize {
        match self {
            HVertex::V1(v) => v,
            HVertex::V2(v) => n + v,
            HVertex::U { owner, slot } => 2 * n + owner * gamma + (slot - 1),
        }
    }

    pub fn from_id(id: usize, n: usize, gamma: usize) -> Self {
        if id < n {
            HVertex::V1(id)
        } else if id < 2 * n {
            HVertex::V2(id - n)
        } else {
            let off = id - 2 * n;
            HVertex::U { owner: off / gamma, slot: off % gamma + 1 }
        }
    }
}

/// Degree of an `H` vertex; no probes.
pub fn h_degree(hv: HVertex, n: usize, gamma: usize) -> usize {
    match hv {
        HVertex::V1(_) => n,
        HVertex::V2(_) => n + gamma,
        HVertex::U { .. } => 1,
    }
}

/// `(m_H, |T_H|)` for a graph on `n` vertices and `K` START copies.
pub fn h_element_space(n: usize, k: u64) -> (u64, u128) {
    let g = gamma(n) as u64;
    let n = n as u64;
    let m = n * n + n * g;
    (m, m as u128 * (k as u128 + 1))
}

/// Size data of `H`, for parameter derivation.
pub fn h_shape(n: usize) -> GraphShape {
    let g = gamma(n);
    GraphShape {
        n: (2 * n + n * g) as u64,
        m: h_element_space(n, 0).0,
        max_degree: (n + g) as u64,
    }
}

/// `H` as an adjacency-list model backed by matrix probes on `G`.
#[derive(Debug)]
pub struct HGraph<'g> {
    access: MatrixAccess<'g>,
    n: usize,
    gamma: usize,
}

impl<'g> HGraph<'g> {
    pub fn new(access: MatrixAccess<'g>) -> Self {
        let n = access.n();
        Self { access, n, gamma: gamma(n) }
    }

    pub fn over(graph: &'g Graph) -> Self {
        Self::new(MatrixAccess::new(graph))
    }

    pub fn base_n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn access(&self) -> &MatrixAccess<'g> {
        &self.access
    }

    pub fn vertex(&self, id: usize) -> HVertex {
        HVertex::from_id(id, self.n, self.gamma)
    }

    pub fn id(&self, hv: HVertex) -> usize {
        hv.id(self.n, self.gamma)
    }

    /// The `i`-th neighbor (1-based) of `hv`, with at most one matrix probe.
    pub fn h_neighbor(&self, hv: HVertex, i: usize) -> Option<HVertex> {
        if i == 0 || i > h_degree(hv, self.n, self.gamma) {
            return None;
        }
        Some(match hv {
            HVertex::V1(v) => {
                let t = i - 1;
                if self.access.probe(v, t) {
                    HVertex::V1(t)
                } else {
                    HVertex::V2(t)
                }
            }
            HVertex::V2(v) if i <= self.n => {
                let t = i - 1;
                if self.access.probe(v, t) {
                    HVertex::V2(t)
                } else {
                    HVertex::V1(t)
                }
            }
            HVertex::V2(v) => HVertex::U { owner: v, slot: i - self.n },
            HVertex::U { owner, .. } => HVertex::V2(owner),
        })
    }
}

impl ListModel for HGraph<'_> {
    fn vertex_count(&self) -> usize {
        2 * self.n + self.n * self.gamma
    }

    fn degree(&self, v: Vertex) -> usize {
        h_degree(self.vertex(v), self.n, self.gamma)
    }

    fn neighbor(&self, v: Vertex, i: usize) -> Option<Vertex> {
        self.h_neighbor(self.vertex(v), i).map(|hv| self.id(hv))
    }

    fn probes(&self) -> ProbeCounts {
        ProbeCounts { list: 0, matrix: self.access.probe_count() }
    }
}
