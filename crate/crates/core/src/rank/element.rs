use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::Vertex;

/// START copies build the maximal matching; the single EXTEND copy of an
/// edge may join the augmenting matching.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    /// START copy with 0-based copy index `< K`.
    Start(u32),
    Extend,
}

/// Which per-vertex element stream a query walks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Start,
    Extend,
}

/// One element of the sequence of edge copies, identified by its canonical
/// endpoint pair (`lo < hi`) and kind. Both endpoints derive the same value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ElementRef {
    pub lo: Vertex,
    pub hi: Vertex,
    pub kind: Kind,
}

impl ElementRef {
    pub fn new(u: Vertex, v: Vertex, kind: Kind) -> Self {
        debug_assert_ne!(u, v, "elements live on edges, not self-loops");
        Self { lo: u.min(v), hi: u.max(v), kind }
    }

    pub fn start(u: Vertex, v: Vertex, copy: u32) -> Self {
        Self::new(u, v, Kind::Start(copy))
    }

    pub fn extend(u: Vertex, v: Vertex) -> Self {
        Self::new(u, v, Kind::Extend)
    }

    pub fn is_start(&self) -> bool {
        matches!(self.kind, Kind::Start(_))
    }

    pub fn side(&self) -> Side {
        match self.kind {
            Kind::Start(_) => Side::Start,
            Kind::Extend => Side::Extend,
        }
    }

    /// The endpoint that is not `v`.
    pub fn other(&self, v: Vertex) -> Vertex {
        debug_assert!(v == self.lo || v == self.hi);
        if v == self.lo {
            self.hi
        } else {
            self.lo
        }
    }

    pub fn endpoints(&self) -> (Vertex, Vertex) {
        (self.lo, self.hi)
    }

    pub(crate) fn code(&self) -> u64 {
        match self.kind {
            Kind::Start(c) => c as u64,
            Kind::Extend => u64::MAX,
        }
    }
}

impl fmt::Display for ElementRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::Start(c) => write!(f, "({}, {}, start#{c})", self.lo, self.hi),
            Kind::Extend => write!(f, "({}, {}, extend)", self.lo, self.hi),
        }
    }
}

/// Position of an element in the random order: a 64-bit value with the
/// canonical element id as tiebreak, so no two elements compare equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rank {
    pub value: u64,
    lo: u64,
    hi: u64,
    code: u64,
}

impl Rank {
    pub fn new(value: u64, element: &ElementRef) -> Self {
        Self { value, lo: element.lo as u64, hi: element.hi as u64, code: element.code() }
    }

    /// The rank's place in `(0, 1]`, the continuous analogue of `pi(l) / |T|`.
    pub fn fraction(&self) -> f64 {
        (self.value as f64 + 1.0) / 18_446_744_073_709_551_616.0
    }
}
