//! Local oracles for the augmentation process.
//!
//! [`OracleSession::vertex_oracle`] reports whether a vertex ends up in the
//! maximal matching `M` and in the augmenting matching `S`, by recursively
//! asking edge oracles about lower-ranked elements only. All answers inside a
//! session refer to one random order.

use rustc_hash::{FxHashMap as HashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::access::{ListModel, ProbeCounts};
use crate::graph::Vertex;
use crate::rank::{Backend, ElementRef, Entry, Kind, ParamSet, Rank, RankModel, Seed, Side};

/// An incident element that put a vertex into `M` or `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partner {
    pub vertex: Vertex,
    pub element: ElementRef,
    pub rank: Rank,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VertexStatus {
    /// Matched in `M`.
    pub st: bool,
    /// Matched in `S`.
    pub ex: bool,
    pub st_partner: Option<Partner>,
    pub ex_partner: Option<Partner>,
}

/// Counter snapshot of a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QueryStats {
    /// Edge-oracle invocations, memo hits included.
    pub f_calls: u64,
    pub list_probes: u64,
    pub matrix_probes: u64,
    /// Edge-oracle invocations answered from a memo or the lower-copy rule.
    pub memo_hits: u64,
    /// Largest number of START copies of one edge that received a fresh
    /// computation from the same endpoint.
    pub max_fresh_copies: u32,
    /// Recursive calls that broke the rank or kind ordering. Always 0 unless
    /// the session is faulty.
    pub order_violations: u64,
    pub realized_ranks: u64,
}

/// Deliberate corruption for testing the verifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fault {
    /// Store the negation of every `every`-th START memo write.
    FlipStartMemo { every: u64 },
}

/// Neighbors `v` of a scanned vertex `u` for which some copy of `(u, v)`
/// was rejected during the scan. In a rank-ordered scan a rejection means `v`
/// is already matched below, so every later copy of `(u, v)` is rejected too.
struct DeadNeighbors {
    dead: FxHashSet<Vertex>,
    degree: usize,
}

impl DeadNeighbors {
    fn new(degree: usize) -> Self {
        Self { dead: FxHashSet::default(), degree }
    }

    fn contains(&self, v: Vertex) -> bool {
        self.dead.contains(&v)
    }

    fn insert(&mut self, v: Vertex) {
        self.dead.insert(v);
    }

    /// Every remaining START element of the scan is rejected.
    fn all(&self) -> bool {
        self.dead.len() >= self.degree
    }
}

pub struct OracleSession<'g, G: ListModel> {
    graph: &'g G,
    params: ParamSet,
    model: RankModel,
    memo_start: HashMap<(ElementRef, Vertex), bool>,
    memo_extend: HashMap<(ElementRef, Vertex, bool), bool>,
    /// Lowest rank of a START copy of edge `(lo, hi)` known to be rejected
    /// from endpoint `u`. Higher copies explored from `u` are rejected too.
    rejected_copy: HashMap<(Vertex, Vertex, Vertex), Rank>,
    fresh_copies: HashMap<(Vertex, Vertex, Vertex), u32>,
    vertex_memo: HashMap<Vertex, VertexStatus>,
    degrees: HashMap<Vertex, usize>,
    stack: Vec<(Rank, Side)>,
    f_calls: u64,
    memo_hits: u64,
    max_fresh_copies: u32,
    order_violations: u64,
    start_writes: u64,
    fault: Option<Fault>,
}

impl<'g, G: ListModel> OracleSession<'g, G> {
    pub fn new(graph: &'g G, params: ParamSet, seed: Seed, backend: Backend) -> Self {
        let model = RankModel::new(seed, backend, params.k);
        Self::with_model(graph, params, model)
    }

    pub fn with_model(graph: &'g G, params: ParamSet, model: RankModel) -> Self {
        Self {
            graph,
            params,
            model,
            memo_start: HashMap::default(),
            memo_extend: HashMap::default(),
            rejected_copy: HashMap::default(),
            fresh_copies: HashMap::default(),
            vertex_memo: HashMap::default(),
            degrees: HashMap::default(),
            stack: Vec::new(),
            f_calls: 0,
            memo_hits: 0,
            max_fresh_copies: 0,
            order_violations: 0,
            start_writes: 0,
            fault: None,
        }
    }

    pub fn inject_fault(&mut self, fault: Fault) {
        self.fault = Some(fault);
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn model(&self) -> &RankModel {
        &self.model
    }

    pub fn model_mut(&mut self) -> &mut RankModel {
        &mut self.model
    }

    pub fn graph(&self) -> &'g G {
        self.graph
    }

    pub fn query_stats(&self) -> QueryStats {
        let ProbeCounts { list, matrix } = self.graph.probes();
        QueryStats {
            f_calls: self.f_calls,
            list_probes: list,
            matrix_probes: matrix,
            memo_hits: self.memo_hits,
            max_fresh_copies: self.max_fresh_copies,
            order_violations: self.order_violations,
            realized_ranks: self.model.realized() as u64,
        }
    }

    fn lowest(&mut self, side: Side, u: Vertex, i: usize) -> Option<Entry> {
        self.model.lowest(self.graph, side, u, i)
    }

    fn dead_neighbors(&mut self, u: Vertex) -> DeadNeighbors {
        let graph = self.graph;
        DeadNeighbors::new(*self.degrees.entry(u).or_insert_with(|| graph.degree(u)))
    }

    fn is_frozen(&self, entry: &Entry) -> bool {
        self.model.is_frozen(&self.params, &entry.element, &entry.rank).expect("START element")
    }

    fn enter(&mut self, rank: Rank, side: Side) {
        if let Some(&(top_rank, _)) = self.stack.last() {
            if rank >= top_rank {
                self.order_violations += 1;
            }
            if side == Side::Extend && self.stack.iter().any(|&(_, s)| s == Side::Start) {
                self.order_violations += 1;
            }
        }
        self.stack.push((rank, side));
    }

    fn leave(&mut self) {
        self.stack.pop();
    }

    /// Next element of `u` across both streams in rank order, honoring which
    /// streams are still being read. Advances the consumed stream's index.
    fn merged_next(&mut self, u: Vertex, si: &mut usize, ei: &mut usize, read_start: bool, read_extend: bool, below: Option<Rank>) -> Option<Entry> {
        let s = if read_start { self.lowest(Side::Start, u, *si) } else { None };
        let e = if read_extend { self.lowest(Side::Extend, u, *ei) } else { None };
        let s = s.filter(|x| below.map_or(true, |b| x.rank < b));
        let e = e.filter(|x| below.map_or(true, |b| x.rank < b));
        match (s, e) {
            (Some(a), Some(b)) if a.rank < b.rank => {
                *si += 1;
                Some(a)
            }
            (_, Some(b)) => {
                *ei += 1;
                Some(b)
            }
            (Some(a), None) => {
                *si += 1;
                Some(a)
            }
            (None, None) => None,
        }
    }

    /// Matching status of `u` in `M` and `S`.
    pub fn vertex_oracle(&mut self, u: Vertex) -> VertexStatus {
        if let Some(s) = self.vertex_memo.get(&u) {
            return *s;
        }
        let cu = self.model.color_of(u);
        let mut status = VertexStatus::default();
        let (mut si, mut ei) = (1, 1);
        // A frozen M-edge rules out any later S-edge at u.
        let mut frozen_here = false;
        let mut dead = self.dead_neighbors(u);
        while let Some(entry) = self.merged_next(u, &mut si, &mut ei, !status.st && !dead.all(), !status.ex && !frozen_here, None) {
            let v = entry.neighbor;
            match entry.element.kind {
                Kind::Start(_) => {
                    if dead.contains(v) {
                        continue;
                    }
                    if self.edge_oracle_start(entry.element, v) {
                        status.st = true;
                        status.st_partner = Some(Partner { vertex: v, element: entry.element, rank: entry.rank });
                        frozen_here = self.is_frozen(&entry);
                    } else {
                        dead.insert(v);
                    }
                }
                Kind::Extend => {
                    if self.model.color_of(v) == cu {
                        continue;
                    }
                    if self.edge_oracle_extend(entry.element, v, status.st) {
                        status.ex = true;
                        status.ex_partner = Some(Partner { vertex: v, element: entry.element, rank: entry.rank });
                    }
                }
            }
        }
        self.vertex_memo.insert(u, status);
        status
    }

    /// Whether START element `elem` joins `M`, exploring from endpoint `u`.
    /// Valid when every lower START element at the other endpoint is out of `M`.
    pub fn edge_oracle_start(&mut self, elem: ElementRef, u: Vertex) -> bool {
        assert!(elem.is_start(), "edge_oracle_start needs a START element");
        self.f_calls += 1;
        if let Some(&ans) = self.memo_start.get(&(elem, u)) {
            self.memo_hits += 1;
            return ans;
        }
        let rank = self.model.rank_of(self.graph, &elem).expect("valid copy index");
        let edge_key = (elem.lo, elem.hi, u);
        if self.rejected_copy.get(&edge_key).is_some_and(|&r| r < rank) {
            self.memo_hits += 1;
            return false;
        }
        let fresh = self.fresh_copies.entry(edge_key).or_insert(0);
        *fresh += 1;
        self.max_fresh_copies = self.max_fresh_copies.max(*fresh);

        self.enter(rank, Side::Start);
        let mut answer = true;
        let mut i = 1;
        let mut dead = self.dead_neighbors(u);
        while !dead.all() {
            let Some(entry) = self.lowest(Side::Start, u, i) else { break };
            if entry.rank >= rank {
                break;
            }
            i += 1;
            if dead.contains(entry.neighbor) {
                continue;
            }
            if self.edge_oracle_start(entry.element, entry.neighbor) {
                answer = false;
                break;
            }
            dead.insert(entry.neighbor);
        }
        self.leave();

        if !answer {
            let slot = self.rejected_copy.entry(edge_key).or_insert(rank);
            if rank < *slot {
                *slot = rank;
            }
        }
        self.start_writes += 1;
        let stored = match self.fault {
            Some(Fault::FlipStartMemo { every }) if self.start_writes % every.max(1) == 0 => !answer,
            _ => answer,
        };
        self.memo_start.insert((elem, u), stored);
        answer
    }

    /// Whether EXTEND element `elem` joins `S`, exploring from endpoint `u`,
    /// given whether the other endpoint has a lower M-edge (`st_w`).
    pub fn edge_oracle_extend(&mut self, elem: ElementRef, u: Vertex, st_w: bool) -> bool {
        assert!(!elem.is_start(), "edge_oracle_extend needs an EXTEND element");
        let w = elem.other(u);
        let cu = self.model.color_of(u);
        debug_assert_ne!(cu, self.model.color_of(w), "callers skip equal-color EXTEND elements");
        self.f_calls += 1;
        if let Some(&ans) = self.memo_extend.get(&(elem, u, st_w)) {
            self.memo_hits += 1;
            return ans;
        }
        let rank = self.model.rank_of(self.graph, &elem).expect("EXTEND rank");
        self.enter(rank, Side::Extend);
        let mut st_u = false;
        let mut answer = true;
        let (mut si, mut ei) = (1, 1);
        let mut dead = self.dead_neighbors(u);
        while let Some(entry) = self.merged_next(u, &mut si, &mut ei, !st_u && !dead.all(), true, Some(rank)) {
            let v = entry.neighbor;
            match entry.element.kind {
                Kind::Start(_) => {
                    if dead.contains(v) {
                        continue;
                    }
                    if self.edge_oracle_start(entry.element, v) {
                        st_u = true;
                        if self.is_frozen(&entry) || st_w {
                            answer = false;
                            break;
                        }
                    } else {
                        dead.insert(v);
                    }
                }
                Kind::Extend => {
                    if self.model.color_of(v) == cu {
                        continue;
                    }
                    if self.edge_oracle_extend(entry.element, v, st_u) {
                        answer = false;
                        break;
                    }
                }
            }
        }
        self.leave();
        self.memo_extend.insert((elem, u, st_w), answer);
        answer
    }
}
