use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap as HashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::element::{ElementRef, Kind, Rank, Side};
use super::params::ParamSet;
use super::seed::{mix, Seed, DOMAIN_COLOR, DOMAIN_FREEZE, DOMAIN_RANK};
use crate::access::ListModel;
use crate::graph::Vertex;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RankError {
    #[error("copy index {copy} out of range for K = {k}")]
    CopyOutOfRange { copy: u32, k: u64 },
    #[error("freeze status is only defined for START elements, got {0}")]
    NotStart(ElementRef),
}

/// How ranks are produced.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Rank is a keyed hash of the element. Per-vertex streams are
    /// materialized and sorted on first touch, costing `K * deg` work.
    Eager,
    /// Ranks are sampled on demand in increasing order; work is proportional
    /// to the number of elements actually inspected.
    #[default]
    Lazy,
}

/// One element of a vertex's stream, as seen from that vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub rank: Rank,
    pub neighbor: Vertex,
    pub element: ElementRef,
}

/// Rank value of an element under the eager backend.
pub fn eager_rank(seed: Seed, element: &ElementRef) -> Rank {
    let value = mix(seed, DOMAIN_RANK, &[element.lo as u64, element.hi as u64, element.code()]);
    Rank::new(value, element)
}

/// Vertex color, 0 or 1, uniform and independent per vertex.
pub fn color(seed: Seed, v: Vertex) -> u8 {
    (mix(seed, DOMAIN_COLOR, &[v as u64]) & 1) as u8
}

/// The freeze coin of a START element: `true` with probability `1 - p`.
pub fn freeze_coin(seed: Seed, element: &ElementRef, p: f64) -> bool {
    let h = mix(seed, DOMAIN_FREEZE, &[element.lo as u64, element.hi as u64, element.code()]);
    let threshold = ((1.0 - p) * 18_446_744_073_709_551_616.0) as u64;
    h < threshold
}

/// Whether a START element that enters the maximal matching is frozen.
pub fn frozen(seed: Seed, params: &ParamSet, element: &ElementRef, rank: &Rank) -> Result<bool, RankError> {
    if !element.is_start() {
        return Err(RankError::NotStart(*element));
    }
    if color(seed, element.lo) == color(seed, element.hi) {
        return Ok(true);
    }
    if params.partition_of_rank(rank) != params.j_star {
        return Ok(true);
    }
    Ok(freeze_coin(seed, element, params.p))
}

/// The random order over elements, with per-vertex "i-th lowest" streams.
pub struct RankModel {
    seed: Seed,
    backend: Backend,
    k: u64,
    eager: HashMap<(Vertex, Side), Vec<Entry>>,
    lazy: LazyState,
}

impl RankModel {
    pub fn new(seed: Seed, backend: Backend, k: u64) -> Self {
        assert!(k >= 1 && k <= u32::MAX as u64, "K must fit a copy index");
        Self {
            seed,
            backend,
            k,
            eager: HashMap::default(),
            lazy: LazyState::new(seed),
        }
    }

    pub fn seed(&self) -> Seed {
        self.seed
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn color_of(&self, v: Vertex) -> u8 {
        color(self.seed, v)
    }

    pub fn is_frozen(&self, params: &ParamSet, element: &ElementRef, rank: &Rank) -> Result<bool, RankError> {
        frozen(self.seed, params, element, rank)
    }

    /// Number of elements in the stream of `u` on `side`.
    pub fn element_count<G: ListModel>(&self, g: &G, side: Side, u: Vertex) -> u64 {
        let deg = g.degree(u) as u64;
        match side {
            Side::Start => deg * self.k,
            Side::Extend => deg,
        }
    }

    /// Elements whose rank has been fixed so far.
    pub fn realized(&self) -> usize {
        match self.backend {
            Backend::Eager => self.eager.values().map(Vec::len).sum(),
            Backend::Lazy => self.lazy.registry.len(),
        }
    }

    /// Rank of an element incident to a real edge.
    pub fn rank_of<G: ListModel>(&mut self, g: &G, element: &ElementRef) -> Result<Rank, RankError> {
        if let Kind::Start(copy) = element.kind {
            if copy as u64 >= self.k {
                return Err(RankError::CopyOutOfRange { copy, k: self.k });
            }
        }
        Ok(match self.backend {
            Backend::Eager => eager_rank(self.seed, element),
            Backend::Lazy => self.lazy.rank_of(g, self.k, element),
        })
    }

    /// The `i`-th lowest (1-based) element of `u`'s stream on `side`.
    pub fn lowest<G: ListModel>(&mut self, g: &G, side: Side, u: Vertex, i: usize) -> Option<Entry> {
        debug_assert!(i >= 1);
        match self.backend {
            Backend::Eager => {
                let (seed, k) = (self.seed, self.k);
                let list = self
                    .eager
                    .entry((u, side))
                    .or_insert_with(|| materialize(g, seed, k, side, u));
                list.get(i - 1).copied()
            }
            Backend::Lazy => self.lazy.lowest(g, self.k, side, u, i),
        }
    }
}

fn materialize<G: ListModel>(g: &G, seed: Seed, k: u64, side: Side, u: Vertex) -> Vec<Entry> {
    let deg = g.degree(u);
    let mut out = Vec::with_capacity(match side {
        Side::Start => deg * k as usize,
        Side::Extend => deg,
    });
    for i in 1..=deg {
        let v = g.neighbor(u, i).expect("index within degree");
        match side {
            Side::Start => {
                for c in 0..k as u32 {
                    let element = ElementRef::start(u, v, c);
                    out.push(Entry { rank: eager_rank(seed, &element), neighbor: v, element });
                }
            }
            Side::Extend => {
                let element = ElementRef::extend(u, v);
                out.push(Entry { rank: eager_rank(seed, &element), neighbor: v, element });
            }
        }
    }
    out.sort_unstable_by_key(|e| e.rank);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Pending {
    rank: Rank,
    element: ElementRef,
}

struct LazyVertex {
    total: u64,
    realized: u64,
    /// Every element of this stream with rank value `<= cursor` is realized.
    cursor: u64,
    pending: BinaryHeap<Reverse<Pending>>,
    returned: Vec<Entry>,
    neighbors: HashMap<usize, Vertex>,
    /// Stream indices that may still be unrealized, built once rejection
    /// sampling stops working. Stale entries are dropped when drawn.
    free: Option<Vec<u64>>,
}

struct LazyState {
    rng: ChaCha8Rng,
    registry: HashMap<ElementRef, Rank>,
    vertices: HashMap<(Vertex, Side), LazyVertex>,
}

// Uniform draws before falling back to enumerating unrealized elements.
const REJECTION_TRIES: usize = 64;

impl LazyState {
    fn new(seed: Seed) -> Self {
        Self {
            rng: ChaCha8Rng::from_seed(seed.stream_key("lazy-ranks")),
            registry: HashMap::default(),
            vertices: HashMap::default(),
        }
    }

    fn ensure<G: ListModel>(&mut self, g: &G, k: u64, u: Vertex, side: Side) {
        self.vertices.entry((u, side)).or_insert_with(|| {
            let deg = g.degree(u) as u64;
            LazyVertex {
                total: if side == Side::Start { deg * k } else { deg },
                realized: 0,
                cursor: 0,
                pending: BinaryHeap::new(),
                returned: Vec::new(),
                neighbors: HashMap::default(),
                free: None,
            }
        });
    }

    fn cursor(&self, u: Vertex, side: Side) -> u64 {
        self.vertices.get(&(u, side)).map_or(0, |s| s.cursor)
    }

    /// Fixes the rank of a new element, informing both endpoint streams.
    fn register<G: ListModel>(&mut self, g: &G, k: u64, element: ElementRef, rank: Rank) {
        let side = element.side();
        self.registry.insert(element, rank);
        for w in [element.lo, element.hi] {
            self.ensure(g, k, w, side);
            let st = self.vertices.get_mut(&(w, side)).expect("ensured");
            st.realized += 1;
            st.pending.push(Reverse(Pending { rank, element }));
        }
    }

    fn rank_of<G: ListModel>(&mut self, g: &G, k: u64, element: &ElementRef) -> Rank {
        if let Some(r) = self.registry.get(element) {
            return *r;
        }
        let side = element.side();
        let floor = self.cursor(element.lo, side).max(self.cursor(element.hi, side));
        let value = self.rng.gen_range(floor + 1..=u64::MAX);
        let rank = Rank::new(value, element);
        self.register(g, k, *element, rank);
        rank
    }

    fn lowest<G: ListModel>(&mut self, g: &G, k: u64, side: Side, u: Vertex, i: usize) -> Option<Entry> {
        self.ensure(g, k, u, side);
        loop {
            let st = &self.vertices[&(u, side)];
            if st.returned.len() >= i {
                return Some(st.returned[i - 1]);
            }
            if st.returned.len() as u64 >= st.total {
                return None;
            }
            let next = self.advance(g, k, side, u);
            self.vertices.get_mut(&(u, side)).expect("ensured").returned.push(next);
        }
    }

    /// Produces the next element of `u`'s stream in rank order.
    fn advance<G: ListModel>(&mut self, g: &G, k: u64, side: Side, u: Vertex) -> Entry {
        let (unrealized, cursor) = {
            let st = &self.vertices[&(u, side)];
            (st.total - st.realized, st.cursor)
        };
        let mut t = cursor;
        loop {
            let pending_min = self.vertices[&(u, side)].pending.peek().map(|r| r.0);
            // A proposal of u64::MAX stands for "no unrealized element left".
            let proposal = if unrealized == 0 { u64::MAX } else { self.draw_min(t, unrealized) };
            if let Some(p) = pending_min {
                if p.rank.value <= proposal {
                    let st = self.vertices.get_mut(&(u, side)).expect("ensured");
                    st.pending.pop();
                    st.cursor = p.rank.value;
                    return Entry { rank: p.rank, neighbor: p.element.other(u), element: p.element };
                }
            }
            debug_assert!(unrealized > 0, "stream exhausted but advance was called");
            let element = self.pick_unrealized(g, k, side, u);
            let v = element.other(u);
            let floor = cursor.max(self.cursor(v, side));
            if proposal > floor {
                let rank = Rank::new(proposal, &element);
                self.register(g, k, element, rank);
                // Our own copy is returned directly rather than through pending.
                let st = self.vertices.get_mut(&(u, side)).expect("ensured");
                let own = st.pending.pop().expect("just pushed").0;
                debug_assert_eq!(own.element, element);
                st.cursor = proposal;
                return Entry { rank, neighbor: v, element };
            }
            t = proposal;
        }
    }

    /// Minimum of `count` independent uniform values on `(t, u64::MAX]`.
    fn draw_min(&mut self, t: u64, count: u64) -> u64 {
        let span = u64::MAX - t;
        if span <= 1 {
            return u64::MAX;
        }
        let u: f64 = self.rng.gen_range(f64::MIN_POSITIVE..1.0);
        let frac = -(u.ln() / count as f64).exp_m1();
        let step = ((span as f64) * frac) as u64;
        t + step.clamp(1, span)
    }

    fn resolve<G: ListModel>(&mut self, g: &G, u: Vertex, side: Side, index: usize) -> Vertex {
        let st = self.vertices.get_mut(&(u, side)).expect("ensured");
        *st.neighbors
            .entry(index)
            .or_insert_with(|| g.neighbor(u, index).expect("index within degree"))
    }

    fn element_at<G: ListModel>(&mut self, g: &G, k: u64, side: Side, u: Vertex, j: u64) -> ElementRef {
        match side {
            Side::Start => {
                let v = self.resolve(g, u, side, (j / k) as usize + 1);
                ElementRef::start(u, v, (j % k) as u32)
            }
            Side::Extend => {
                let v = self.resolve(g, u, side, j as usize + 1);
                ElementRef::extend(u, v)
            }
        }
    }

    /// A uniformly random element of `u`'s stream whose rank is still free.
    fn pick_unrealized<G: ListModel>(&mut self, g: &G, k: u64, side: Side, u: Vertex) -> ElementRef {
        let st = &self.vertices[&(u, side)];
        let total = st.total;
        if st.free.is_none() {
            for _ in 0..REJECTION_TRIES {
                let j = self.rng.gen_range(0..total);
                let element = self.element_at(g, k, side, u, j);
                if !self.registry.contains_key(&element) {
                    return element;
                }
            }
            // Most of the stream is realized; list what is left once.
            let mut free = Vec::new();
            for j in 0..total {
                let element = self.element_at(g, k, side, u, j);
                if !self.registry.contains_key(&element) {
                    free.push(j);
                }
            }
            self.vertices.get_mut(&(u, side)).expect("ensured").free = Some(free);
        }
        let mut free = self.vertices.get_mut(&(u, side)).expect("ensured").free.take().expect("built above");
        let element = loop {
            assert!(!free.is_empty(), "no unrealized element left at vertex {u}");
            let idx = self.rng.gen_range(0..free.len());
            let element = self.element_at(g, k, side, u, free[idx]);
            if self.registry.contains_key(&element) {
                free.swap_remove(idx);
            } else {
                break element;
            }
        };
        self.vertices.get_mut(&(u, side)).expect("ensured").free = Some(free);
        element
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn star(leaves: usize) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
        Graph::from_edges(leaves + 1, &edges).unwrap()
    }

    fn stream(model: &mut RankModel, g: &Graph, side: Side, u: Vertex) -> Vec<Entry> {
        (1..).map_while(|i| model.lowest(g, side, u, i)).collect()
    }

    #[test]
    fn streams_are_sorted_and_complete() {
        let g = Graph::from_edges(5, &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4)]).unwrap();
        for backend in [Backend::Eager, Backend::Lazy] {
            let mut m = RankModel::new(Seed(9), backend, 3);
            for u in 0..5 {
                let s = stream(&mut m, &g, Side::Start, u);
                assert_eq!(s.len(), 3 * g.degree(u));
                assert!(s.windows(2).all(|w| w[0].rank < w[1].rank));
                let e = stream(&mut m, &g, Side::Extend, u);
                assert_eq!(e.len(), g.degree(u));
                for entry in &s {
                    assert_eq!(m.rank_of(&g, &entry.element).unwrap(), entry.rank);
                }
            }
        }
    }

    #[test]
    fn lazy_ranks_agree_across_endpoints() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)]).unwrap();
        let mut m = RankModel::new(Seed(4), Backend::Lazy, 5);
        let mut seen = HashMap::default();
        for u in [2, 0, 3, 1] {
            for side in [Side::Start, Side::Extend] {
                for e in stream(&mut m, &g, side, u) {
                    if let Some(prev) = seen.insert(e.element, e.rank) {
                        assert_eq!(prev, e.rank);
                    }
                }
            }
        }
        assert_eq!(seen.len(), 5 * 5 + 5);
    }

    #[test]
    fn copy_index_checked() {
        let g = star(2);
        let mut m = RankModel::new(Seed(1), Backend::Eager, 2);
        assert!(m.rank_of(&g, &ElementRef::start(0, 1, 1)).is_ok());
        assert_eq!(
            m.rank_of(&g, &ElementRef::start(0, 1, 2)).unwrap_err(),
            RankError::CopyOutOfRange { copy: 2, k: 2 }
        );
    }

    #[test]
    fn lazy_lowest_touches_few_elements() {
        let g = star(50);
        let mut m = RankModel::new(Seed(2), Backend::Lazy, 10_000);
        let first = m.lowest(&g, Side::Start, 0, 1).unwrap();
        assert!(first.rank.fraction() < 1e-3);
        assert!(m.realized() <= 2);
    }

    #[test]
    fn lazy_minimum_is_uniform_over_neighbors() {
        // The lowest START element of the center of a star is equally likely
        // to sit on any edge.
        let g = star(4);
        let mut counts = [0usize; 4];
        for s in 0..4000u64 {
            let mut m = RankModel::new(Seed::from_u64(s), Backend::Lazy, 3);
            // Touch a leaf first so the center sees a mixed pending state.
            m.lowest(&g, Side::Start, 1, 1);
            let first = m.lowest(&g, Side::Start, 0, 1).unwrap();
            counts[first.neighbor - 1] += 1;
        }
        assert!(counts.iter().all(|&c| (850..=1150).contains(&c)), "{counts:?}");
    }

    #[test]
    fn freeze_coin_rate() {
        let frozen = (0..20_000)
            .filter(|&i| freeze_coin(Seed(5), &ElementRef::start(i, i + 1, 0), 0.007))
            .count();
        let rate = 1.0 - frozen as f64 / 20_000.0;
        assert!((rate - 0.007).abs() < 0.003, "{rate}");
    }
}
