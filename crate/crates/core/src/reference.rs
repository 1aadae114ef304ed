//! Ground truth: the global augmentation process, greedy and exact matching,
//! and length-3 augmentation utilities. None of this is sublinear.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, Vertex};
use crate::rank::{color, eager_rank, frozen, Backend, ElementRef, Kind, ParamSet, Rank, RankModel, Seed};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReferenceError {
    #[error("the global run needs the eager rank backend")]
    NotEager,
    #[error("{which} is not a matching: vertex {vertex} is covered twice")]
    NotAMatching { which: &'static str, vertex: Vertex },
    #[error("edge ({0}, {1}) is out of range or a self-loop")]
    BadEdge(Vertex, Vertex),
    #[error("transcript line {line}: {message}")]
    Transcript { line: usize, message: String },
}

const NIL: usize = usize::MAX;

/// Greedy maximal matching over the given edge order. Returns edge ids.
pub fn greedy_mm(graph: &Graph, order: &[usize]) -> Vec<usize> {
    debug_assert_eq!(order.len(), graph.m());
    let mut matched = vec![false; graph.n()];
    let mut out = Vec::new();
    for &e in order {
        let (u, v) = graph.edge(e);
        if !matched[u] && !matched[v] {
            matched[u] = true;
            matched[v] = true;
            out.push(e);
        }
    }
    out
}

/// Exact maximum matching (Edmonds' blossom algorithm). Returns the size and
/// the matched pairs with `u < v`, sorted.
pub fn max_matching(graph: &Graph) -> (usize, Vec<(Vertex, Vertex)>) {
    let mut b = Blossom::new(graph);
    for e in 0..graph.m() {
        let (u, v) = graph.edge(e);
        if b.mate[u] == NIL && b.mate[v] == NIL {
            b.mate[u] = v;
            b.mate[v] = u;
        }
    }
    for root in 0..graph.n() {
        if b.mate[root] == NIL && graph.degree(root) > 0 {
            if let Some(end) = b.find_path(root) {
                b.augment(end);
            }
        }
    }
    let pairs: Vec<_> = (0..graph.n()).filter(|&u| b.mate[u] != NIL && u < b.mate[u]).map(|u| (u, b.mate[u])).collect();
    (pairs.len(), pairs)
}

struct Blossom<'g> {
    g: &'g Graph,
    mate: Vec<usize>,
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    in_blossom: Vec<bool>,
    stamp: Vec<u32>,
    epoch: u32,
    queue: VecDeque<usize>,
}

impl<'g> Blossom<'g> {
    fn new(g: &'g Graph) -> Self {
        let n = g.n();
        Self {
            g,
            mate: vec![NIL; n],
            parent: vec![NIL; n],
            base: (0..n).collect(),
            used: vec![false; n],
            in_blossom: vec![false; n],
            stamp: vec![0; n],
            epoch: 0,
            queue: VecDeque::new(),
        }
    }

    fn lca(&mut self, mut a: usize, mut b: usize) -> usize {
        self.epoch += 1;
        loop {
            a = self.base[a];
            self.stamp[a] = self.epoch;
            if self.mate[a] == NIL {
                break;
            }
            a = self.parent[self.mate[a]];
        }
        loop {
            b = self.base[b];
            if self.stamp[b] == self.epoch {
                return b;
            }
            b = self.parent[self.mate[b]];
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[self.mate[v]]] = true;
            self.parent[v] = child;
            child = self.mate[v];
            v = self.parent[self.mate[v]];
        }
    }

    fn find_path(&mut self, root: usize) -> Option<usize> {
        let n = self.g.n();
        self.used.fill(false);
        self.parent.fill(NIL);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.used[root] = true;
        self.queue.clear();
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for &to in self.g.neighbors(v) {
                if self.base[v] == self.base[to] || self.mate[v] == to {
                    continue;
                }
                if to == root || (self.mate[to] != NIL && self.parent[self.mate[to]] != NIL) {
                    let cur = self.lca(v, to);
                    self.in_blossom.fill(false);
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NIL {
                    self.parent[to] = v;
                    if self.mate[to] == NIL {
                        return Some(to);
                    }
                    let next = self.mate[to];
                    self.used[next] = true;
                    self.queue.push_back(next);
                }
            }
        }
        None
    }

    fn augment(&mut self, mut v: usize) {
        while v != NIL {
            let pv = self.parent[v];
            let ppv = self.mate[pv];
            self.mate[v] = pv;
            self.mate[pv] = v;
            v = ppv;
        }
    }
}

/// Mate array of a set of pairs, or the first doubly covered vertex.
pub fn mate_array(n: usize, pairs: &[(Vertex, Vertex)], which: &'static str) -> Result<Vec<Option<Vertex>>, ReferenceError> {
    let mut mate = vec![None; n];
    for &(u, v) in pairs {
        if u >= n || v >= n || u == v {
            return Err(ReferenceError::BadEdge(u, v));
        }
        for w in [u, v] {
            if mate[w].is_some() {
                return Err(ReferenceError::NotAMatching { which, vertex: w });
            }
        }
        mate[u] = Some(v);
        mate[v] = Some(u);
    }
    Ok(mate)
}

/// Whether no edge of `graph` has both endpoints unmatched.
pub fn is_maximal(graph: &Graph, mate: &[Option<Vertex>]) -> bool {
    graph.edges().iter().all(|&(u, v)| mate[u].is_some() || mate[v].is_some())
}

/// Values of the EXTEND insertion conditions at insertion time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsertionAudit {
    pub s_degree_u: usize,
    pub s_degree_v: usize,
    pub m_degree_sum: usize,
    pub colors_differ: bool,
    pub u_frozen: bool,
    pub v_frozen: bool,
}

impl InsertionAudit {
    pub fn passes(&self) -> bool {
        self.s_degree_u == 0
            && self.s_degree_v == 0
            && self.m_degree_sum <= 1
            && self.colors_differ
            && !self.u_frozen
            && !self.v_frozen
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MEdge {
    pub edge: usize,
    pub element: ElementRef,
    pub rank: Rank,
    pub partition: usize,
    pub frozen: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SEdge {
    pub edge: usize,
    pub rank: Rank,
    pub audit: InsertionAudit,
}

/// What a processed element changed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Matched { partition: usize, frozen: bool },
    Extended,
}

/// One state-changing step of the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptLine {
    pub edge: usize,
    pub kind: Kind,
    pub rank_value: u64,
    pub decision: Decision,
}

impl TranscriptLine {
    /// `<edge_id> <S<copy>|E> <rank_hex> <M<i>F|M<i>U|S>`
    pub fn render(&self) -> String {
        let kind = match self.kind {
            Kind::Start(c) => format!("S{c}"),
            Kind::Extend => "E".to_string(),
        };
        let decision = match self.decision {
            Decision::Matched { partition, frozen } => format!("M{partition}{}", if frozen { 'F' } else { 'U' }),
            Decision::Extended => "S".to_string(),
        };
        format!("{} {kind} {:016x} {decision}", self.edge, self.rank_value)
    }
}

/// Everything a global run decided.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTranscript {
    pub n: usize,
    pub j_star: usize,
    pub m_edges: Vec<MEdge>,
    pub s_edges: Vec<SEdge>,
    pub m_mate: Vec<Option<Vertex>>,
    pub s_mate: Vec<Option<Vertex>>,
    pub frozen_vertex: Vec<bool>,
    pub lines: Vec<TranscriptLine>,
}

impl RunTranscript {
    pub fn m_size(&self) -> usize {
        self.m_edges.len()
    }

    pub fn s_size(&self) -> usize {
        self.s_edges.len()
    }

    pub fn m_pairs(&self, graph: &Graph) -> Vec<(Vertex, Vertex)> {
        self.m_edges.iter().map(|e| graph.edge(e.edge)).collect()
    }

    pub fn s_pairs(&self, graph: &Graph) -> Vec<(Vertex, Vertex)> {
        self.s_edges.iter().map(|e| graph.edge(e.edge)).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            let _ = writeln!(out, "{}", line.render());
        }
        out
    }

    /// Exact `mu(M ∪ S)`, for comparison with the length-3 estimate.
    pub fn union_matching_size(&self, graph: &Graph) -> usize {
        let mut pairs = self.m_pairs(graph);
        pairs.extend(self.s_pairs(graph));
        pairs.sort_unstable();
        pairs.dedup();
        let union = Graph::from_edges(self.n, &pairs).expect("subgraph of a simple graph");
        max_matching(&union).0
    }
}

/// Parses the text form written by [`RunTranscript::to_text`].
pub fn parse_transcript(text: &str) -> Result<Vec<TranscriptLine>, ReferenceError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: &str| ReferenceError::Transcript { line, message: message.to_string() };
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err("expected 4 fields"));
        }
        let edge = fields[0].parse().map_err(|_| err("bad edge id"))?;
        let kind = match fields[1] {
            "E" => Kind::Extend,
            s if s.starts_with('S') => Kind::Start(s[1..].parse().map_err(|_| err("bad copy index"))?),
            _ => return Err(err("bad element kind")),
        };
        let rank_value = u64::from_str_radix(fields[2], 16).map_err(|_| err("bad rank"))?;
        let decision = match fields[3] {
            "S" => Decision::Extended,
            d if d.starts_with('M') && d.len() >= 3 => {
                let frozen = match d.as_bytes()[d.len() - 1] {
                    b'F' => true,
                    b'U' => false,
                    _ => return Err(err("bad freeze flag")),
                };
                let partition = d[1..d.len() - 1].parse().map_err(|_| err("bad partition"))?;
                Decision::Matched { partition, frozen }
            }
            _ => return Err(err("bad decision")),
        };
        out.push(TranscriptLine { edge, kind, rank_value, decision });
    }
    Ok(out)
}

#[derive(Clone, Copy)]
struct Step {
    rank: Rank,
    edge: usize,
    element: ElementRef,
}

/// Runs the augmentation process over the whole graph.
///
/// Only the lowest START copy of each edge can change state (after it is
/// processed one endpoint stays matched), so the sweep visits that copy and
/// the EXTEND element of every edge: `O(m K)` hashing, `O(m log m)` sorting.
pub fn run_algorithm_one(graph: &Graph, params: &ParamSet, model: &RankModel) -> Result<RunTranscript, ReferenceError> {
    if model.backend() != Backend::Eager {
        return Err(ReferenceError::NotEager);
    }
    let seed = model.seed();
    let mut steps = Vec::with_capacity(2 * graph.m());
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        let best = (0..params.k as u32)
            .map(|c| {
                let element = ElementRef::start(u, v, c);
                (eager_rank(seed, &element), element)
            })
            .min_by_key(|(r, _)| *r)
            .expect("K >= 1");
        steps.push(Step { rank: best.0, edge: e, element: best.1 });
        let ext = ElementRef::extend(u, v);
        steps.push(Step { rank: eager_rank(seed, &ext), edge: e, element: ext });
    }
    steps.sort_unstable_by_key(|s| s.rank);
    Ok(sweep(graph, params, seed, steps))
}

/// Same as [`run_algorithm_one`] but visits every one of the `m (K + 1)`
/// elements. Used to check the compressed sweep.
pub fn run_algorithm_one_full(graph: &Graph, params: &ParamSet, model: &RankModel) -> Result<RunTranscript, ReferenceError> {
    if model.backend() != Backend::Eager {
        return Err(ReferenceError::NotEager);
    }
    let seed = model.seed();
    let mut steps = Vec::new();
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        for c in 0..params.k as u32 {
            let element = ElementRef::start(u, v, c);
            steps.push(Step { rank: eager_rank(seed, &element), edge: e, element });
        }
        let ext = ElementRef::extend(u, v);
        steps.push(Step { rank: eager_rank(seed, &ext), edge: e, element: ext });
    }
    steps.sort_unstable_by_key(|s| s.rank);
    Ok(sweep(graph, params, seed, steps))
}

fn sweep(graph: &Graph, params: &ParamSet, seed: Seed, steps: Vec<Step>) -> RunTranscript {
    let n = graph.n();
    let mut t = RunTranscript {
        n,
        j_star: params.j_star,
        m_edges: Vec::new(),
        s_edges: Vec::new(),
        m_mate: vec![None; n],
        s_mate: vec![None; n],
        frozen_vertex: vec![false; n],
        lines: Vec::new(),
    };
    for step in steps {
        let (u, v) = (step.element.lo, step.element.hi);
        match step.element.kind {
            Kind::Start(_) => {
                if t.m_mate[u].is_some() || t.m_mate[v].is_some() {
                    continue;
                }
                t.m_mate[u] = Some(v);
                t.m_mate[v] = Some(u);
                let partition = params.partition_of_rank(&step.rank);
                let is_frozen = frozen(seed, params, &step.element, &step.rank).expect("START element");
                if is_frozen {
                    t.frozen_vertex[u] = true;
                    t.frozen_vertex[v] = true;
                }
                t.m_edges.push(MEdge { edge: step.edge, element: step.element, rank: step.rank, partition, frozen: is_frozen });
                t.lines.push(TranscriptLine {
                    edge: step.edge,
                    kind: step.element.kind,
                    rank_value: step.rank.value,
                    decision: Decision::Matched { partition, frozen: is_frozen },
                });
            }
            Kind::Extend => {
                let audit = InsertionAudit {
                    s_degree_u: t.s_mate[u].is_some() as usize,
                    s_degree_v: t.s_mate[v].is_some() as usize,
                    m_degree_sum: t.m_mate[u].is_some() as usize + t.m_mate[v].is_some() as usize,
                    colors_differ: color(seed, u) != color(seed, v),
                    u_frozen: t.frozen_vertex[u],
                    v_frozen: t.frozen_vertex[v],
                };
                if !audit.passes() {
                    continue;
                }
                t.s_mate[u] = Some(v);
                t.s_mate[v] = Some(u);
                t.s_edges.push(SEdge { edge: step.edge, rank: step.rank, audit });
                t.lines.push(TranscriptLine {
                    edge: step.edge,
                    kind: Kind::Extend,
                    rank_value: step.rank.value,
                    decision: Decision::Extended,
                });
            }
        }
    }
    t
}

/// `M` plus vertex-disjoint length-3 augmenting paths `(a, u, v, b)` with
/// `(a, u), (v, b)` in `S`, `(u, v)` in `M`, and `a`, `b` unmatched in `M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentedMatching {
    pub base: usize,
    pub paths: Vec<[Vertex; 4]>,
    pub size: usize,
}

impl AugmentedMatching {
    /// Whether `v` is matched in the augmented matching.
    pub fn covers(&self, t: &RunTranscript, v: Vertex) -> bool {
        t.m_mate[v].is_some() || self.paths.iter().any(|p| p[0] == v || p[3] == v)
    }
}

/// Applies length-3 augmentations, first-come by `M`-edge id.
pub fn augment_length3(graph: &Graph, t: &RunTranscript) -> AugmentedMatching {
    let mut used = vec![false; t.n];
    let mut order: Vec<usize> = t.m_edges.iter().map(|e| e.edge).collect();
    order.sort_unstable();
    let mut paths = Vec::new();
    for e in order {
        let (x, y) = graph.edge(e);
        for (u, v) in [(x, y), (y, x)] {
            let (Some(a), Some(b)) = (t.s_mate[u], t.s_mate[v]) else { continue };
            if t.m_mate[a].is_some() || t.m_mate[b].is_some() || a == b {
                continue;
            }
            let path = [a, u, v, b];
            if path.iter().any(|&w| used[w]) {
                continue;
            }
            for w in path {
                used[w] = true;
            }
            paths.push(path);
            break;
        }
    }
    AugmentedMatching { base: t.m_size(), size: t.m_size() + paths.len(), paths }
}

/// Number of length-3 augmenting paths for `m` among the components of
/// `m ⊕ m_star`.
pub fn count_length3_aug(n: usize, m: &[(Vertex, Vertex)], m_star: &[(Vertex, Vertex)]) -> Result<usize, ReferenceError> {
    let mate = mate_array(n, m, "M")?;
    let mate_star = mate_array(n, m_star, "M*")?;
    // Symmetric difference: at most one edge of each kind per vertex.
    let diff_m = |v: Vertex| mate[v].filter(|&w| mate_star[v] != Some(w));
    let diff_s = |v: Vertex| mate_star[v].filter(|&w| mate[v] != Some(w));
    let mut count = 0;
    for a in 0..n {
        // Start from the lower endpoint of each candidate path.
        if diff_m(a).is_some() {
            continue;
        }
        let Some(u) = diff_s(a) else { continue };
        let Some(v) = diff_m(u) else { continue };
        let Some(b) = diff_s(v) else { continue };
        if diff_m(b).is_none() && a < b {
            count += 1;
        }
    }
    Ok(count)
}

/// The inequality `count >= |M| - 4 delta' |M*|`, vacuous when `delta' < 0`.
pub fn claim31_holds(m_size: usize, m_star_size: usize, count: usize) -> bool {
    if m_star_size == 0 {
        return true;
    }
    let delta = m_size as f64 / m_star_size as f64 - 0.5;
    if delta < 0.0 {
        return true;
    }
    count as f64 + 1e-9 >= m_size as f64 - 4.0 * delta * m_star_size as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank::{GraphShape, ParamSet, Seed};

    fn p4() -> Graph {
        Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap()
    }

    fn brute_force_mu(g: &Graph) -> usize {
        fn go(g: &Graph, e: usize, used: &mut Vec<bool>) -> usize {
            if e == g.m() {
                return 0;
            }
            let skip = go(g, e + 1, used);
            let (u, v) = g.edge(e);
            if used[u] || used[v] {
                return skip;
            }
            used[u] = true;
            used[v] = true;
            let take = 1 + go(g, e + 1, used);
            used[u] = false;
            used[v] = false;
            skip.max(take)
        }
        go(g, 0, &mut vec![false; g.n()])
    }

    #[test]
    fn greedy_examples() {
        let g = p4();
        assert_eq!(greedy_mm(&g, &[1, 0, 2]), vec![1]);
        assert_eq!(greedy_mm(&g, &[0, 2, 1]), vec![0, 2]);
        let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        for order in [[0, 1, 2], [2, 1, 0], [1, 2, 0]] {
            assert_eq!(greedy_mm(&tri, &order).len(), 1);
        }
    }

    #[test]
    fn max_matching_examples() {
        let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(max_matching(&tri).0, 1);
        let c5 = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        assert_eq!(max_matching(&c5).0, 2);
        assert_eq!(max_matching(&Graph::empty(4)).0, 0);
    }

    #[test]
    fn petersen_has_perfect_matching() {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
        }
        let g = Graph::from_edges(10, &edges).unwrap();
        assert_eq!(brute_force_mu(&g), 5);
        let (size, pairs) = max_matching(&g);
        assert_eq!(size, 5);
        assert!(mate_array(10, &pairs, "mu").is_ok());
        assert!(pairs.iter().all(|&(u, v)| g.has_edge(u, v)));
    }

    #[test]
    fn count_length3_examples() {
        assert_eq!(count_length3_aug(4, &[(1, 2)], &[(0, 1), (2, 3)]).unwrap(), 1);
        assert_eq!(count_length3_aug(4, &[(0, 1), (2, 3)], &[(0, 1), (2, 3)]).unwrap(), 0);
        assert_eq!(
            count_length3_aug(3, &[(0, 1), (1, 2)], &[]).unwrap_err(),
            ReferenceError::NotAMatching { which: "M", vertex: 1 }
        );
    }

    #[test]
    fn transcript_text_round_trip() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]).unwrap();
        let params = ParamSet::derive(GraphShape::of(&g), 0.25, 4.0, Seed(11)).unwrap().with_k(4).unwrap();
        let model = RankModel::new(Seed(11), Backend::Eager, params.k);
        let t = run_algorithm_one(&g, &params, &model).unwrap();
        assert_eq!(parse_transcript(&t.to_text()).unwrap(), t.lines);
        assert!(parse_transcript("1 X 00 S").is_err());
    }

    #[test]
    fn lazy_model_rejected() {
        let g = p4();
        let params = ParamSet::derive(GraphShape::of(&g), 0.25, 4.0, Seed(1)).unwrap();
        let model = RankModel::new(Seed(1), Backend::Lazy, params.k);
        assert_eq!(run_algorithm_one(&g, &params, &model).unwrap_err(), ReferenceError::NotEager);
    }

    #[test]
    fn claim31_guard() {
        assert!(claim31_holds(1, 3, 0));
        assert!(claim31_holds(2, 2, 0));
        assert!(claim31_holds(2, 3, 0));
        assert!(!claim31_holds(1, 2, 0));
        assert!(claim31_holds(1, 2, 1));
    }
}
