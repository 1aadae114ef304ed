//! Checks the local oracles against a global run, plus the structural
//! invariants of the run itself.

use serde::{Deserialize, Serialize};

use crate::graph::{Graph, Vertex};
use crate::oracle::{Fault, OracleSession};
use crate::rank::{Backend, ParamSet, RankModel, Seed};
use crate::reference::{
    claim31_holds, count_length3_aug, is_maximal, mate_array, max_matching, run_algorithm_one, RunTranscript,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    OracleMismatch {
        vertex: Vertex,
        oracle: (Option<Vertex>, Option<Vertex>),
        global: (Option<Vertex>, Option<Vertex>),
    },
    NotMaximal,
    SNotMatching,
    AuditFailed { edge: usize },
    PartitionMismatch { edge: usize, recorded: usize, expected: usize },
    BelowHalf { m: usize, mu: usize },
    Claim31 { m: usize, m_star: usize, count: usize },
    RecursionOrder { count: u64 },
    FreshCopies { max: u32 },
}

impl Violation {
    pub fn vertex(&self) -> Option<Vertex> {
        match self {
            Violation::OracleMismatch { vertex, .. } => Some(*vertex),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub n: usize,
    pub m: usize,
    pub m_size: usize,
    pub s_size: usize,
    pub mu: usize,
    pub violations: Vec<Violation>,
}

/// Interval index of a value fraction in `(0, 1]`, computed from the alphas
/// in floating point. Independent of the integer thresholds in [`ParamSet`].
fn interval_of_fraction(params: &ParamSet, q: f64) -> usize {
    (1..=params.levels).find(|&i| params.alpha(i + 1) < q && q <= params.alpha(i)).unwrap_or(params.levels)
}

/// Structural checks on a finished run.
pub fn check_transcript(graph: &Graph, params: &ParamSet, t: &RunTranscript, mu: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    if !is_maximal(graph, &t.m_mate) {
        out.push(Violation::NotMaximal);
    }
    if mate_array(graph.n(), &t.s_pairs(graph), "S").is_err() {
        out.push(Violation::SNotMatching);
    }
    for s in &t.s_edges {
        if !s.audit.passes() {
            out.push(Violation::AuditFailed { edge: s.edge });
        }
    }
    for e in &t.m_edges {
        let expected = interval_of_fraction(params, e.rank.fraction());
        // Floating point can only disagree at an exact threshold.
        let on_boundary = (1..=params.levels + 1).any(|i| (e.rank.fraction() - params.alpha(i)).abs() < 1e-15);
        if e.partition != expected && !on_boundary {
            out.push(Violation::PartitionMismatch { edge: e.edge, recorded: e.partition, expected });
        }
    }
    if 2 * t.m_size() < mu {
        out.push(Violation::BelowHalf { m: t.m_size(), mu });
    }
    out
}

/// Oracle statuses of every vertex against the global run.
pub fn check_oracles(graph: &Graph, params: &ParamSet, seed: Seed, t: &RunTranscript, fault: Option<Fault>) -> Vec<Violation> {
    let mut session = OracleSession::new(graph, params.clone(), seed, Backend::Eager);
    if let Some(f) = fault {
        session.inject_fault(f);
    }
    let mut out = Vec::new();
    for v in 0..graph.n() {
        let s = session.vertex_oracle(v);
        let oracle = (s.st_partner.map(|p| p.vertex), s.ex_partner.map(|p| p.vertex));
        let global = (t.m_mate[v], t.s_mate[v]);
        if oracle != global || s.st != global.0.is_some() || s.ex != global.1.is_some() {
            out.push(Violation::OracleMismatch { vertex: v, oracle, global });
        }
    }
    let stats = session.query_stats();
    if stats.order_violations > 0 {
        out.push(Violation::RecursionOrder { count: stats.order_violations });
    }
    if stats.max_fresh_copies > 1 {
        out.push(Violation::FreshCopies { max: stats.max_fresh_copies });
    }
    out
}

/// Full check of one `(graph, seed)` instance.
pub fn verify_instance(graph: &Graph, params: &ParamSet, seed: Seed, fault: Option<Fault>) -> InstanceReport {
    let model = RankModel::new(seed, Backend::Eager, params.k);
    let t = run_algorithm_one(graph, params, &model).expect("eager model");
    let (mu, m_star) = max_matching(graph);
    let mut violations = check_transcript(graph, params, &t, mu);
    let count = count_length3_aug(graph.n(), &t.m_pairs(graph), &m_star).expect("both are matchings");
    if !claim31_holds(t.m_size(), mu, count) {
        violations.push(Violation::Claim31 { m: t.m_size(), m_star: mu, count });
    }
    violations.extend(check_oracles(graph, params, seed, &t, fault));
    InstanceReport { n: graph.n(), m: graph.m(), m_size: t.m_size(), s_size: t.s_size(), mu, violations }
}

/// A failing instance reduced by greedy edge removal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub n: usize,
    pub edges: Vec<(Vertex, Vertex)>,
    pub seed: Seed,
    pub vertex: Option<Vertex>,
    pub violation: Violation,
}

/// Removes edges one at a time while the instance keeps failing.
/// `make_params` rebuilds parameters for a modified graph.
pub fn minimize<P>(graph: &Graph, seed: Seed, fault: Option<Fault>, make_params: P) -> Option<Counterexample>
where
    P: Fn(&Graph) -> Option<ParamSet>,
{
    let fails = |g: &Graph| -> Option<Violation> {
        let params = make_params(g)?;
        verify_instance(g, &params, seed, fault).violations.into_iter().next()
    };
    let mut violation = fails(graph)?;
    let mut edges = graph.edges().to_vec();
    let mut i = 0;
    while i < edges.len() {
        let mut trial = edges.clone();
        trial.remove(i);
        let g = Graph::from_edges(graph.n(), &trial).expect("subgraph");
        match fails(&g) {
            Some(v) => {
                edges = trial;
                violation = v;
            }
            None => i += 1,
        }
    }
    Some(Counterexample { n: graph.n(), edges, seed, vertex: violation.vertex(), violation })
}
