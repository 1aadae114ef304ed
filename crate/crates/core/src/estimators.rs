//! Sampling estimators of the maximum matching size.
//!
//! Each estimator samples `r` vertices with replacement, asks the local
//! oracles whether the vertex is covered by `M` or is the end of a length-3
//! augmenting path, and rescales the hit fraction. One oracle session (one
//! random order) serves all samples of a run.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::access::{DegreeProbe, ListAccess, ListModel};
use crate::graph::{Graph, Vertex};
use crate::oracle::{OracleSession, QueryStats};
use crate::rank::{theoretical_delta, Backend, GraphShape, ParamError, ParamSet, Seed, DEFAULT_C};
use crate::virtual_h::{h_shape, HGraph};

/// Stack size for estimator threads; oracle recursion can run deep.
pub const ORACLE_STACK_BYTES: usize = 512 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    ListMult,
    ListAdd,
    MatrixAdd,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::ListMult => "list-mult",
            Variant::ListAdd => "list-add",
            Variant::MatrixAdd => "matrix-add",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("sample count r = {r:.3e} exceeds the budget of {budget}; pass a larger delta or budget")]
    Budget { r: f64, budget: u64 },
    #[error("instance cancelled by a faster racer")]
    Cancelled,
    #[error("race count must be at least 1")]
    RaceCount,
    #[error("estimator thread panicked: {0}")]
    Panicked(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub epsilon: f64,
    pub c: f64,
    /// Practical `delta`; `None` means the theoretical `2^(-70/epsilon)`.
    pub delta: Option<f64>,
    pub k_override: Option<u64>,
    /// Largest admissible sample count.
    pub budget: u64,
    pub backend: Backend,
    pub degree_probe: DegreeProbe,
    /// Known maximum degree; skips the degree pass of the additive variant.
    pub max_degree_hint: Option<usize>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.2,
            c: DEFAULT_C,
            delta: None,
            k_override: None,
            budget: 10_000_000,
            backend: Backend::Lazy,
            degree_probe: DegreeProbe::Direct,
            max_degree_hint: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaceInfo {
    pub count: usize,
    pub winner: usize,
    /// Query work (edge-oracle calls plus probes) of the winning instance.
    pub work: u64,
}

/// Output of one estimator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub variant: Variant,
    pub n: usize,
    pub mu_tilde: f64,
    pub r: u64,
    pub x: u64,
    pub f: f64,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub k: u64,
    pub j_star: usize,
    pub stats: QueryStats,
    pub seed: Seed,
    /// Per-sample `(vertex, indicator)`.
    #[serde(skip)]
    pub samples: Vec<(Vertex, bool)>,
    pub race: Option<RaceInfo>,
}

impl Estimate {
    fn trivial(variant: Variant, n: usize, cfg: &EstimatorConfig, seed: Seed) -> Self {
        Self {
            variant,
            n,
            mu_tilde: 0.0,
            r: 0,
            x: 0,
            f: 0.0,
            epsilon: cfg.epsilon,
            delta: cfg.delta,
            k: 0,
            j_star: 0,
            stats: QueryStats::default(),
            seed,
            samples: Vec::new(),
            race: None,
        }
    }

    /// Query work used to order racing instances.
    pub fn work(&self) -> u64 {
        work_of(&self.stats)
    }
}

fn work_of(stats: &QueryStats) -> u64 {
    stats.f_calls + stats.list_probes + stats.matrix_probes
}

/// Shared state of a race: the least work among finished instances.
#[derive(Debug)]
pub struct RaceToken {
    best: AtomicU64,
}

impl Default for RaceToken {
    fn default() -> Self {
        Self { best: AtomicU64::new(u64::MAX) }
    }
}

impl RaceToken {
    /// An instance that has already spent more than a finished one can no
    /// longer win.
    pub fn should_stop(&self, work: u64) -> bool {
        work > self.best.load(Ordering::Acquire)
    }

    fn finish(&self, work: u64) {
        self.best.fetch_min(work, Ordering::AcqRel);
    }
}

/// Sample indicator: 1 if `u` is matched in `M`, or if `u` ends a length-3
/// augmenting path `u - w = x - y` with `(u, w), (x, y)` in `S`, `(w, x)` in
/// `M` and `y` unmatched in `M`. With `v1_bound = Some(n)` the `M` partner of
/// `u`, resp. `w`, must lie in `[0, n)`.
pub fn sample_indicator<G: ListModel>(session: &mut OracleSession<'_, G>, u: Vertex, v1_bound: Option<usize>) -> bool {
    let in_v1 = |v: Vertex| v1_bound.map_or(true, |n| v < n);
    let su = session.vertex_oracle(u);
    if su.st {
        return in_v1(su.st_partner.expect("st has partner").vertex);
    }
    let Some(w) = su.ex_partner.map(|p| p.vertex) else { return false };
    let sw = session.vertex_oracle(w);
    let Some(x) = sw.st_partner.map(|p| p.vertex) else { return false };
    let sx = session.vertex_oracle(x);
    let Some(y) = sx.ex_partner.map(|p| p.vertex) else { return false };
    let sy = session.vertex_oracle(y);
    !sy.st && in_v1(w)
}

fn run_samples<G: ListModel>(
    session: &mut OracleSession<'_, G>,
    universe: usize,
    r: u64,
    v1_bound: Option<usize>,
    seed: Seed,
    token: Option<&RaceToken>,
) -> Result<Vec<(Vertex, bool)>, EstimateError> {
    let mut rng = ChaCha8Rng::from_seed(seed.stream_key("samples"));
    let mut out = Vec::with_capacity(r as usize);
    for _ in 0..r {
        if let Some(t) = token {
            if t.should_stop(work_of(&session.query_stats())) {
                return Err(EstimateError::Cancelled);
            }
        }
        let u = rng.gen_range(0..universe);
        out.push((u, sample_indicator(session, u, v1_bound)));
    }
    Ok(out)
}

fn check_budget(r: f64, budget: u64) -> Result<u64, EstimateError> {
    if !r.is_finite() || r > budget as f64 {
        return Err(EstimateError::Budget { r, budget });
    }
    Ok(r as u64)
}

fn params_for(shape: GraphShape, cfg: &EstimatorConfig, seed: Seed) -> Result<ParamSet, EstimateError> {
    let mut p = ParamSet::derive(shape, cfg.epsilon, cfg.c, seed)?;
    if let Some(k) = cfg.k_override {
        p = p.with_k(k)?;
    }
    Ok(p)
}

/// `O(n)` degree pass: `(max degree, degree sum)`.
fn degree_pass(access: &ListAccess<'_>) -> (usize, usize) {
    (0..access.vertex_count()).map(|v| access.degree(v)).fold((0, 0), |(mx, s), d| (mx.max(d), s + d))
}

/// Multiplicative estimator for adjacency-list input.
pub fn estimate_list_mult(graph: &Graph, cfg: &EstimatorConfig, seed: Seed) -> Result<Estimate, EstimateError> {
    list_mult(graph, cfg, seed, None)
}

fn list_mult(graph: &Graph, cfg: &EstimatorConfig, seed: Seed, token: Option<&RaceToken>) -> Result<Estimate, EstimateError> {
    let n = graph.n();
    let access = ListAccess::with_policy(graph, cfg.degree_probe);
    let (max_degree, degree_sum) = degree_pass(&access);
    if degree_sum == 0 || n < 2 {
        return Ok(Estimate::trivial(Variant::ListMult, n, cfg, seed));
    }
    let delta = cfg.delta.unwrap_or_else(|| theoretical_delta(cfg.epsilon));
    let avg = degree_sum as f64 / n as f64;
    let log_n = (n as f64).log2();
    let r = check_budget((384.0 * max_degree as f64 * log_n / (delta * delta * avg)).ceil(), cfg.budget)?;
    let shape = GraphShape { n: n as u64, m: (degree_sum / 2) as u64, max_degree: max_degree as u64 };
    let params = params_for(shape, cfg, seed)?;
    let (k, j_star) = (params.k, params.j_star);
    let mut session = OracleSession::new(&access, params, seed, cfg.backend);
    let samples = run_samples(&mut session, n, r, None, seed, token)?;
    let x = samples.iter().filter(|s| s.1).count() as u64;
    let f = x as f64 / r as f64;
    let mu = ((1.0 - delta / 2.0) * f * n as f64 / 2.0).clamp(0.0, n as f64 / 2.0);
    Ok(Estimate {
        variant: Variant::ListMult,
        n,
        mu_tilde: mu,
        r,
        x,
        f,
        epsilon: cfg.epsilon,
        delta: Some(delta),
        k,
        j_star,
        stats: session.query_stats(),
        seed,
        samples,
        race: None,
    })
}

/// Multiplicative-additive estimator for adjacency-list input.
pub fn estimate_list_add(graph: &Graph, cfg: &EstimatorConfig, seed: Seed) -> Result<Estimate, EstimateError> {
    list_add(graph, cfg, seed, None)
}

fn list_add(graph: &Graph, cfg: &EstimatorConfig, seed: Seed, token: Option<&RaceToken>) -> Result<Estimate, EstimateError> {
    let n = graph.n();
    let access = ListAccess::with_policy(graph, cfg.degree_probe);
    let (max_degree, m) = match cfg.max_degree_hint {
        // m only enters |T|, which ranks never need; a hint avoids the pass.
        Some(d) => (d, graph.m()),
        None => {
            let (d, s) = degree_pass(&access);
            (d, s / 2)
        }
    };
    if max_degree == 0 || n < 2 {
        return Ok(Estimate::trivial(Variant::ListAdd, n, cfg, seed));
    }
    let log_n = (n as f64).log2();
    let r = check_budget((12.0 * log_n.powi(3)).ceil(), cfg.budget)?;
    let shape = GraphShape { n: n as u64, m: m as u64, max_degree: max_degree as u64 };
    let params = params_for(shape, cfg, seed)?;
    let (k, j_star) = (params.k, params.j_star);
    let mut session = OracleSession::new(&access, params, seed, cfg.backend);
    let samples = run_samples(&mut session, n, r, None, seed, token)?;
    let x = samples.iter().filter(|s| s.1).count() as u64;
    let f = x as f64 / r as f64;
    let mu = (f * n as f64 / 2.0 - n as f64 / (2.0 * log_n)).clamp(0.0, n as f64 / 2.0);
    Ok(Estimate {
        variant: Variant::ListAdd,
        n,
        mu_tilde: mu,
        r,
        x,
        f,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        k,
        j_star,
        stats: session.query_stats(),
        seed,
        samples,
        race: None,
    })
}

/// Multiplicative-additive estimator for adjacency-matrix input, run on the
/// implicit graph `H`.
pub fn estimate_matrix(graph: &Graph, cfg: &EstimatorConfig, seed: Seed) -> Result<Estimate, EstimateError> {
    matrix(graph, cfg, seed, None)
}

fn matrix(graph: &Graph, cfg: &EstimatorConfig, seed: Seed, token: Option<&RaceToken>) -> Result<Estimate, EstimateError> {
    let n = graph.n();
    if n < 2 {
        return Ok(Estimate::trivial(Variant::MatrixAdd, n, cfg, seed));
    }
    let h = HGraph::over(graph);
    let log_n = (n as f64).log2();
    let r = check_budget((48.0 * log_n.powi(3)).ceil(), cfg.budget)?;
    let params = params_for(h_shape(n), cfg, seed)?;
    let (k, j_star) = (params.k, params.j_star);
    let mut session = OracleSession::new(&h, params, seed, cfg.backend);
    let samples = run_samples(&mut session, n, r, Some(n), seed, token)?;
    let x = samples.iter().filter(|s| s.1).count() as u64;
    let f = x as f64 / r as f64;
    let mu = (f * n as f64 / 2.0 - n as f64 / (4.0 * log_n)).clamp(0.0, n as f64 / 2.0);
    Ok(Estimate {
        variant: Variant::MatrixAdd,
        n,
        mu_tilde: mu,
        r,
        x,
        f,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        k,
        j_star,
        stats: session.query_stats(),
        seed,
        samples,
        race: None,
    })
}

/// Runs one estimator instance, cancellable through `token`.
pub fn run_instance(variant: Variant, graph: &Graph, cfg: &EstimatorConfig, seed: Seed, token: Option<&RaceToken>) -> Result<Estimate, EstimateError> {
    match variant {
        Variant::ListMult => list_mult(graph, cfg, seed, token),
        Variant::ListAdd => list_add(graph, cfg, seed, token),
        Variant::MatrixAdd => matrix(graph, cfg, seed, token),
    }
}

/// Seed of race instance `i`; instance 0 uses the base seed.
pub fn instance_seed(seed: Seed, i: usize) -> Seed {
    if i == 0 {
        seed
    } else {
        seed.derive("race", i as u64)
    }
}

/// Runs `f` on a thread with a large stack.
pub fn with_oracle_stack<T: Send, F: FnOnce() -> T + Send>(f: F) -> Result<T, EstimateError> {
    thread::scope(|s| {
        thread::Builder::new()
            .stack_size(ORACLE_STACK_BYTES)
            .spawn_scoped(s, f)
            .expect("spawn estimator thread")
            .join()
            .map_err(|e| EstimateError::Panicked(panic_message(&e)))
    })
}

fn panic_message(e: &Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| e.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".to_string())
}

/// Races `count` independent instances of `task(instance_index, seed, token)`.
///
/// The winner is the instance that finishes with the least query work
/// (ties to the lower index). Every instance checks the token between
/// samples and stops once a finished instance used less work, so the outcome
/// depends only on the seeds, never on thread scheduling. With `count = 1`
/// the single instance runs unraced and its result is returned unchanged.
pub fn race_instances<F>(count: usize, seed: Seed, task: F) -> Result<Estimate, EstimateError>
where
    F: Fn(usize, Seed, &RaceToken) -> Result<Estimate, EstimateError> + Sync,
{
    if count == 0 {
        return Err(EstimateError::RaceCount);
    }
    let token = RaceToken::default();
    if count == 1 {
        return with_oracle_stack(|| task(0, seed, &token))?;
    }
    let (tx, rx) = mpsc::channel();
    thread::scope(|s| {
        for i in 0..count {
            let tx = tx.clone();
            let (task, token) = (&task, &token);
            thread::Builder::new()
                .stack_size(ORACLE_STACK_BYTES)
                .spawn_scoped(s, move || {
                    let res = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| task(i, instance_seed(seed, i), token)))
                        .unwrap_or_else(|e| Err(EstimateError::Panicked(panic_message(&e))));
                    if let Ok(est) = &res {
                        token.finish(est.work());
                    }
                    let _ = tx.send((i, res));
                })
                .expect("spawn race instance");
        }
    });
    drop(tx);
    let mut best: Option<(u64, usize, Estimate)> = None;
    let mut first_err = None;
    for (i, res) in rx {
        match res {
            Ok(est) => {
                let key = (est.work(), i);
                if best.as_ref().map_or(true, |(w, j, _)| key < (*w, *j)) {
                    best = Some((key.0, i, est));
                }
            }
            Err(EstimateError::Cancelled) => {}
            Err(e) => {
                if first_err.as_ref().map_or(true, |(j, _)| i < *j) {
                    first_err = Some((i, e));
                }
            }
        }
    }
    match best {
        Some((work, winner, mut est)) => {
            est.race = Some(RaceInfo { count, winner, work });
            Ok(est)
        }
        None => Err(first_err.map(|(_, e)| e).unwrap_or(EstimateError::Cancelled)),
    }
}

/// Races `count` instances of an estimator variant.
pub fn race_estimate(variant: Variant, graph: &Graph, cfg: &EstimatorConfig, seed: Seed, count: usize) -> Result<Estimate, EstimateError> {
    race_instances(count, seed, |_, s, token| run_instance(variant, graph, cfg, s, Some(token)))
}
