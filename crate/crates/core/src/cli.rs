//! The `mmest` command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 verification failure,
//! 3 sample budget refusal.
//!
//! JSON-lines records always carry `command`, `seed` and the fields below.
//! - estimate: `variant n m mu_tilde r x f epsilon delta k j_star stats race baselines`
//! - verify: `instances failures n m k epsilon counterexample`
//! - gen: `kind n m seed out`

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::access::{DegreeProbe, ListAccess};
use crate::estimators::{race_estimate, Estimate, EstimateError, EstimatorConfig, Variant};
use crate::generators::{gen_graph, GeneratorError, GeneratorSpec};
use crate::graph::{load_edge_list, Graph, GraphError};
use crate::oracle::{Fault, OracleSession};
use crate::rank::{theoretical_delta, Backend, GraphShape, ParamError, ParamSet, Seed, SeedParseError, DEFAULT_C};
use crate::reference::{greedy_mm, max_matching};
use crate::verify::{minimize, verify_instance, Counterexample};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Seed(#[from] SeedParseError),
    #[error("{0}")]
    Estimate(EstimateError),
    #[error("verification failed: {0} of {1} instances")]
    Verification(usize, usize),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(..) => 2,
            CliError::Estimate(EstimateError::Budget { .. }) => 3,
            _ => 1,
        }
    }
}

impl From<EstimateError> for CliError {
    fn from(e: EstimateError) -> Self {
        match e {
            EstimateError::Param(p) => CliError::Param(p),
            other => CliError::Estimate(other),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mmest", version, about = "Estimate maximum matching size beyond 1/2 with sublinear queries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the maximum matching size of a graph.
    Estimate(EstimateArgs),
    /// Check local oracles against a global run on many seeds.
    Verify(VerifyArgs),
    /// Measure edge-oracle calls per vertex query on random graphs (CSV).
    Bench(BenchArgs),
    /// Generate a graph in edge-list format.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    List,
    Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Mult,
    Add,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Jsonl,
    Csv,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Edge-list file (`n m` header, then `u v` lines).
    #[arg(long, conflicts_with = "gen")]
    pub input: Option<PathBuf>,
    /// Generator spec, e.g. "erdos_renyi 2000 0.004" or "planted_matching 1024 0".
    #[arg(long)]
    pub gen: Option<String>,
    /// Seed for --gen.
    #[arg(long, default_value_t = 0)]
    pub gen_seed: u64,
}

impl InputArgs {
    fn load(&self) -> Result<Graph, CliError> {
        match (&self.input, &self.gen) {
            (Some(path), None) => Ok(load_edge_list(fs::File::open(path)?)?),
            (None, Some(spec)) => Ok(gen_graph(spec.parse()?, self.gen_seed)?.graph),
            _ => Err(CliError::Usage("exactly one of --input or --gen is required".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = Model::List)]
    pub model: Model,
    #[arg(long, value_enum, default_value_t = VariantArg::Add)]
    pub variant: VariantArg,
    /// Must be 2/L for an integer L >= 8.
    #[arg(long, default_value_t = 0.2)]
    pub epsilon: f64,
    /// Practical delta for the multiplicative variant.
    #[arg(long, conflicts_with = "use_theoretical_delta")]
    pub delta: Option<f64>,
    /// Use delta = 2^(-70/epsilon). Almost always exceeds the budget.
    #[arg(long = "theoretical-delta")]
    pub use_theoretical_delta: bool,
    #[arg(long, default_value_t = DEFAULT_C)]
    pub c: f64,
    /// Hex seed.
    #[arg(long, default_value = "0")]
    pub seed: String,
    #[arg(long)]
    pub k_override: Option<u64>,
    /// Number of raced instances.
    #[arg(long, default_value_t = 1)]
    pub race: usize,
    /// Largest admissible sample count.
    #[arg(long, default_value_t = 10_000_000)]
    pub budget: u64,
    /// Also compute exact mu and a random-order greedy matching.
    #[arg(long)]
    pub with_baselines: bool,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    #[arg(long, value_enum, default_value_t = Backend::Lazy)]
    pub backend: Backend,
    /// Discover degrees by exponential search instead of direct queries.
    #[arg(long)]
    pub exponential_degree: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Number of seeds. With --gen, instance i also regenerates the graph
    /// with gen seed `gen_seed + i`.
    #[arg(long, default_value_t = 200)]
    pub seeds: u64,
    #[arg(long, default_value = "0")]
    pub seed: String,
    #[arg(long, default_value_t = 0.25)]
    pub epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_C)]
    pub c: f64,
    #[arg(long, default_value_t = 8)]
    pub k_override: u64,
    /// Largest graph accepted.
    #[arg(long, default_value_t = 300)]
    pub max_n: usize,
    /// Test hook: corrupt every N-th START memo write.
    #[arg(long)]
    pub inject_fault: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Vertex counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "10000")]
    pub n: Vec<usize>,
    /// Average degrees, comma separated. An empty list gives a header only.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
    pub avg_degree: Vec<String>,
    #[arg(long, default_value_t = 16)]
    pub k: u64,
    /// Sampled vertices per row.
    #[arg(long, default_value_t = 200)]
    pub vertices: usize,
    #[arg(long, default_value_t = 0.25)]
    pub epsilon: f64,
    #[arg(long, default_value = "0")]
    pub seed: String,
    #[arg(long, default_value_t = 0)]
    pub gen_seed: u64,
    #[arg(long, value_enum, default_value_t = Backend::Eager)]
    pub backend: Backend,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Generator name: erdos_renyi, random_bipartite, planted_matching, disjoint_paths.
    pub kind: String,
    /// Generator parameters.
    pub params: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; planted graphs also get `<out>.meta.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` and runs the command, returning the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate(a) => cmd_estimate(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Gen(a) => cmd_gen(&a),
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Baselines {
    pub mu: usize,
    pub greedy_m: usize,
    /// `mu_tilde / mu`.
    pub ratio: Option<f64>,
}

fn baselines(graph: &Graph, seed: Seed, mu_tilde: f64) -> Baselines {
    let mu = max_matching(graph).0;
    let mut order: Vec<usize> = (0..graph.m()).collect();
    order.shuffle(&mut ChaCha8Rng::from_seed(seed.stream_key("greedy-baseline")));
    let greedy_m = greedy_mm(graph, &order).len();
    Baselines { mu, greedy_m, ratio: (mu > 0).then(|| mu_tilde / mu as f64) }
}

fn estimator_config(a: &EstimateArgs) -> EstimatorConfig {
    EstimatorConfig {
        epsilon: a.epsilon,
        c: a.c,
        delta: if a.use_theoretical_delta { Some(theoretical_delta(a.epsilon)) } else { a.delta },
        k_override: a.k_override,
        budget: a.budget,
        backend: a.backend,
        degree_probe: if a.exponential_degree { DegreeProbe::ExponentialSearch } else { DegreeProbe::Direct },
        max_degree_hint: None,
    }
}

pub fn cmd_estimate(a: &EstimateArgs) -> Result<(), CliError> {
    let variant = match (a.model, a.variant) {
        (Model::List, VariantArg::Mult) => Variant::ListMult,
        (Model::List, VariantArg::Add) => Variant::ListAdd,
        (Model::Matrix, VariantArg::Add) => Variant::MatrixAdd,
        (Model::Matrix, VariantArg::Mult) => {
            return Err(CliError::Usage("the matrix model only has the additive variant".into()))
        }
    };
    if variant == Variant::ListMult && a.delta.is_none() && !a.use_theoretical_delta {
        return Err(CliError::Usage("--variant mult needs --delta (or --theoretical-delta)".into()));
    }
    crate::rank::ParamSet::derive(GraphShape { n: 2, m: 1, max_degree: 1 }, a.epsilon, a.c, Seed(0))?;
    let graph = a.input.load()?;
    let seed: Seed = a.seed.parse()?;
    let cfg = estimator_config(a);
    let est = race_estimate(variant, &graph, &cfg, seed, a.race)?;
    let base = a.with_baselines.then(|| baselines(&graph, seed, est.mu_tilde));
    let mut w = sink(&a.out)?;
    write_estimate(&mut w, a.format, &graph, &est, base.as_ref())?;
    w.flush()?;
    Ok(())
}

fn estimate_record(graph: &Graph, est: &Estimate, base: Option<&Baselines>) -> serde_json::Value {
    json!({
        "command": "estimate",
        "variant": est.variant,
        "n": est.n,
        "m": graph.m(),
        "mu_tilde": est.mu_tilde,
        "r": est.r,
        "x": est.x,
        "f": est.f,
        "epsilon": est.epsilon,
        "delta": est.delta,
        "k": est.k,
        "j_star": est.j_star,
        "seed": est.seed,
        "stats": est.stats,
        "race": est.race,
        "baselines": base,
    })
}

pub fn write_estimate(w: &mut dyn Write, format: Format, graph: &Graph, est: &Estimate, base: Option<&Baselines>) -> io::Result<()> {
    match format {
        Format::Jsonl => writeln!(w, "{}", estimate_record(graph, est, base)),
        Format::Csv => {
            writeln!(w, "variant,n,m,mu_tilde,r,x,f,k,j_star,f_calls,list_probes,matrix_probes,seed,winner,mu,greedy_m")?;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                est.variant,
                est.n,
                graph.m(),
                est.mu_tilde,
                est.r,
                est.x,
                est.f,
                est.k,
                est.j_star,
                est.stats.f_calls,
                est.stats.list_probes,
                est.stats.matrix_probes,
                est.seed,
                est.race.map(|r| r.winner.to_string()).unwrap_or_default(),
                base.map(|b| b.mu.to_string()).unwrap_or_default(),
                base.map(|b| b.greedy_m.to_string()).unwrap_or_default(),
            )
        }
        Format::Human => {
            writeln!(w, "estimator      {}", est.variant)?;
            writeln!(w, "graph          n = {}, m = {}", est.n, graph.m())?;
            writeln!(w, "estimate       mu~ = {:.3}", est.mu_tilde)?;
            writeln!(w, "samples        r = {}, hits = {}, f = {:.5}", est.r, est.x, est.f)?;
            writeln!(w, "parameters     epsilon = {}, K = {}, j* = {}", est.epsilon, est.k, est.j_star)?;
            writeln!(
                w,
                "queries        oracle calls = {}, list probes = {}, matrix probes = {}",
                est.stats.f_calls, est.stats.list_probes, est.stats.matrix_probes
            )?;
            if let Some(r) = est.race {
                writeln!(w, "race           {} instances, winner #{} (work {})", r.count, r.winner, r.work)?;
            }
            writeln!(w, "seed           {}", est.seed)?;
            if let Some(b) = base {
                writeln!(w, "exact mu       {}", b.mu)?;
                writeln!(w, "greedy |M|     {}", b.greedy_m)?;
                if let Some(r) = b.ratio {
                    writeln!(w, "mu~ / mu       {r:.4}")?;
                }
            }
            Ok(())
        }
    }
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<(), CliError> {
    let base_seed: Seed = a.seed.parse()?;
    let fault = a.inject_fault.map(|every| Fault::FlipStartMemo { every });
    let mut failures = 0;
    let mut first: Option<Counterexample> = None;
    let mut last_shape = (0, 0);
    let mut w = sink(&a.out)?;
    let make_params = |g: &Graph, seed: Seed| -> Option<ParamSet> {
        ParamSet::derive(GraphShape::of(g), a.epsilon, a.c, seed).ok()?.with_k(a.k_override).ok()
    };
    crate::rank::ParamSet::derive(GraphShape { n: 2, m: 1, max_degree: 1 }, a.epsilon, a.c, Seed(0))?;
    let fixed = if a.input.input.is_some() { Some(a.input.load()?) } else { None };
    for i in 0..a.seeds {
        let graph = match &fixed {
            Some(g) => g.clone(),
            None => {
                let spec: GeneratorSpec = a
                    .input
                    .gen
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("exactly one of --input or --gen is required".into()))?
                    .parse()?;
                gen_graph(spec, a.input.gen_seed.wrapping_add(i))?.graph
            }
        };
        if graph.n() > a.max_n {
            return Err(CliError::Usage(format!("graph has {} vertices, above --max-n {}", graph.n(), a.max_n)));
        }
        last_shape = (graph.n(), graph.m());
        let seed = base_seed.derive("verify", i);
        let Some(params) = make_params(&graph, seed) else { continue };
        let report = verify_instance(&graph, &params, seed, fault);
        if !report.violations.is_empty() {
            failures += 1;
            if first.is_none() {
                first = minimize(&graph, seed, fault, |g| make_params(g, seed));
            }
        }
    }
    match a.format {
        Format::Jsonl => writeln!(
            w,
            "{}",
            json!({
                "command": "verify",
                "seed": base_seed,
                "instances": a.seeds,
                "failures": failures,
                "n": last_shape.0,
                "m": last_shape.1,
                "k": a.k_override,
                "epsilon": a.epsilon,
                "counterexample": first,
            })
        )?,
        Format::Csv => {
            writeln!(w, "instances,failures,n,m,k,epsilon")?;
            writeln!(w, "{},{},{},{},{},{}", a.seeds, failures, last_shape.0, last_shape.1, a.k_override, a.epsilon)?;
        }
        Format::Human => {
            writeln!(w, "verified {} instances: {} failed", a.seeds, failures)?;
            if let Some(c) = &first {
                writeln!(w, "counterexample (seed {}, vertex {:?}): {:?}", c.seed, c.vertex, c.violation)?;
                writeln!(w, "{} {}", c.n, c.edges.len())?;
                for (u, v) in &c.edges {
                    writeln!(w, "{u} {v}")?;
                }
            }
        }
    }
    w.flush()?;
    if failures > 0 {
        return Err(CliError::Verification(failures, a.seeds as usize));
    }
    Ok(())
}

/// One bench row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub avg_degree: f64,
    pub k: u64,
    pub mean_f: f64,
    pub p95_f: u64,
    pub probes: u64,
    pub wall_ms: u128,
}

/// Mean and 95th percentile of edge-oracle calls per vertex query, each
/// query in a fresh session with its own order.
pub fn bench_row(n: usize, avg_degree: f64, k: u64, vertices: usize, epsilon: f64, seed: Seed, gen_seed: u64, backend: Backend) -> Result<BenchRow, CliError> {
    let graph = gen_graph(GeneratorSpec::erdos_renyi_with_degree(n, avg_degree), gen_seed)?.graph;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::from_seed(seed.stream_key("bench-vertices"));
    let mut calls = Vec::with_capacity(vertices);
    let mut probes = 0;
    for i in 0..vertices {
        let v = rand::Rng::gen_range(&mut rng, 0..n);
        let s = seed.derive("bench", i as u64);
        let access = ListAccess::new(&graph);
        let params = match ParamSet::derive(GraphShape::of(&graph), epsilon, DEFAULT_C, s) {
            Ok(p) => p.with_k(k)?,
            Err(ParamError::EmptyGraph) => {
                calls.push(0);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let mut session = OracleSession::new(&access, params, s, backend);
        session.vertex_oracle(v);
        let st = session.query_stats();
        calls.push(st.f_calls);
        probes += st.list_probes;
    }
    calls.sort_unstable();
    let mean_f = if calls.is_empty() { 0.0 } else { calls.iter().sum::<u64>() as f64 / calls.len() as f64 };
    let p95_f = if calls.is_empty() { 0 } else { calls[((calls.len() as f64 * 0.95).ceil() as usize).clamp(1, calls.len()) - 1] };
    Ok(BenchRow { n, avg_degree, k, mean_f, p95_f, probes, wall_ms: start.elapsed().as_millis() })
}

pub fn cmd_bench(a: &BenchArgs) -> Result<(), CliError> {
    let seed: Seed = a.seed.parse()?;
    let degrees: Vec<f64> = a
        .avg_degree
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(|_| CliError::Usage(format!("bad average degree `{s}`"))))
        .collect::<Result<_, _>>()?;
    let mut w = sink(&a.out)?;
    writeln!(w, "n,avg_degree,k,mean_f,p95_f,probes,wall_ms")?;
    for &n in &a.n {
        for &d in &degrees {
            let row = bench_row(n, d, a.k, a.vertices, a.epsilon, seed, a.gen_seed, a.backend)?;
            writeln!(w, "{},{},{},{:.3},{},{},{}", row.n, row.avg_degree, row.k, row.mean_f, row.p95_f, row.probes, row.wall_ms)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_gen(a: &GenArgs) -> Result<(), CliError> {
    let spec: GeneratorSpec = format!("{} {}", a.kind, a.params.join(" ")).parse()?;
    let generated = gen_graph(spec, a.seed)?;
    let text = generated.graph.to_edge_list();
    match &a.out {
        Some(path) => {
            fs::write(path, &text)?;
            if let Some(planted) = &generated.planted {
                let meta = json!({
                    "spec": spec,
                    "seed": a.seed,
                    "n": generated.graph.n(),
                    "m": generated.graph.m(),
                    "planted_matching": planted,
                    "mu": planted.len(),
                });
                fs::write(sidecar_path(path), format!("{meta}\n"))?;
            }
        }
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// `<out>.meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}
