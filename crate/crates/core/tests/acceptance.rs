//! Acceptance suite. Each test prints one `PASS`/`FAIL` line, written past
//! the test harness's output capture, then asserts.

mod common;

use std::collections::HashMap;
use std::io::Write;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};
use sublinear_matching::cli::bench_row;
use sublinear_matching::estimators::{estimate_list_add, estimate_list_mult, estimate_matrix, EstimatorConfig};
use sublinear_matching::generators::{gen_graph, GeneratorSpec};
use sublinear_matching::oracle::OracleSession;
use sublinear_matching::rank::{ElementRef, GraphShape, ParamSet, RankModel, Side};
use sublinear_matching::reference::{
    augment_length3, claim31_holds, count_length3_aug, is_maximal, mate_array, max_matching, run_algorithm_one,
};
use sublinear_matching::virtual_h::{gamma, HGraph, HVertex};
use sublinear_matching::{Backend, Graph, ListModel, Seed};

// Tolerances.
const C1_MAX_MISMATCHES: usize = 0;
const C2_MAX_VIOLATIONS: usize = 0;
const C3_MAX_VIOLATIONS: usize = 0;
const C4_RUNS: u64 = 10_000;
const C4_ALPHA: f64 = 0.01;
const C5_SEEDS: u64 = 50;
const C5_MIN_PASS_RATE: f64 = 0.95;
const C5_LOWER_FACTOR: f64 = 0.45;
const C5_DELTA: f64 = 0.2;
const C6_MAX_RATIO: f64 = 2.8;
const C6_VERTICES: usize = 500;
const C6_K: u64 = 16;
const C7_EXPONENT: f64 = 1.6;
const C8_RANK_QUERIES: usize = 100_000;
const C8_SEEDS: u64 = 200;
const C8_MAX_SE: f64 = 3.0;
const C8_ALPHA: f64 = 0.01;

fn report(criterion: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[acceptance {criterion}] {verdict}: {detail}");
}

fn families() -> Vec<(&'static str, Box<dyn Fn(u64) -> Graph>)> {
    vec![
        ("er(100, 6)", Box::new(|i| common::er(100, 6.0, i))),
        ("bipartite(50, 50, 0.1)", Box::new(|i| common::bipartite(50, 50, 0.1, i))),
        ("disjoint_paths(25, 3)", Box::new(|_| common::paths(25, 3))),
    ]
}

fn instance_seed(family: usize, k: u64, i: u64) -> Seed {
    Seed::from_u64(i).derive("acceptance", family as u64 * 16 + k)
}

#[test]
fn criterion_1_oracle_global_equivalence() {
    let mut mismatches = 0;
    let mut checked = 0;
    for (f, (_, make)) in families().iter().enumerate() {
        for k in [2u64, 8] {
            for i in 0..200 {
                let g = make(i);
                let seed = instance_seed(f, k, i);
                let params = common::params(&g, seed, k);
                let t = run_algorithm_one(&g, &params, &RankModel::new(seed, Backend::Eager, k)).unwrap();
                let mut session = OracleSession::new(&g, params, seed, Backend::Eager);
                for v in 0..g.n() {
                    let s = session.vertex_oracle(v);
                    checked += 1;
                    let oracle = (s.st_partner.map(|p| p.vertex), s.ex_partner.map(|p| p.vertex));
                    if oracle != (t.m_mate[v], t.s_mate[v]) || s.st != oracle.0.is_some() || s.ex != oracle.1.is_some() {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    let pass = mismatches <= C1_MAX_MISMATCHES;
    report(1, pass, &format!("{mismatches} mismatches over {checked} vertex queries (3 families x K in {{2, 8}} x 200 seeds)"));
    assert!(pass);
}

/// Interval of a rank fraction from the alphas, in floating point.
fn float_interval(params: &ParamSet, q: f64) -> Option<usize> {
    (1..=params.levels).find(|&i| params.alpha(i + 1) < q && q <= params.alpha(i))
}

#[test]
fn criterion_2_structural_invariants() {
    let mut violations = Vec::new();
    let mut instances = 0;
    for (f, (name, make)) in families().iter().enumerate() {
        for k in [2u64, 8] {
            for i in 0..200 {
                let g = make(i);
                let seed = instance_seed(f, k, i);
                let params = common::params(&g, seed, k);
                let t = run_algorithm_one(&g, &params, &RankModel::new(seed, Backend::Eager, k)).unwrap();
                instances += 1;
                let tag = format!("{name} K={k} seed#{i}");
                if !is_maximal(&g, &t.m_mate) {
                    violations.push(format!("{tag}: M not maximal"));
                }
                if mate_array(g.n(), &t.s_pairs(&g), "S").is_err() {
                    violations.push(format!("{tag}: S not a matching"));
                }
                for s in &t.s_edges {
                    let a = s.audit;
                    let ok = a.s_degree_u == 0 && a.s_degree_v == 0 && a.m_degree_sum <= 1 && a.colors_differ && !a.u_frozen && !a.v_frozen;
                    if !ok {
                        violations.push(format!("{tag}: audit of S-edge {} fails", s.edge));
                    }
                }
                for e in &t.m_edges {
                    let q = e.rank.fraction();
                    let at_threshold = (1..=params.levels + 1).any(|j| (q - params.alpha(j)).abs() <= 1e-15);
                    if float_interval(&params, q) != Some(e.partition) && !at_threshold {
                        violations.push(format!("{tag}: M-edge {} in partition {}", e.edge, e.partition));
                    }
                }
                let mu = max_matching(&g).0;
                if 2 * t.m_size() < mu {
                    violations.push(format!("{tag}: |M| = {} < mu/2 = {mu}/2", t.m_size()));
                }
            }
        }
    }
    let pass = violations.len() <= C2_MAX_VIOLATIONS;
    report(2, pass, &format!("{} violations over {instances} instances {:?}", violations.len(), violations.iter().take(3).collect::<Vec<_>>()));
    assert!(pass);
}

#[test]
fn criterion_3_claim_checker() {
    let mut violations = 0;
    let mut applicable = 0;
    for i in 0..100u64 {
        let (left, right) = (10 + (i % 21) as usize, 10 + ((i * 7) % 21) as usize);
        let p = 0.04 + 0.16 * ((i * 13) % 100) as f64 / 100.0;
        let g = common::bipartite(left, right, p, 1000 + i);
        if g.m() == 0 {
            continue;
        }
        let seed = Seed::from_u64(i).derive("claim", 0);
        let params = common::params(&g, seed, 8);
        let t = run_algorithm_one(&g, &params, &RankModel::new(seed, Backend::Eager, 8)).unwrap();
        let (mu, m_star) = max_matching(&g);
        let count = count_length3_aug(g.n(), &t.m_pairs(&g), &m_star).unwrap();
        if 2 * t.m_size() >= mu {
            applicable += 1;
        }
        if !claim31_holds(t.m_size(), mu, count) {
            violations += 1;
        }
    }
    let pass = violations <= C3_MAX_VIOLATIONS;
    report(3, pass, &format!("{violations} violations over 100 bipartite instances ({applicable} with delta' >= 0)"));
    assert!(pass);
}

#[test]
fn criterion_4_augmentation_gain() {
    // Stated substitute: the true delta is far below measurement, so only
    // positive expected gain is tested. K is overridden to keep 10^4 runs fast.
    let g = common::paths(200, 3);
    let mut gains = Vec::with_capacity(C4_RUNS as usize);
    let mut never_worse = true;
    for i in 0..C4_RUNS {
        let seed = Seed::from_u64(i).derive("gain", 0);
        let params = common::params(&g, seed, 32);
        let t = run_algorithm_one(&g, &params, &RankModel::new(seed, Backend::Eager, 32)).unwrap();
        let aug = augment_length3(&g, &t);
        never_worse &= aug.size >= t.m_size();
        gains.push(aug.size as f64 - t.m_size() as f64);
    }
    let n = gains.len() as f64;
    let mean = gains.iter().sum::<f64>() / n;
    let sd = (gains.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let (t_stat, p) = if sd == 0.0 {
        (0.0, 1.0)
    } else {
        let t = mean / (sd / n.sqrt());
        (t, 1.0 - StudentsT::new(0.0, 1.0, n - 1.0).unwrap().cdf(t))
    };
    let pass = never_worse && p < C4_ALPHA;
    report(4, pass, &format!("mean gain {mean:.4} per run, t = {t_stat:.2}, one-sided p = {p:.2e}, |M^| >= |M| always: {never_worse}"));
    assert!(pass);
}

#[test]
fn criterion_5_estimator_soundness() {
    let mut lines = Vec::new();
    let mut pass = true;
    for (variant, n) in [("mult", 2000usize), ("add", 4096)] {
        let mut upper_ok = 0;
        let mut lower_ok = 0;
        let mut ratios = Vec::new();
        for s in 0..C5_SEEDS {
            let g = common::er(n, 8.0, 500 + s);
            let mu = max_matching(&g).0 as f64;
            let seed = Seed::from_u64(s).derive("soundness", 0);
            let cfg = EstimatorConfig { epsilon: 0.2, delta: Some(C5_DELTA), ..Default::default() };
            let est = match variant {
                "mult" => estimate_list_mult(&g, &cfg, seed).unwrap(),
                _ => estimate_list_add(&g, &cfg, seed).unwrap(),
            };
            let lower = match variant {
                "mult" => C5_LOWER_FACTOR * mu,
                _ => C5_LOWER_FACTOR * mu - n as f64 / (n as f64).log2(),
            };
            upper_ok += (est.mu_tilde <= mu) as u64;
            lower_ok += (est.mu_tilde >= lower) as u64;
            ratios.push(est.mu_tilde / mu);
        }
        let (up, low) = (upper_ok as f64 / C5_SEEDS as f64, lower_ok as f64 / C5_SEEDS as f64);
        pass &= up >= C5_MIN_PASS_RATE && low >= C5_MIN_PASS_RATE;
        let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
        lines.push(format!("{variant} n={n}: upper {up:.2}, lower {low:.2}, mean mu~/mu {mean_ratio:.3}"));
    }
    report(5, pass, &lines.join("; "));
    assert!(pass);
}

#[test]
fn criterion_6_query_scaling() {
    let mut rows = Vec::new();
    for d in [4.0, 8.0, 16.0, 32.0] {
        rows.push(bench_row(10_000, d, C6_K, C6_VERTICES, 0.25, Seed(6), 6, Backend::Lazy).unwrap());
    }
    let ratios: Vec<f64> = rows.windows(2).map(|w| w[1].mean_f / w[0].mean_f).collect();
    let pass = ratios.iter().all(|&r| r <= C6_MAX_RATIO);
    let means: Vec<String> = rows.iter().map(|r| format!("{:.2}", r.mean_f)).collect();
    let ratios_s: Vec<String> = ratios.iter().map(|r| format!("{r:.2}")).collect();
    report(6, pass, &format!("mean F for d in 4,8,16,32: [{}], ratios [{}]", means.join(", "), ratios_s.join(", ")));
    assert!(pass);
}

fn materialized_h_neighbors(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.n();
    let gm = gamma(n);
    let id = |hv: HVertex| hv.id(n, gm);
    let mut adj = vec![Vec::new(); 2 * n + n * gm];
    let mut add = |a: usize, b: usize| {
        adj[a].push(b);
        adj[b].push(a);
    };
    for v in 0..n {
        for w in 0..n {
            if g.has_edge(v, w) && v < w {
                add(id(HVertex::V1(v)), id(HVertex::V1(w)));
                add(id(HVertex::V2(v)), id(HVertex::V2(w)));
            } else if !g.has_edge(v, w) {
                add(id(HVertex::V1(v)), id(HVertex::V2(w)));
            }
        }
        for slot in 1..=gm {
            add(id(HVertex::V2(v)), id(HVertex::U { owner: v, slot }));
        }
    }
    for row in &mut adj {
        row.sort_unstable();
    }
    adj
}

#[test]
fn criterion_7_matrix_reduction() {
    // One matrix probe per neighbor query, exhaustively on a small H and on
    // random queries to a larger one.
    let mut max_probes = 0;
    for (n, queries) in [(16usize, None), (256, Some(100_000usize))] {
        let g = common::er(n, 4.0, 7);
        let h = HGraph::over(&g);
        let mut one = |v: usize, i: usize| {
            let before = h.access().probe_count();
            h.neighbor(v, i);
            max_probes = max_probes.max(h.access().probe_count() - before);
        };
        match queries {
            None => (0..h.vertex_count()).for_each(|v| (0..=h.degree(v) + 1).for_each(|i| one(v, i))),
            Some(q) => {
                let mut rng = ChaCha8Rng::seed_from_u64(7);
                for _ in 0..q {
                    let v = rng.gen_range(0..h.vertex_count());
                    let i = rng.gen_range(0..=h.degree(v) + 1);
                    one(v, i);
                }
            }
        }
    }

    // Implicit H equals H written out from its definition, for n <= 6.
    let mut tiny_mismatch = 0;
    let mut tiny_graphs = 0;
    for n in 2..=6usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let subsets: Vec<u64> = if pairs.len() <= 10 { (0..1u64 << pairs.len()).collect() } else { (0..200).map(|s| s * 0x9e37_79b9 % (1u64 << pairs.len())).collect() };
        for mask in subsets {
            let edges: Vec<_> = pairs.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, &e)| e).collect();
            let g = Graph::from_edges(n, &edges).unwrap();
            let h = HGraph::over(&g);
            let expected = materialized_h_neighbors(&g);
            tiny_graphs += 1;
            for (v, want) in expected.iter().enumerate() {
                let mut got: Vec<usize> = (1..=h.degree(v)).filter_map(|i| h.neighbor(v, i)).collect();
                got.sort_unstable();
                if &got != want || h.neighbor(v, h.degree(v) + 1).is_some() {
                    tiny_mismatch += 1;
                }
            }
        }
    }

    // Probe trend on planted matchings.
    let mut probes = Vec::new();
    for n in [256usize, 512, 1024] {
        let g = gen_graph(GeneratorSpec::PlantedMatching { n, noise_degree: 0.0 }, 1).unwrap().graph;
        let cfg = EstimatorConfig { epsilon: 0.25, ..Default::default() };
        let est = estimate_matrix(&g, &cfg, Seed(7)).unwrap();
        probes.push((n, est.stats.matrix_probes, est.r));
    }
    let c = probes[0].1 as f64 / (probes[0].0 as f64).powf(C7_EXPONENT);
    let trend_ok = probes.iter().all(|&(n, p, _)| p as f64 <= c * (n as f64).powf(C7_EXPONENT) * (1.0 + 1e-12));
    let detail: Vec<String> =
        probes.iter().map(|&(n, p, r)| format!("n={n}: {p} probes = {:.3} n^2 (r = {r}), bound {:.0}", p as f64 / (n * n) as f64, c * (n as f64).powf(C7_EXPONENT))).collect();

    let pass = max_probes <= 1 && tiny_mismatch == 0 && trend_ok;
    report(
        7,
        pass,
        &format!(
            "max probes per neighbor query {max_probes}; tiny-n mismatches {tiny_mismatch} over {tiny_graphs} graphs; probe trend {}: {}",
            if trend_ok { "ok" } else { "exceeds C n^1.6" },
            detail.join("; ")
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_8_rank_engine_fidelity() {
    // Endpoint consistency: an element has one rank whichever endpoint's
    // stream or direct query reveals it.
    let g = common::er(300, 6.0, 8);
    let mut model = RankModel::new(Seed(8), Backend::Lazy, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut known: HashMap<ElementRef, u64> = HashMap::new();
    let mut inconsistent = 0;
    for _ in 0..C8_RANK_QUERIES {
        let u = rng.gen_range(0..g.n());
        if g.degree(u) == 0 {
            continue;
        }
        let (element, value) = match rng.gen_range(0..3) {
            0 => {
                let count = model.element_count(&g, Side::Start, u) as usize;
                let e = model.lowest(&g, Side::Start, u, rng.gen_range(1..=count.min(24))).unwrap();
                (e.element, e.rank.value)
            }
            1 => {
                let e = model.lowest(&g, Side::Extend, u, rng.gen_range(1..=g.degree(u))).unwrap();
                (e.element, e.rank.value)
            }
            _ => {
                let v = g.neighbors(u)[rng.gen_range(0..g.degree(u))];
                let e = if rng.gen_bool(0.5) { ElementRef::start(u, v, rng.gen_range(0..4)) } else { ElementRef::extend(v, u) };
                (e, model.rank_of(&g, &e).unwrap().value)
            }
        };
        if *known.entry(element).or_insert(value) != value {
            inconsistent += 1;
        }
        let other = element.other(u);
        if let Some(pos) = (1..).take(40).find(|&i| model.lowest(&g, element.side(), other, i).map_or(true, |e| e.element == element)) {
            if model.lowest(&g, element.side(), other, pos).is_some_and(|e| e.rank.value != value) {
                inconsistent += 1;
            }
        }
    }

    // |M| under both backends on the same graph family.
    let mut eager_m = Vec::new();
    let mut lazy_m = Vec::new();
    for s in 0..C8_SEEDS {
        let g = common::er(500, 6.0, 800 + s);
        let seed = Seed::from_u64(s).derive("backends", 0);
        let params = ParamSet::derive(GraphShape::of(&g), 0.25, 4.0, seed).unwrap();
        let t = run_algorithm_one(&g, &params, &RankModel::new(seed, Backend::Eager, params.k)).unwrap();
        eager_m.push(t.m_size() as f64);
        let mut session = OracleSession::new(&g, params, seed, Backend::Lazy);
        let matched = (0..g.n()).filter(|&v| session.vertex_oracle(v).st).count();
        lazy_m.push(matched as f64 / 2.0);
    }
    let stats = |x: &[f64]| {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        (m, x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0))
    };
    let ((me, ve), (ml, vl)) = (stats(&eager_m), stats(&lazy_m));
    let se = (ve / eager_m.len() as f64 + vl / lazy_m.len() as f64).sqrt();
    let gap = (me - ml).abs() / se;

    // Uniformity of lazily realized ranks: realize every element of a graph.
    let g = common::er(500, 6.0, 9);
    let mut model = RankModel::new(Seed(9), Backend::Lazy, 16);
    let mut values: HashMap<ElementRef, f64> = HashMap::new();
    for u in 0..g.n() {
        for side in [Side::Start, Side::Extend] {
            let mut i = 1;
            while let Some(e) = model.lowest(&g, side, u, i) {
                values.insert(e.element, e.rank.fraction());
                i += 1;
            }
        }
    }
    let bins = 64;
    let mut counts = vec![0usize; bins];
    for &q in values.values() {
        counts[((q * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let expected = values.len() as f64 / bins as f64;
    let chi: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(chi);

    let pass = inconsistent == 0 && gap <= C8_MAX_SE && p > C8_ALPHA;
    report(
        8,
        pass,
        &format!(
            "{inconsistent} inconsistent ranks over {C8_RANK_QUERIES} queries; mean |M| eager {me:.2} vs lazy {ml:.2} ({gap:.2} pooled SE); chi-square p = {p:.3} over {} ranks",
            values.len()
        ),
    );
    assert!(pass);
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_mmest")).args(args).output().expect("run mmest");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

/// Drops the wall-clock column of bench CSV, the one measured quantity.
fn without_wall_time(csv: &[u8]) -> String {
    String::from_utf8_lossy(csv).lines().map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string() + "\n").collect()
}

#[test]
fn criterion_9_determinism() {
    let commands: Vec<Vec<&str>> = vec![
        vec!["gen", "planted_matching", "512", "2", "--seed", "4"],
        vec!["estimate", "--gen", "er 2000 0.004", "--variant", "add", "--seed", "9", "--format", "jsonl", "--with-baselines"],
        vec!["estimate", "--gen", "er 2000 0.004", "--variant", "mult", "--delta", "0.2", "--seed", "9", "--format", "jsonl"],
        vec!["estimate", "--gen", "planted 256 0", "--model", "matrix", "--epsilon", "0.25", "--seed", "9", "--format", "jsonl"],
        vec!["verify", "--gen", "er 100 0.0606", "--seeds", "20", "--format", "jsonl"],
    ];
    let mut identical = 0;
    let mut diffs = Vec::new();
    for c in &commands {
        if run_cli(c) == run_cli(c) {
            identical += 1;
        } else {
            diffs.push(c.join(" "));
        }
    }
    let bench = ["bench", "--n", "2000", "--avg-degree", "4,8", "--vertices", "100"];
    let bench_same = without_wall_time(&run_cli(&bench)) == without_wall_time(&run_cli(&bench));
    if !bench_same {
        diffs.push(bench.join(" "));
    }

    let base = ["estimate", "--gen", "er 2000 0.004", "--variant", "add", "--seed", "9", "--format", "jsonl"];
    let raced_args: Vec<&str> = base.iter().copied().chain(["--race", "4"]).collect();
    let raced_a = run_cli(&raced_args);
    let raced_same = raced_a == run_cli(&raced_args);
    let mut raced: serde_json::Value = serde_json::from_slice(&raced_a).unwrap();
    let winner = raced["race"]["winner"].clone();
    let winner_seed = raced["seed"].as_str().unwrap().to_string();
    let mut single_args = base.to_vec();
    single_args[6] = &winner_seed;
    let mut single: serde_json::Value = serde_json::from_slice(&run_cli(&single_args)).unwrap();
    raced.as_object_mut().unwrap().remove("race");
    single.as_object_mut().unwrap().remove("race");
    let race_matches = raced == single;

    let pass = diffs.is_empty() && raced_same && race_matches;
    report(
        9,
        pass,
        &format!(
            "{identical}/{} commands byte-identical, bench identical apart from wall time: {bench_same}; --race 4 repeatable: {raced_same}, winner #{winner} equals single run with its seed: {race_matches}",
            commands.len()
        ),
    );
    assert!(pass);
}
