//! Seeded random graph generators for desk-scale experiments.
//!
//! Specs have a compact string form used on the command line, e.g.
//! `erdos_renyi 1000 0.008`, `random_bipartite:50:50:0.1`,
//! `planted_matching(100, 0)` or `disjoint_paths 25 3`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, Vertex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("generator `{name}` expects {expected} parameters, got {got}")]
    Arity { name: &'static str, expected: usize, got: usize },
    #[error("invalid parameter `{0}`")]
    BadNumber(String),
    #[error("invalid generator parameters: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    ErdosRenyi { n: usize, p_edge: f64 },
    RandomBipartite { n_left: usize, n_right: usize, p_edge: f64 },
    /// A perfect matching on `n` vertices plus about `n * noise_degree / 2`
    /// uniformly random extra edges.
    PlantedMatching { n: usize, noise_degree: f64 },
    /// `count` vertex-disjoint paths with `path_len` edges each.
    DisjointPaths { count: usize, path_len: usize },
}

impl GeneratorSpec {
    /// Erdős–Rényi graph with expected average degree `avg_degree`.
    pub fn erdos_renyi_with_degree(n: usize, avg_degree: f64) -> Self {
        let p_edge = if n < 2 { 0.0 } else { (avg_degree / (n - 1) as f64).min(1.0) };
        Self::ErdosRenyi { n, p_edge }
    }

    fn validate(&self) -> Result<(), GeneratorError> {
        let check_p = |p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(GeneratorError::Invalid(format!("edge probability {p} outside [0, 1]")))
            }
        };
        match *self {
            Self::ErdosRenyi { p_edge, .. } => check_p(p_edge),
            Self::RandomBipartite { p_edge, .. } => check_p(p_edge),
            Self::PlantedMatching { n, noise_degree } => {
                if n % 2 != 0 {
                    return Err(GeneratorError::Invalid(format!("planted matching needs even n, got {n}")));
                }
                if !(noise_degree >= 0.0) || noise_degree > n.saturating_sub(2) as f64 {
                    return Err(GeneratorError::Invalid(format!("noise degree {noise_degree} out of range")));
                }
                Ok(())
            }
            Self::DisjointPaths { path_len, .. } => {
                if path_len == 0 {
                    Err(GeneratorError::Invalid("path length must be at least 1".into()))
                } else {
                    Ok(())
                }
            }
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ErdosRenyi { n, p_edge } => write!(f, "erdos_renyi {n} {p_edge}"),
            Self::RandomBipartite { n_left, n_right, p_edge } => {
                write!(f, "random_bipartite {n_left} {n_right} {p_edge}")
            }
            Self::PlantedMatching { n, noise_degree } => write!(f, "planted_matching {n} {noise_degree}"),
            Self::DisjointPaths { count, path_len } => write!(f, "disjoint_paths {count} {path_len}"),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = GeneratorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut tokens = s
            .split(|c: char| c.is_whitespace() || matches!(c, ':' | ',' | '(' | ')' | '='))
            .filter(|t| !t.is_empty());
        let name = tokens.next().ok_or_else(|| GeneratorError::UnknownGenerator(String::new()))?;
        let args: Vec<&str> = tokens.collect();
        let arity = |name: &'static str, expected: usize| {
            if args.len() == expected {
                Ok(())
            } else {
                Err(GeneratorError::Arity { name, expected, got: args.len() })
            }
        };
        let int = |t: &str| t.parse::<usize>().map_err(|_| GeneratorError::BadNumber(t.to_string()));
        let real = |t: &str| t.parse::<f64>().map_err(|_| GeneratorError::BadNumber(t.to_string()));
        let spec = match name {
            "erdos_renyi" | "er" | "gnp" => {
                arity("erdos_renyi", 2)?;
                Self::ErdosRenyi { n: int(args[0])?, p_edge: real(args[1])? }
            }
            "random_bipartite" | "bipartite" => {
                arity("random_bipartite", 3)?;
                Self::RandomBipartite { n_left: int(args[0])?, n_right: int(args[1])?, p_edge: real(args[2])? }
            }
            "planted_matching" | "planted" => {
                arity("planted_matching", 2)?;
                Self::PlantedMatching { n: int(args[0])?, noise_degree: real(args[1])? }
            }
            "disjoint_paths" | "paths" => {
                arity("disjoint_paths", 2)?;
                Self::DisjointPaths { count: int(args[0])?, path_len: int(args[1])? }
            }
            other => return Err(GeneratorError::UnknownGenerator(other.to_string())),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// A generated graph with generator metadata.
#[derive(Debug, Clone)]
pub struct GeneratedGraph {
    pub graph: Graph,
    pub spec: GeneratorSpec,
    pub seed: u64,
    /// For `planted_matching`: the planted perfect matching, as edge ids.
    pub planted: Option<Vec<usize>>,
}

/// Generates the graph described by `spec`. Deterministic in `(spec, seed)`.
pub fn gen_graph(spec: GeneratorSpec, seed: u64) -> Result<GeneratedGraph, GeneratorError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planted = None;
    let (n, edges) = match spec {
        GeneratorSpec::ErdosRenyi { n, p_edge } => (n, gnp_edges(n, p_edge, &mut rng)),
        GeneratorSpec::RandomBipartite { n_left, n_right, p_edge } => {
            (n_left + n_right, bipartite_edges(n_left, n_right, p_edge, &mut rng))
        }
        GeneratorSpec::PlantedMatching { n, noise_degree } => {
            let mut order: Vec<Vertex> = (0..n).collect();
            order.shuffle(&mut rng);
            let mut edges: Vec<(Vertex, Vertex)> = order.chunks_exact(2).map(|c| (c[0], c[1])).collect();
            planted = Some((0..edges.len()).collect());
            let extra = (n as f64 * noise_degree / 2.0).round() as usize;
            let mut present: std::collections::HashSet<(Vertex, Vertex)> =
                edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
            while edges.len() < n / 2 + extra {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                if u != v && present.insert((u.min(v), u.max(v))) {
                    edges.push((u, v));
                }
            }
            (n, edges)
        }
        GeneratorSpec::DisjointPaths { count, path_len } => {
            let per = path_len + 1;
            let edges = (0..count)
                .flat_map(|p| (0..path_len).map(move |i| (p * per + i, p * per + i + 1)))
                .collect();
            (count * per, edges)
        }
    };
    let graph = Graph::from_edges(n, &edges).map_err(|e| GeneratorError::Invalid(e.to_string()))?;
    Ok(GeneratedGraph { graph, spec, seed, planted })
}

/// Number of failures before the next success of a Bernoulli(p) sequence.
fn geometric_skip<R: Rng>(p: f64, rng: &mut R) -> u64 {
    if p >= 1.0 {
        return 0;
    }
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    (u.ln() / (1.0 - p).ln()).floor().min(u64::MAX as f64 / 2.0) as u64
}

fn gnp_edges<R: Rng>(n: usize, p: f64, rng: &mut R) -> Vec<(Vertex, Vertex)> {
    let mut edges = Vec::new();
    if p <= 0.0 || n < 2 {
        return edges;
    }
    // Skip-sampling over pairs (w, v) with w < v in row-major order.
    let (mut v, mut w) = (1u64, 0u64);
    let n = n as u64;
    let mut next = geometric_skip(p, rng);
    loop {
        w += next;
        while w >= v && v < n {
            w -= v;
            v += 1;
        }
        if v >= n {
            break;
        }
        edges.push((w as Vertex, v as Vertex));
        w += 1;
        next = geometric_skip(p, rng);
    }
    edges
}

fn bipartite_edges<R: Rng>(left: usize, right: usize, p: f64, rng: &mut R) -> Vec<(Vertex, Vertex)> {
    let mut edges = Vec::new();
    if p <= 0.0 {
        return edges;
    }
    let total = (left * right) as u64;
    let mut idx = geometric_skip(p, rng);
    while idx < total {
        let (i, j) = ((idx / right as u64) as usize, (idx % right as u64) as usize);
        edges.push((i, left + j));
        idx += 1 + geometric_skip(p, rng);
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disjoint_path_p4() {
        let g = gen_graph(GeneratorSpec::DisjointPaths { count: 1, path_len: 3 }, 0).unwrap().graph;
        assert_eq!((g.n(), g.m()), (4, 3));
        assert_eq!(g.edges(), &[(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn planted_matching_without_noise() {
        let gen = gen_graph(GeneratorSpec::PlantedMatching { n: 100, noise_degree: 0.0 }, 3).unwrap();
        assert_eq!(gen.graph.m(), 50);
        assert_eq!(gen.graph.max_degree(), 1);
        assert_eq!(gen.planted.as_ref().unwrap().len(), 50);
    }

    #[test]
    fn planted_metadata_is_a_matching() {
        let gen = gen_graph(GeneratorSpec::PlantedMatching { n: 200, noise_degree: 4.0 }, 11).unwrap();
        let mut seen = vec![false; 200];
        for &id in gen.planted.as_ref().unwrap() {
            let (u, v) = gen.graph.edge(id);
            assert!(!seen[u] && !seen[v]);
            seen[u] = true;
            seen[v] = true;
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(gen.graph.m(), 100 + 400);
    }

    #[test]
    fn erdos_renyi_edge_count_concentrates() {
        // E[m] = 0.05 * 4950 = 247.5, sd ~ 15.3; [150, 350] is > 6 sd wide.
        let g = gen_graph(GeneratorSpec::ErdosRenyi { n: 100, p_edge: 0.05 }, 7).unwrap().graph;
        assert!((150..=350).contains(&g.m()), "m = {}", g.m());
    }

    #[test]
    fn erdos_renyi_complete_and_empty() {
        let g = gen_graph(GeneratorSpec::ErdosRenyi { n: 7, p_edge: 1.0 }, 1).unwrap().graph;
        assert_eq!(g.m(), 21);
        let g = gen_graph(GeneratorSpec::ErdosRenyi { n: 7, p_edge: 0.0 }, 1).unwrap().graph;
        assert_eq!(g.m(), 0);
    }

    #[test]
    fn bipartite_edges_cross_sides() {
        let g = gen_graph(GeneratorSpec::RandomBipartite { n_left: 30, n_right: 20, p_edge: 0.3 }, 5)
            .unwrap()
            .graph;
        assert!(g.m() > 0);
        assert!(g.edges().iter().all(|&(u, v)| u < 30 && v >= 30));
        let full = gen_graph(GeneratorSpec::RandomBipartite { n_left: 3, n_right: 4, p_edge: 1.0 }, 5)
            .unwrap()
            .graph;
        assert_eq!(full.m(), 12);
    }

    #[test]
    fn deterministic_per_seed() {
        let spec: GeneratorSpec = "erdos_renyi 300 0.02".parse().unwrap();
        let a = gen_graph(spec, 9).unwrap().graph;
        let b = gen_graph(spec, 9).unwrap().graph;
        let c = gen_graph(spec, 10).unwrap().graph;
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(
            "planted_matching(100, 0)".parse::<GeneratorSpec>().unwrap(),
            GeneratorSpec::PlantedMatching { n: 100, noise_degree: 0.0 }
        );
        assert_eq!(
            "random_bipartite:50:50:0.1".parse::<GeneratorSpec>().unwrap(),
            GeneratorSpec::RandomBipartite { n_left: 50, n_right: 50, p_edge: 0.1 }
        );
        let spec = GeneratorSpec::DisjointPaths { count: 25, path_len: 3 };
        assert_eq!(spec.to_string().parse::<GeneratorSpec>().unwrap(), spec);
        assert!(matches!("planted 7 0".parse::<GeneratorSpec>(), Err(GeneratorError::Invalid(_))));
        assert!(matches!("er 10".parse::<GeneratorSpec>(), Err(GeneratorError::Arity { .. })));
        assert!(matches!("er 10 1.5".parse::<GeneratorSpec>(), Err(GeneratorError::Invalid(_))));
        assert!(matches!("tree 10".parse::<GeneratorSpec>(), Err(GeneratorError::UnknownGenerator(_))));
    }
}
