#![allow(dead_code)]

use sublinear_matching::generators::{gen_graph, GeneratorSpec};
use sublinear_matching::rank::{GraphShape, ParamSet};
use sublinear_matching::{Graph, Seed};

pub fn er(n: usize, avg_degree: f64, gen_seed: u64) -> Graph {
    gen_graph(GeneratorSpec::erdos_renyi_with_degree(n, avg_degree), gen_seed).unwrap().graph
}

pub fn bipartite(left: usize, right: usize, p: f64, gen_seed: u64) -> Graph {
    gen_graph(GeneratorSpec::RandomBipartite { n_left: left, n_right: right, p_edge: p }, gen_seed).unwrap().graph
}

pub fn paths(count: usize, len: usize) -> Graph {
    gen_graph(GeneratorSpec::DisjointPaths { count, path_len: len }, 0).unwrap().graph
}

pub fn planted(n: usize) -> Graph {
    let edges: Vec<_> = (0..n / 2).map(|i| (2 * i, 2 * i + 1)).collect();
    Graph::from_edges(n, &edges).unwrap()
}

pub fn p4() -> Graph {
    Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap()
}

/// Parameters at `epsilon = 0.25` with `K` replaced.
pub fn params(g: &Graph, seed: Seed, k: u64) -> ParamSet {
    ParamSet::derive(GraphShape::of(g), 0.25, 4.0, seed).unwrap().with_k(k).unwrap()
}

/// Maximum matching size by exhaustive search over edge subsets, for tiny graphs.
pub fn brute_force_mu(g: &Graph) -> usize {
    fn go(edges: &[(usize, usize)], used: &mut Vec<bool>) -> usize {
        let Some((&(u, v), rest)) = edges.split_first() else { return 0 };
        let skip = go(rest, used);
        if used[u] || used[v] {
            return skip;
        }
        used[u] = true;
        used[v] = true;
        let take = 1 + go(rest, used);
        used[u] = false;
        used[v] = false;
        skip.max(take)
    }
    go(g.edges(), &mut vec![false; g.n()])
}
