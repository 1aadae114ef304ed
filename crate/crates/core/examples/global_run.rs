//! Runs the global ranked greedy procedure and the length-3 augmentation on
//! one graph, and compares both against the exact maximum matching.

use sublinear_matching::generators::{gen_graph, GeneratorSpec};
use sublinear_matching::rank::{GraphShape, RankModel};
use sublinear_matching::reference::{augment_length3, max_matching, run_algorithm_one};
use sublinear_matching::{Backend, ParamSet, Seed};

fn main() {
    let g = gen_graph(GeneratorSpec::DisjointPaths { count: 200, path_len: 3 }, 0).unwrap().graph;
    let seed = Seed(3);
    let params = ParamSet::derive(GraphShape::of(&g), 0.25, 4.0, seed).unwrap().with_k(32).unwrap();
    let t = run_algorithm_one(&g, &params, &RankModel::new(seed, Backend::Eager, params.k)).unwrap();
    let aug = augment_length3(&g, &t);
    let mu = max_matching(&g).0;

    println!("D = {}, K = {}, levels = {}, j* = {}", params.d, params.k, params.levels, params.j_star);
    println!("|M| = {}, |S| = {}, augmented = {}, mu = {mu}", t.m_size(), t.s_size(), aug.size);
    for line in t.to_text().lines().take(5) {
        println!("  {line}");
    }
}
