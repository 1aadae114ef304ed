//! Both adjacency-list estimators on a random graph, next to the exact value.

use sublinear_matching::estimators::{estimate_list_add, estimate_list_mult, EstimatorConfig};
use sublinear_matching::generators::{gen_graph, GeneratorSpec};
use sublinear_matching::reference::max_matching;
use sublinear_matching::Seed;

fn main() {
    let g = gen_graph(GeneratorSpec::erdos_renyi_with_degree(4096, 8.0), 5).unwrap().graph;
    let mu = max_matching(&g).0 as f64;
    let cfg = EstimatorConfig { epsilon: 0.2, delta: Some(0.2), ..Default::default() };

    let mult = estimate_list_mult(&g, &cfg, Seed(1)).unwrap();
    let add = estimate_list_add(&g, &cfg, Seed(1)).unwrap();
    for est in [&mult, &add] {
        println!(
            "{:<10} mu~ = {:8.1}  mu~/mu = {:.3}  r = {:>7}  f = {:.4}  calls = {}",
            est.variant.to_string(),
            est.mu_tilde,
            est.mu_tilde / mu,
            est.r,
            est.f,
            est.stats.f_calls
        );
    }
    println!("exact mu = {mu}");
}
