//! Races independent estimator instances and reproduces the winner alone.

use sublinear_matching::estimators::{estimate_list_add, race_estimate, EstimatorConfig, Variant};
use sublinear_matching::generators::{gen_graph, GeneratorSpec};
use sublinear_matching::Seed;

fn main() {
    let g = gen_graph(GeneratorSpec::erdos_renyi_with_degree(2048, 8.0), 3).unwrap().graph;
    let cfg = EstimatorConfig { epsilon: 0.25, ..Default::default() };
    let count = (g.n() as f64).log2().ceil() as usize;

    let raced = race_estimate(Variant::ListAdd, &g, &cfg, Seed(9), count).unwrap();
    let info = raced.race.unwrap();
    println!("{count} instances, winner #{} with work {}, mu~ = {:.2}", info.winner, info.work, raced.mu_tilde);

    let alone = estimate_list_add(&g, &cfg, raced.seed).unwrap();
    assert_eq!(alone.mu_tilde, raced.mu_tilde);
    println!("single run with seed {} reproduces it: mu~ = {:.2}", raced.seed, alone.mu_tilde);
}
