//! The adjacency-matrix estimator, which runs the list machinery on an
//! implicit auxiliary graph whose neighbor queries each cost one matrix probe.

use sublinear_matching::estimators::{estimate_matrix, EstimatorConfig};
use sublinear_matching::generators::{gen_graph, GeneratorSpec};
use sublinear_matching::virtual_h::HGraph;
use sublinear_matching::{ListModel, Seed};

fn main() {
    let g = gen_graph(GeneratorSpec::PlantedMatching { n: 256, noise_degree: 0.0 }, 1).unwrap().graph;

    let h = HGraph::over(&g);
    println!("H has {} vertices; V1(0) has degree {}", h.vertex_count(), h.degree(0));

    let cfg = EstimatorConfig { epsilon: 0.25, ..Default::default() };
    let est = estimate_matrix(&g, &cfg, Seed(7)).unwrap();
    println!(
        "mu~ = {:.1} (planted mu = {}), r = {}, matrix probes = {} = {:.2} n^2",
        est.mu_tilde,
        g.n() / 2,
        est.r,
        est.stats.matrix_probes,
        est.stats.matrix_probes as f64 / (g.n() * g.n()) as f64
    );
}
