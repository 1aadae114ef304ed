//! Generates a graph, writes it as an edge list and reads it back.

use sublinear_matching::generators::{gen_graph, GeneratorSpec};
use sublinear_matching::graph::parse_edge_list;

fn main() {
    let generated = gen_graph(GeneratorSpec::erdos_renyi_with_degree(1000, 6.0), 42).expect("valid spec");
    let g = generated.graph;
    println!("n = {}, m = {}, max degree = {}, avg degree = {:.2}", g.n(), g.m(), g.max_degree(), g.avg_degree());

    let text = g.to_edge_list();
    let back = parse_edge_list(&text).expect("round trip");
    assert_eq!(back.edges(), g.edges());
    println!("edge list: {} bytes, round trip ok", text.len());

    let planted = gen_graph(GeneratorSpec::PlantedMatching { n: 200, noise_degree: 2.0 }, 7).expect("valid spec");
    println!("planted matching of {} edges inside m = {}", planted.planted.as_ref().map_or(0, Vec::len), planted.graph.m());
}
