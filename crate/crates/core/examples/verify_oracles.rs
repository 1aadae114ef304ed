//! Cross-checks local oracle answers against a global run, with and without
//! an injected fault.

use sublinear_matching::generators::{gen_graph, GeneratorSpec};
use sublinear_matching::oracle::Fault;
use sublinear_matching::rank::GraphShape;
use sublinear_matching::verify::verify_instance;
use sublinear_matching::{ParamSet, Seed};

fn main() {
    let g = gen_graph(GeneratorSpec::erdos_renyi_with_degree(100, 6.0), 2).unwrap().graph;
    for fault in [None, Some(Fault::FlipStartMemo { every: 3 })] {
        let mut failing = 0;
        for s in 0..20 {
            let seed = Seed::from_u64(s);
            let params = ParamSet::derive(GraphShape::of(&g), 0.25, 4.0, seed).unwrap().with_k(8).unwrap();
            failing += !verify_instance(&g, &params, seed, fault).violations.is_empty() as u32;
        }
        println!("fault {fault:?}: {failing} of 20 seeds report violations");
    }
}
