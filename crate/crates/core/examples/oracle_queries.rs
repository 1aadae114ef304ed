//! Answers matching membership for a few vertices locally, without a global
//! run, and reports the query cost.

use sublinear_matching::generators::{gen_graph, GeneratorSpec};
use sublinear_matching::oracle::OracleSession;
use sublinear_matching::rank::GraphShape;
use sublinear_matching::{Backend, ListAccess, ParamSet, Seed};

fn main() {
    let g = gen_graph(GeneratorSpec::erdos_renyi_with_degree(10_000, 8.0), 1).unwrap().graph;
    let access = ListAccess::new(&g);
    let seed = Seed(11);
    let params = ParamSet::derive(GraphShape::of(&g), 0.25, 4.0, seed).unwrap();
    let mut session = OracleSession::new(&access, params, seed, Backend::Lazy);

    for v in [0, 17, 4242, 9999] {
        let s = session.vertex_oracle(v);
        let partner = s.st_partner.map_or("-".to_string(), |p| p.vertex.to_string());
        let extend = s.ex_partner.map_or("-".to_string(), |p| p.vertex.to_string());
        println!("vertex {v:>5}: in M = {:5} (partner {partner}), in S = {:5} (partner {extend})", s.st, s.ex);
    }
    let stats = session.query_stats();
    println!("edge-oracle calls = {}, list probes = {}", stats.f_calls, stats.list_probes);
}
