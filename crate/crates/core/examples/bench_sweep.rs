//! Edge-oracle calls per vertex query as the average degree grows.

use sublinear_matching::cli::bench_row;
use sublinear_matching::{Backend, Seed};

fn main() {
    println!("{:>6} {:>5} {:>8} {:>6} {:>9}", "d", "K", "mean F", "p95 F", "probes");
    for d in [4.0, 8.0, 16.0, 32.0] {
        let row = bench_row(10_000, d, 16, 300, 0.25, Seed(1), 1, Backend::Lazy).unwrap();
        println!("{:>6} {:>5} {:>8.2} {:>6} {:>9}", row.avg_degree, row.k, row.mean_f, row.p95_f, row.probes);
    }
}
