//! Compare strategies on a batch of instances and print the summary table.
//!
//! cargo run --release --example benchmark

use gp2s::bench::{run_bench, BenchOptions, Measure};
use gp2s::bnb::{Limits, Strategy};
use gp2s::milp::{gen_er_graph, gen_gisp, gen_maxsat, GispParams, MaxsatParams};

fn main() {
    let mut instances = Vec::new();
    for s in 0..6 {
        let g = gen_er_graph(16, 0.6, s).unwrap();
        instances.push(gen_gisp(&g, &GispParams::default(), s).unwrap());
        instances.push(gen_maxsat(16, &g, &MaxsatParams::default(), s).unwrap());
    }
    let strategies: Vec<(String, Strategy)> = ["lb-bfs", "be-bfs", "be-dfs", "score:(div estimate depth)"]
        .iter()
        .map(|s| (s.to_string(), s.parse().unwrap()))
        .collect();
    let opts = BenchOptions {
        limits: Limits::nodes(2_000),
        measure: Measure::Nodes,
        jobs: 2,
        timing: false,
    };
    let report = run_bench(&instances, &strategies, &opts);
    print!("{}", report.format_table());
}
