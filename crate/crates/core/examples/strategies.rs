//! Solve one instance under the fixed strategies and an evolved-style score.
//!
//! cargo run --release --example strategies

use gp2s::bnb::{solve, Limits, Strategy};
use gp2s::milp::{gen_er_graph, gen_maxsat, MaxsatParams};

fn main() {
    let g = gen_er_graph(20, 0.6, 11).unwrap();
    let m = gen_maxsat(20, &g, &MaxsatParams::default(), 11).unwrap();
    println!("{}: {} vars, {} rows\n", m.name, m.num_vars(), m.num_rows());

    let strategies = ["lb-bfs", "be-bfs", "be-dfs", "score:(div ncons (add estimate bigM))", "score:(sub lb (mul bigM depth))"];
    for s in strategies {
        let s: Strategy = s.parse().unwrap();
        let o = solve(&m, &s, Limits::nodes(20_000)).unwrap();
        println!(
            "{:<40} {:<9} z = {:>6}  nodes {:>5}  {:.1?}",
            o.strategy,
            o.status.as_str(),
            o.objective,
            o.nodes_explored,
            o.wall_time
        );
    }

    // A tight node budget stops early and reports the open bound.
    let o = solve(&m, &Strategy::BeDfs, Limits::nodes(5)).unwrap();
    println!("\nnode limit 5: {}", o.to_json());
}
